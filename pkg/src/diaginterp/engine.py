"""The interpretation engine: query a disagreement, update the known model,
re-measure the disagreement entropy, repeat.

A run starts from the known model and the initial disagreement entropy over
the evaluation space; that initial entropy stays fixed as the denominator of
every per-step interpretability value. Runs terminate when the entropy hits
zero, no queryable disagreement remains, the trajectory stalls, or the query
budget runs out. Reports capture the whole trajectory and are deterministic
functions of the configuration, seed included.

Two entry points:

* run_interpretation -- the budgeted, seeded loop (diagnostic or single-level
  epsilon mode, rule-edit or retraining updater);
* run_complete_interpretation -- exhaustive, unbudgeted querying of a full
  space in enumeration order with the rule updater, stopping at zero entropy
  or at a fixed point where a whole pass leaves the entropy unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AbstractionMismatchError, InvalidConfigError
from .imagespace import (
    BinaryImage,
    ImageSpaceSpec,
    cardinality_full,
    space_cardinality,
    space_matrix,
    enumerate_space,
    spec_from_json,
    spec_to_json,
)
from .metrics import (
    Confidence,
    EntropyBreakdown,
    confidence_epsilon,
    disagreement_breakdown,
    interpretability,
    objective,
)
from .models import (
    Dataset,
    LinearModel,
    Model,
    RuleModel,
    level_label_matrix,
    linear_update,
    model_from_json,
    model_grid,
    model_to_json,
    num_levels,
    predict,
    rule_update,
)

RULE_UPDATER = "rule_minimal_edit"
RETRAIN_UPDATER = "retrain_with_queries"

TERM_ENTROPY_ZERO = "entropy_zero"
TERM_NO_DISAGREEMENT = "no_disagreement"
TERM_STALLED = "stalled"
TERM_BUDGET = "budget_exhausted"


@dataclass(frozen=True)
class EngineConfig:
    space: ImageSpaceSpec
    model_a: Model
    model_b: Model
    updater: str
    max_queries: int
    lam: float = 0.0
    rng_seed: int = 0
    mode: str = "diagnostic"
    base_dataset: Dataset | None = None
    stall_patience: int = 3
    retrain_epochs: int = 50
    retrain_learning_rate: float = 1.0

    def __post_init__(self) -> None:
        if self.updater not in (RULE_UPDATER, RETRAIN_UPDATER):
            raise InvalidConfigError(f"unknown updater {self.updater!r}")
        if self.mode not in ("diagnostic", "epsilon"):
            raise InvalidConfigError(f"unknown mode {self.mode!r}")
        if self.max_queries < 0:
            raise InvalidConfigError("max_queries cannot be negative")
        if self.lam < 0:
            raise InvalidConfigError("lambda cannot be negative")
        if self.stall_patience < 1:
            raise InvalidConfigError("stall patience must be at least 1")
        grid = (self.space.width, self.space.height)
        for name, model in (("model_a", self.model_a), ("model_b", self.model_b)):
            if model_grid(model) != grid:
                raise InvalidConfigError(
                    f"{name} expects grid {model.width}x{model.height}, "
                    f"space is {grid[0]}x{grid[1]}"
                )
        if self.mode == "diagnostic" and num_levels(self.model_a) != num_levels(self.model_b):
            raise AbstractionMismatchError(
                f"diagnostic mode requires matched level counts, got "
                f"{num_levels(self.model_a)} vs {num_levels(self.model_b)}"
            )
        if self.updater == RETRAIN_UPDATER:
            if self.base_dataset is None:
                raise InvalidConfigError("the retraining updater requires base_dataset")
            if not isinstance(self.model_a, LinearModel):
                raise InvalidConfigError("the retraining updater drives a linear model")
        if self.updater == RULE_UPDATER and not isinstance(self.model_a, RuleModel):
            raise InvalidConfigError("the rule updater drives a rule model")


@dataclass(frozen=True)
class StepRecord:
    t: int
    query: BinaryImage
    entropy_after: EntropyBreakdown
    i_t: float
    delta_i_t: float

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "query": self.query.to_string(),
            "entropy_after": self.entropy_after.to_json(),
            "I_t": self.i_t,
            "delta_I_t": self.delta_i_t,
        }


@dataclass(frozen=True)
class Report:
    initial_entropy: EntropyBreakdown
    steps: tuple[StepRecord, ...]
    final_interpretability: float
    objective_j: float
    termination: str
    raw_unclamped_final: float
    seed: int
    config: EngineConfig
    epsilon: Confidence | None = None
    pass_disagreements: tuple[int, ...] | None = None
    final_model: Model | None = field(repr=False, default=None)

    def to_json(self) -> dict:
        doc = {
            "seed": self.seed,
            "mode": self.config.mode,
            "termination": self.termination,
            "initial_entropy": self.initial_entropy.to_json(),
            "steps": [step.to_json() for step in self.steps],
            "final_interpretability": self.final_interpretability,
            "raw_unclamped_final": self.raw_unclamped_final,
            "objective_J": self.objective_j,
            "epsilon": None
            if self.epsilon is None
            else {"log2_epsilon": self.epsilon.log2_epsilon, "display": self.epsilon.display},
            "config": config_to_json(self.config),
        }
        if self.pass_disagreements is not None:
            doc["pass_disagreements"] = list(self.pass_disagreements)
        return doc


def trajectory_rows(report: Report) -> list[str]:
    """CSV lines (header first): t, I_t, delta_I_t, H_total per step."""
    rows = ["t,I_t,delta_I_t,H_total"]
    for step in report.steps:
        rows.append(
            f"{step.t},{step.i_t!r},{step.delta_i_t!r},{step.entropy_after.total!r}"
        )
    return rows


def _measure(config: EngineConfig, model_a: Model) -> EntropyBreakdown:
    return disagreement_breakdown(
        model_a, config.model_b, config.space, top_only=config.mode == "epsilon"
    )


def _epsilon_for(config: EngineConfig) -> Confidence | None:
    if config.mode != "epsilon":
        return None
    return confidence_epsilon(
        space_cardinality(config.space),
        cardinality_full(config.space.width, config.space.height),
    )


def _update_target(config: EngineConfig, model_a: Model, image: BinaryImage) -> list[int]:
    """Per-level targets for an update: the black box's levels in diagnostic
    mode; in epsilon mode only the diagnosis level is forced."""
    target = list(predict(config.model_b, image))
    if config.mode == "epsilon" and num_levels(model_a) != len(target):
        current = list(predict(model_a, image))
        current[-1] = target[-1]
        target = current
    return target


def run_interpretation(config: EngineConfig) -> Report:
    """Budgeted random-query interpretation (the seeded loop)."""
    images = enumerate_space(config.space)
    matrix = space_matrix(config.space)
    b_top = level_label_matrix(config.model_b, matrix)[-1]

    initial = _measure(config, config.model_a)
    h0 = initial.total
    steps: list[StepRecord] = []
    raw_final = 1.0 if h0 == 0.0 else 0.0
    termination = TERM_NO_DISAGREEMENT

    model_a = config.model_a
    if h0 > 0.0:
        rng = np.random.default_rng(config.rng_seed)
        queries: list[tuple[BinaryImage, int]] = []
        prev_i = 0.0
        zero_delta_run = 0
        termination = TERM_BUDGET
        for t in range(1, config.max_queries + 1):
            a_top = level_label_matrix(model_a, matrix)[-1]
            disagree = np.flatnonzero(a_top != b_top)
            if disagree.size == 0:
                termination = TERM_NO_DISAGREEMENT
                break
            idx = int(disagree[int(rng.integers(0, disagree.size))])
            image = images[idx]
            if config.updater == RULE_UPDATER:
                target = _update_target(config, model_a, image)
                model_a = rule_update(model_a, image, target, config.space, config.model_b)
            else:
                queries.append((image, int(b_top[idx])))
                retrain_seed = int(rng.integers(0, 2**31))
                model_a = linear_update(
                    config.model_a,
                    config.base_dataset,
                    queries,
                    config.retrain_epochs,
                    config.retrain_learning_rate,
                    retrain_seed,
                )
            after = _measure(config, model_a)
            raw_final = (h0 - after.total) / h0
            i_t = interpretability(h0, after.total)
            delta = i_t - prev_i
            steps.append(StepRecord(t, image, after, float(i_t), float(delta)))
            prev_i = i_t
            if after.total == 0.0:
                termination = TERM_ENTROPY_ZERO
                break
            zero_delta_run = zero_delta_run + 1 if delta == 0.0 else 0
            if zero_delta_run >= config.stall_patience:
                termination = TERM_STALLED
                break

    final = steps[-1].i_t if steps else (1.0 if h0 == 0.0 else 0.0)
    return Report(
        initial_entropy=initial,
        steps=tuple(steps),
        final_interpretability=float(final),
        objective_j=objective([s.i_t for s in steps], config.lam, len(steps)),
        termination=termination,
        raw_unclamped_final=float(raw_final),
        seed=config.rng_seed,
        config=config,
        epsilon=_epsilon_for(config),
        final_model=model_a,
    )


def run_complete_interpretation(config: EngineConfig) -> Report:
    """Exhaustive interpretation of a full space in enumeration order.

    The query budget is ignored: every per-level disagreement is visited,
    pass after pass, until none remain or a full pass leaves the total
    entropy unchanged (a fixed point of the updater).
    """
    if config.space.mode != "full":
        raise InvalidConfigError("complete interpretation runs over a full space")
    if config.updater != RULE_UPDATER:
        raise InvalidConfigError("complete interpretation uses the rule updater")
    if num_levels(config.model_a) != num_levels(config.model_b):
        raise AbstractionMismatchError(
            "complete interpretation updates every level and needs matched level counts"
        )

    images = enumerate_space(config.space)
    matrix = space_matrix(config.space)
    b_levels = level_label_matrix(config.model_b, matrix)

    initial = _measure(config, config.model_a)
    h0 = initial.total
    steps: list[StepRecord] = []
    pass_counts: list[int] = []
    raw_final = 1.0 if h0 == 0.0 else 0.0
    termination = TERM_NO_DISAGREEMENT
    model_a = config.model_a

    if h0 > 0.0:
        prev_i = 0.0
        t = 0
        entropy_before_pass = h0
        for _ in range(1000):
            a_levels = level_label_matrix(model_a, matrix)
            disagree_mask = (a_levels != b_levels).any(axis=0)
            pass_counts.append(int(np.count_nonzero(disagree_mask)))
            position = 0
            updated_in_pass = False
            after = None
            while True:
                remaining = np.flatnonzero(disagree_mask[position:])
                if remaining.size == 0:
                    break
                idx = position + int(remaining[0])
                image = images[idx]
                target = [int(v) for v in b_levels[:, idx]]
                model_a = rule_update(model_a, image, target, config.space, config.model_b)
                updated_in_pass = True
                t += 1
                after = _measure(config, model_a)
                raw_final = (h0 - after.total) / h0
                i_t = interpretability(h0, after.total)
                steps.append(StepRecord(t, image, after, float(i_t), float(i_t - prev_i)))
                prev_i = i_t
                if after.total == 0.0:
                    break
                position = idx + 1
                a_levels = level_label_matrix(model_a, matrix)
                disagree_mask = (a_levels != b_levels).any(axis=0)
            if after is not None and after.total == 0.0:
                termination = TERM_ENTROPY_ZERO
                break
            if not updated_in_pass:
                termination = TERM_ENTROPY_ZERO
                break
            entropy_now = steps[-1].entropy_after.total
            if entropy_now == entropy_before_pass:
                termination = TERM_STALLED
                break
            entropy_before_pass = entropy_now
        else:
            raise InvalidConfigError("complete interpretation failed to settle within 1000 passes")

    final = steps[-1].i_t if steps else (1.0 if h0 == 0.0 else 0.0)
    return Report(
        initial_entropy=initial,
        steps=tuple(steps),
        final_interpretability=float(final),
        objective_j=objective([s.i_t for s in steps], config.lam, len(steps)),
        termination=termination,
        raw_unclamped_final=float(raw_final),
        seed=config.rng_seed,
        config=config,
        epsilon=_epsilon_for(config),
        pass_disagreements=tuple(pass_counts),
        final_model=model_a,
    )


def config_to_json(config: EngineConfig) -> dict:
    doc = {
        "space": spec_to_json(config.space),
        "model_a": model_to_json(config.model_a),
        "model_b": model_to_json(config.model_b),
        "updater": config.updater,
        "max_queries": config.max_queries,
        "lambda": config.lam,
        "rng_seed": config.rng_seed,
        "mode": config.mode,
        "stall_patience": config.stall_patience,
        "retrain_epochs": config.retrain_epochs,
        "retrain_learning_rate": config.retrain_learning_rate,
        "base_dataset": None
        if config.base_dataset is None
        else [[img.to_string(), int(label)] for img, label in config.base_dataset],
    }
    return doc


def config_from_json(doc: dict) -> EngineConfig:
    try:
        space = spec_from_json(doc["space"])
        model_a = model_from_json(doc["model_a"])
        model_b = model_from_json(doc["model_b"])
        updater = doc["updater"]
    except KeyError as missing:
        raise InvalidConfigError(f"run spec missing key {missing}") from None
    base = doc.get("base_dataset")
    dataset = None
    if base is not None:
        dataset = [
            (BinaryImage.from_string(space.width, space.height, text), int(label))
            for text, label in base
        ]
    return EngineConfig(
        space=space,
        model_a=model_a,
        model_b=model_b,
        updater=updater,
        max_queries=int(doc.get("max_queries", 10)),
        lam=float(doc.get("lambda", 0.0)),
        rng_seed=int(doc.get("rng_seed", 0)),
        mode=doc.get("mode", "diagnostic"),
        base_dataset=dataset,
        stall_patience=int(doc.get("stall_patience", 3)),
        retrain_epochs=int(doc.get("retrain_epochs", 50)),
        retrain_learning_rate=float(doc.get("retrain_learning_rate", 1.0)),
    )
