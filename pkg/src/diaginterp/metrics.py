"""Information measures over the disagreement channel between two models.

Viewing one model's attempt to emulate another as a noisy binary channel, the
per-level disagreement rate is the channel's crossover probability, its binary
entropy is the remaining uncertainty at that level, and levels add up under
the independence convention. Interpretability is the fractional reduction of
that entropy achieved by querying; confidence is the coverage of the queried
set relative to the whole image space, carried in log2 so enormous spaces
never underflow.

Entropy is measured in bits throughout. Disagreement rates are formed from
exact integer counts before any float arithmetic happens.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import AbstractionMismatchError, DomainError, InvalidConfigError
from .imagespace import ImageSpaceSpec, SpaceCardinality, space_matrix
from .models import Model, level_label_matrix, model_grid, num_levels


def binary_entropy(f: float) -> float:
    """h(f) = f*log2(1/f) + (1-f)*log2(1/(1-f)), with h(0) = h(1) = 0."""
    f = float(f)
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"disagreement rate must lie in [0, 1], got {f}")
    if f == 0.0 or f == 1.0:
        return 0.0
    return -f * math.log2(f) - (1.0 - f) * math.log2(1.0 - f)


@dataclass(frozen=True)
class EntropyBreakdown:
    """Per-level disagreement entropies and their sum.

    ``disagreement_counts`` and ``sample_size`` keep the exact integers the
    rates came from, so anything downstream can re-derive them without float
    accumulation.
    """

    per_level: tuple[float, ...]
    total: float
    disagreement_rates: tuple[float, ...]
    disagreement_counts: tuple[int, ...]
    sample_size: int

    @classmethod
    def from_counts(cls, counts, sample_size: int) -> "EntropyBreakdown":
        if sample_size <= 0:
            raise DomainError("sample size must be positive")
        counts = tuple(int(c) for c in counts)
        if any(c < 0 or c > sample_size for c in counts):
            raise DomainError(f"counts {counts} incompatible with sample size {sample_size}")
        rates = tuple(c / sample_size for c in counts)
        per_level = tuple(binary_entropy(r) for r in rates)
        return cls(
            per_level=per_level,
            total=float(sum(per_level)),
            disagreement_rates=rates,
            disagreement_counts=counts,
            sample_size=int(sample_size),
        )

    def to_json(self) -> dict:
        return {
            "per_level": list(self.per_level),
            "total": self.total,
            "disagreement_rates": list(self.disagreement_rates),
            "disagreement_counts": list(self.disagreement_counts),
            "sample_size": self.sample_size,
        }


def disagreement_breakdown(
    model_a: Model,
    model_b: Model,
    spec: ImageSpaceSpec,
    top_only: bool = False,
) -> EntropyBreakdown:
    """Exact per-level disagreement entropies of two models over a space.

    Both models must share the space's grid. In the default per-level form
    they must also share the number of abstraction levels; ``top_only=True``
    compares diagnosis labels only, which is how single-level evaluation of
    mismatched families is done.
    """
    for name, model in (("model_a", model_a), ("model_b", model_b)):
        if model_grid(model) != (spec.width, spec.height):
            raise InvalidConfigError(
                f"{name} expects grid {model.width}x{model.height}, "
                f"space is {spec.width}x{spec.height}"
            )
    matrix = space_matrix(spec)
    labels_a = level_label_matrix(model_a, matrix)
    labels_b = level_label_matrix(model_b, matrix)
    if top_only:
        labels_a = labels_a[-1:]
        labels_b = labels_b[-1:]
    elif num_levels(model_a) != num_levels(model_b):
        raise AbstractionMismatchError(
            f"models have {num_levels(model_a)} and {num_levels(model_b)} levels; "
            "per-level comparison requires a one-to-one level match"
        )
    counts = (labels_a != labels_b).sum(axis=1)
    return EntropyBreakdown.from_counts(counts, matrix.shape[0])


def interpretability(h_initial: float, h_final: float) -> float:
    """Fractional entropy reduction (h_initial - h_final) / h_initial.

    Zero initial entropy means the models were informationally identical to
    begin with, which counts as fully interpreted. A final entropy above the
    initial one (possible under retraining updates) is clamped to 0 with a
    warning; callers that care keep the raw ratio separately.
    """
    h_initial = float(h_initial)
    h_final = float(h_final)
    if h_initial < 0.0 or h_final < 0.0:
        raise DomainError("entropies cannot be negative")
    if h_initial == 0.0:
        return 1.0
    raw = (h_initial - h_final) / h_initial
    if raw < 0.0:
        warnings.warn(
            f"entropy increased ({h_final} > {h_initial}); interpretability clamped to 0",
            stacklevel=2,
        )
        return 0.0
    return raw


@dataclass(frozen=True)
class Confidence:
    """Coverage of the evaluation subset relative to the full image space,
    as log2(|S|) - log2(|full|), plus a scientific-notation rendering."""

    log2_epsilon: float
    display: str

    @property
    def value(self) -> float:
        """The ratio as a float; underflows to 0.0 below ~1e-308 (the log2
        field and display never do)."""
        return 2.0 ** self.log2_epsilon


def _scientific_from_log2(log2_value: float) -> str:
    log10_value = log2_value * math.log10(2.0)
    exponent = math.floor(log10_value)
    mantissa = 10.0 ** (log10_value - exponent)
    if mantissa >= 9.9995:  # rounding at 3 decimals carried over
        mantissa /= 10.0
        exponent += 1
    return f"{mantissa:.3f}e{exponent:+03d}"


def confidence_epsilon(
    sample_card: SpaceCardinality, full_card: SpaceCardinality
) -> Confidence:
    """Confidence ratio |S| / |full space|, computed in log2 form."""
    if sample_card.exact_value == 0:
        raise DomainError("sample cardinality must be positive")
    if sample_card.log2_value > full_card.log2_value + 1e-12:
        raise DomainError(
            f"sample cardinality (log2 {sample_card.log2_value}) exceeds the "
            f"full space (log2 {full_card.log2_value})"
        )
    log2_eps = min(sample_card.log2_value - full_card.log2_value, 0.0)
    return Confidence(log2_epsilon=log2_eps, display=_scientific_from_log2(log2_eps))


def objective(
    per_step_interpretability, lam: float, sample_count: int
) -> float:
    """Query-penalized objective: -sum of per-step interpretability plus
    lam * (number of sampled queries)."""
    lam = float(lam)
    if lam < 0.0:
        raise DomainError(f"penalty weight must be nonnegative, got {lam}")
    values = [float(v) for v in per_step_interpretability]
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"per-step interpretability must lie in [0, 1], got {v}")
    if sample_count < 0:
        raise DomainError("sample count cannot be negative")
    return -sum(values) + lam * sample_count
