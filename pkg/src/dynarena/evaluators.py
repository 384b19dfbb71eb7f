"""Convert heterogeneous evaluator signals into one ternary pairwise outcome."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from ._kernels import norm_cdf
from .rating import Verdict

PERCEPTUAL_EPS = 1e-5
PERCEPTUAL_LOW = 0.42
PERCEPTUAL_HIGH = 0.58
AESTHETIC_TIE_THRESHOLD = 3.5
DEFAULT_K = 4


class Dimension(str, enum.Enum):
    ALIGNMENT = "Alignment"
    PERCEPTUAL = "Perceptual"
    AESTHETIC = "Aesthetic"


@dataclass(frozen=True)
class PairwiseOutcome:
    verdict: Verdict
    dimension: Dimension
    prompt_id: Any = None
    detail: dict | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ScoreSampleSet:
    """Repeated scores for one image, with mean and unbiased variance."""

    samples: tuple[float, ...]
    mean: float
    variance: float

    @classmethod
    def from_samples(cls, samples: Sequence[float]) -> "ScoreSampleSet":
        xs = tuple(float(s) for s in samples)
        if not xs:
            raise ValueError("score sample set is empty")
        if not all(math.isfinite(x) for x in xs):
            raise ValueError("score samples must be finite")
        k = len(xs)
        mean = sum(xs) / k
        var = sum((x - mean) ** 2 for x in xs) / (k - 1) if k > 1 else 0.0
        return cls(xs, mean, var)


def perceptual_probability(a: ScoreSampleSet, b: ScoreSampleSet, eps: float = PERCEPTUAL_EPS) -> float:
    """Thurstone win probability of ``a`` over ``b``."""
    if not a.samples or not b.samples:
        raise ValueError("score sample set is empty")
    denom = math.sqrt(max(0.0, a.variance) + max(0.0, b.variance) + eps)
    return norm_cdf((a.mean - b.mean) / denom)


def perceptual_compare(
    a: ScoreSampleSet,
    b: ScoreSampleSet,
    *,
    low: float = PERCEPTUAL_LOW,
    high: float = PERCEPTUAL_HIGH,
    eps: float = PERCEPTUAL_EPS,
    prompt_id: Any = None,
) -> PairwiseOutcome:
    p = perceptual_probability(a, b, eps)
    if p > high:
        verdict = Verdict.A
    elif p < low:
        verdict = Verdict.B
    else:
        verdict = Verdict.TIE
    return PairwiseOutcome(verdict, Dimension.PERCEPTUAL, prompt_id, {"p_a": p})


def aesthetic_compare(
    score_a: float,
    score_b: float,
    threshold: float = AESTHETIC_TIE_THRESHOLD,
    *,
    prompt_id: Any = None,
) -> PairwiseOutcome:
    if not (math.isfinite(score_a) and math.isfinite(score_b)):
        raise ValueError("aesthetic scores must be finite")
    gap = score_a - score_b
    if abs(gap) < threshold:
        verdict = Verdict.TIE
    else:
        verdict = Verdict.A if gap > 0 else Verdict.B
    return PairwiseOutcome(verdict, Dimension.AESTHETIC, prompt_id, {"gap": gap})


def order_swap_aggregate(first, second) -> Verdict:
    """Reconcile two judgments already mapped back to canonical A/B labels."""
    first, second = Verdict(first), Verdict(second)
    if first is second:
        return first
    if first is Verdict.TIE:
        return second
    if second is Verdict.TIE:
        return first
    return Verdict.TIE
