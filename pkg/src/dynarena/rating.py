"""Bayesian rating state, conservative scoring, micro-batch aggregation and updates.

Each model carries a Gaussian posterior ``(mu, sigma)``. A pair is compared
on a micro-batch of prompts; the prompt-level tallies are resolved into a
ternary macro outcome with a confidence weight, and exactly one posterior
update is applied per batch:

* decisive batch  -> weighted TrueSkill-style win/loss update
* tie batch       -> soft pull of both means toward their midpoint
* empty batch     -> no posterior change

Leaderboards rank by the conservative score ``mu - eta_eff * sigma`` where
``eta_eff`` ramps up over a model's first ``warmup_batches`` batches.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, fields, replace

from . import _kernels


class Verdict(str, enum.Enum):
    """Prompt-level pairwise outcome."""

    A = "A"
    B = "B"
    TIE = "Tie"

    def mirrored(self) -> "Verdict":
        if self is Verdict.A:
            return Verdict.B
        if self is Verdict.B:
            return Verdict.A
        return self


class MacroVerdict(str, enum.Enum):
    """Batch-level outcome after thresholding the empirical win rate."""

    WIN_A = "WinA"
    WIN_B = "WinB"
    TIE = "Tie"
    INVALID = "Invalid"

    @property
    def decisive(self) -> bool:
        return self in (MacroVerdict.WIN_A, MacroVerdict.WIN_B)


@dataclass(frozen=True)
class RatingHyperParams:
    mu0: float = 1000.0
    sigma0: float = 300.0
    beta: float = 70.0
    eta: float = 3.0
    alpha: float = 190.0
    sigma_conv: float = 20.0
    p_low: float = 0.42
    p_high: float = 0.58
    tie_shrink: float = 0.98
    tie_pull: float = 0.05
    weight_slope: float = 2.0
    weight_max: float = 2.0
    gamma_sigma: float = 1.0
    warmup_batches: int = 20
    warmup_min_ratio: float = 0.20
    batch_size: int = 15
    # ablation switch: False forces every decisive batch to weight 1
    decisive_weighting: bool = True

    def __post_init__(self):
        if not 0.0 < self.p_low < 0.5 < self.p_high < 1.0:
            raise ValueError(f"need 0 < p_low < 0.5 < p_high < 1, got {self.p_low}, {self.p_high}")
        if not 0.0 < self.tie_shrink <= 1.0:
            raise ValueError("tie_shrink must lie in (0, 1]")
        if not 0.0 <= self.tie_pull <= 1.0:
            raise ValueError("tie_pull must lie in [0, 1]")
        if self.weight_max < 1.0:
            raise ValueError("weight_max must be >= 1")
        if self.sigma_conv <= 0.0:
            raise ValueError("sigma_conv must be positive")
        if self.sigma0 <= 0.0 or self.beta <= 0.0:
            raise ValueError("sigma0 and beta must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict | None) -> "RatingHyperParams":
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown hyperparameters: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True, slots=True)
class RatingState:
    """Posterior of one model plus descriptive tallies.

    ``batches_evaluated`` counts informative (non-empty) micro-batches and
    drives both pivot selection and the warmup ramp. ``batches_attempted``
    additionally counts empty batches.
    """

    mu: float
    sigma: float
    batches_evaluated: int = 0
    wins: int = 0
    losses: int = 0
    ties: int = 0
    prompts_seen: int = 0
    batches_attempted: int = 0

    @classmethod
    def initial(cls, hp: RatingHyperParams) -> "RatingState":
        return cls(mu=hp.mu0, sigma=hp.sigma0)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "RatingState":
        return cls(**data)


@dataclass(frozen=True, slots=True)
class MicroBatchResult:
    wins_a: int
    wins_b: int
    ties: int

    def __post_init__(self):
        if min(self.wins_a, self.wins_b, self.ties) < 0:
            raise ValueError("micro-batch tallies must be non-negative")

    @property
    def total(self) -> int:
        return self.wins_a + self.wins_b + self.ties

    def mirrored(self) -> "MicroBatchResult":
        return MicroBatchResult(self.wins_b, self.wins_a, self.ties)

    @classmethod
    def from_outcomes(cls, outcomes) -> "MicroBatchResult":
        """Tally prompt-level outcomes; ``None`` entries are failed prompts."""
        wa = wb = t = 0
        for o in outcomes:
            if o is None:
                continue
            o = Verdict(o)
            if o is Verdict.A:
                wa += 1
            elif o is Verdict.B:
                wb += 1
            else:
                t += 1
        return cls(wa, wb, t)


@dataclass(frozen=True, slots=True)
class MacroOutcome:
    verdict: MacroVerdict
    p_a: float
    weight: float


def effective_eta(batches_evaluated: int, hp: RatingHyperParams) -> float:
    if hp.warmup_batches <= 0:
        return hp.eta
    ratio = batches_evaluated / hp.warmup_batches
    return hp.eta * max(hp.warmup_min_ratio, min(1.0, ratio))


def conservative_score(state: RatingState, hp: RatingHyperParams) -> float:
    return state.mu - effective_eta(state.batches_evaluated, hp) * state.sigma


def aggregate_micro_batch(result: MicroBatchResult, hp: RatingHyperParams) -> MacroOutcome:
    n = result.total
    if n == 0:
        return MacroOutcome(MacroVerdict.INVALID, 0.5, 1.0)
    p_a = (result.wins_a + 0.5 * result.ties) / n
    # strict comparisons: p_a exactly at a threshold is a tie
    if p_a > hp.p_high:
        verdict, p_w = MacroVerdict.WIN_A, p_a
    elif p_a < hp.p_low:
        # winner share from the tallies, not 1 - p_a, to avoid a second rounding
        verdict, p_w = MacroVerdict.WIN_B, (result.wins_b + 0.5 * result.ties) / n
    else:
        return MacroOutcome(MacroVerdict.TIE, p_a, 1.0)
    if not hp.decisive_weighting:
        return MacroOutcome(verdict, p_a, 1.0)
    weight = min(hp.weight_max, 1.0 + hp.weight_slope * (p_w - 0.5))
    return MacroOutcome(verdict, p_a, weight)


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite rating input: {v!r}")


def decisive_update(
    winner: RatingState, loser: RatingState, weight: float, hp: RatingHyperParams
) -> tuple[RatingState, RatingState]:
    """Weighted Gaussian win/loss update with an uncertainty floor."""
    _check_finite(winner.mu, winner.sigma, loser.mu, loser.sigma, weight)
    if weight < 1.0 or weight > hp.weight_max:
        raise ValueError(f"weight {weight} outside [1, {hp.weight_max}]")
    mu_w, s_w, mu_l, s_l = _kernels.get("decisive_update")(
        winner.mu, winner.sigma, loser.mu, loser.sigma, weight, hp.beta, hp.sigma_conv
    )
    return replace(winner, mu=mu_w, sigma=s_w), replace(loser, mu=mu_l, sigma=s_l)


def tie_update(a: RatingState, b: RatingState, hp: RatingHyperParams) -> tuple[RatingState, RatingState]:
    mid = 0.5 * (a.mu + b.mu)
    keep = 1.0 - hp.tie_pull
    floor = hp.sigma_conv * hp.sigma_conv
    a_new = replace(
        a,
        mu=keep * a.mu + hp.tie_pull * mid,
        sigma=math.sqrt(max(floor, hp.tie_shrink * a.sigma * a.sigma)),
    )
    b_new = replace(
        b,
        mu=keep * b.mu + hp.tie_pull * mid,
        sigma=math.sqrt(max(floor, hp.tie_shrink * b.sigma * b.sigma)),
    )
    return a_new, b_new


def _tally(state: RatingState, won: int, lost: int, tied: int, informative: bool) -> RatingState:
    return replace(
        state,
        wins=state.wins + won,
        losses=state.losses + lost,
        ties=state.ties + tied,
        prompts_seen=state.prompts_seen + won + lost + tied,
        batches_attempted=state.batches_attempted + 1,
        batches_evaluated=state.batches_evaluated + (1 if informative else 0),
    )


def apply_batch(
    a: RatingState, b: RatingState, batch: MicroBatchResult, hp: RatingHyperParams
) -> tuple[RatingState, RatingState, MacroOutcome]:
    """Record tallies and apply exactly one posterior update for one micro-batch."""
    macro = aggregate_micro_batch(batch, hp)
    if macro.verdict is MacroVerdict.WIN_A:
        a, b = decisive_update(a, b, macro.weight, hp)
    elif macro.verdict is MacroVerdict.WIN_B:
        b, a = decisive_update(b, a, macro.weight, hp)
    elif macro.verdict is MacroVerdict.TIE:
        a, b = tie_update(a, b, hp)
    informative = macro.verdict is not MacroVerdict.INVALID
    a = _tally(a, batch.wins_a, batch.wins_b, batch.ties, informative)
    b = _tally(b, batch.wins_b, batch.wins_a, batch.ties, informative)
    return a, b, macro
