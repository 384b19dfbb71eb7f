"""Online match scheduling: pivot, UCB opponent choice, sparring, and one round.

One round selects a pair, pulls ``batch_size`` prompt-level outcomes from an
outcome source, aggregates them into a macro outcome and applies a single
posterior update. The arena state is only touched after every outcome has
arrived, so a failing source leaves it unchanged.
"""

from __future__ import annotations

import enum
import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels
from .rating import (
    MacroOutcome,
    MicroBatchResult,
    RatingHyperParams,
    RatingState,
    apply_batch,
    conservative_score,
)

_MASK64 = (1 << 64) - 1


class SchedulingError(RuntimeError):
    pass


class NoActiveModelsError(SchedulingError):
    pass


class RoundAborted(RuntimeError):
    """The outcome source failed; the arena state was left untouched."""


class Mode(str, enum.Enum):
    ACTIVE_PAIR = "ActivePair"
    SPARRING = "Sparring"


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def jitter(seed: int, round_index: int, model_id: str) -> float:
    """Counter-based uniform in [0, 1) keyed by (seed, round, opponent id)."""
    key = _splitmix64((seed & _MASK64) ^ _splitmix64(round_index & _MASK64))
    key = _splitmix64(key ^ zlib.crc32(model_id.encode("utf-8")))
    return (key >> 11) * (1.0 / (1 << 53))


def _pair(i: str, j: str) -> tuple[str, str]:
    return (i, j) if i <= j else (j, i)


@dataclass
class ArenaState:
    """Mutable scheduling state for one evaluation dimension.

    ``converge_sigma`` is the uncertainty at or below which a model moves
    from the active to the converged set; ``None`` disables the transfer.
    """

    ratings: dict[str, RatingState] = field(default_factory=dict)
    active: set[str] = field(default_factory=set)
    converged: set[str] = field(default_factory=set)
    pair_counts: dict[tuple[str, str], int] = field(default_factory=dict)
    round_index: int = 0
    rng_seed: int = 0
    converge_sigma: float | None = None

    @classmethod
    def create(
        cls,
        model_ids: Iterable[str],
        hp: RatingHyperParams,
        seed: int = 0,
        converge_sigma: float | None | str = "default",
    ) -> "ArenaState":
        if converge_sigma == "default":
            converge_sigma = hp.sigma_conv
        state = cls(rng_seed=int(seed), converge_sigma=converge_sigma)
        for m in model_ids:
            state.add_model(m, hp)
        return state

    def add_model(self, model_id: str, hp: RatingHyperParams) -> None:
        if model_id in self.ratings:
            raise ValueError(f"model {model_id!r} already registered")
        self.ratings[model_id] = RatingState.initial(hp)
        self.active.add(model_id)

    def pair_count(self, i: str, j: str) -> int:
        return self.pair_counts.get(_pair(i, j), 0)

    def snapshot(self) -> dict:
        return {
            "ratings": {k: v.to_dict() for k, v in sorted(self.ratings.items())},
            "active": sorted(self.active),
            "converged": sorted(self.converged),
            "pair_counts": [[a, b, n] for (a, b), n in sorted(self.pair_counts.items())],
            "round_index": self.round_index,
            "rng_seed": self.rng_seed,
            "converge_sigma": self.converge_sigma,
        }

    @classmethod
    def from_snapshot(cls, snap: dict) -> "ArenaState":
        return cls(
            ratings={k: RatingState.from_dict(v) for k, v in snap["ratings"].items()},
            active=set(snap["active"]),
            converged=set(snap["converged"]),
            pair_counts={(a, b): n for a, b, n in snap["pair_counts"]},
            round_index=snap["round_index"],
            rng_seed=snap["rng_seed"],
            converge_sigma=snap["converge_sigma"],
        )

    def copy(self) -> "ArenaState":
        return ArenaState(
            ratings=dict(self.ratings),
            active=set(self.active),
            converged=set(self.converged),
            pair_counts=dict(self.pair_counts),
            round_index=self.round_index,
            rng_seed=self.rng_seed,
            converge_sigma=self.converge_sigma,
        )


@dataclass(frozen=True)
class ScheduleDecision:
    pivot: str
    opponent: str
    mode: Mode
    selection_tuple: tuple[float, float, float] | None = None


@dataclass(frozen=True)
class RoundRecord:
    round_index: int
    decision: ScheduleDecision
    batch: MicroBatchResult
    macro: MacroOutcome
    pre: tuple[RatingState, RatingState]
    post: tuple[RatingState, RatingState]
    newly_converged: tuple[str, ...] = ()
    prompt_ids: tuple = ()


def _scheduling_pool(state: ArenaState) -> set[str]:
    # Once every model has converged the refinement continues over the
    # converged set, otherwise the arena would stall.
    return state.active if state.active else state.converged


def select_pivot(state: ArenaState) -> str:
    pool = _scheduling_pool(state)
    if not pool:
        raise NoActiveModelsError("no active models to schedule")
    return min(pool, key=lambda m: (state.ratings[m].batches_evaluated, m))


def select_opponent(state: ArenaState, pivot: str, hp: RatingHyperParams) -> ScheduleDecision:
    pool = _scheduling_pool(state)
    candidates = sorted(m for m in pool if m != pivot)
    if candidates:
        # r is the index of the round being scheduled (1-based)
        r = state.round_index + 1
        mus = np.array([state.ratings[m].mu for m in candidates])
        sigmas = np.array([state.ratings[m].sigma for m in candidates])
        counts = np.array([float(state.pair_count(pivot, m)) for m in candidates])
        u, b = _kernels.get("ucb_scores")(
            state.ratings[pivot].mu, mus, sigmas, counts,
            math.log(max(1, r)), float(hp.alpha), float(hp.gamma_sigma),
        )
        best = None
        best_key = None
        for idx, m in enumerate(candidates):
            # jitter only matters on exact (u, b) ties but is recorded always
            key = (float(u[idx]), float(b[idx]), jitter(state.rng_seed, r, m))
            if best_key is None or key > best_key:
                best, best_key = m, key
        return ScheduleDecision(pivot, best, Mode.ACTIVE_PAIR, best_key)
    if state.active and state.converged:
        mu_p = state.ratings[pivot].mu
        best = min(state.converged, key=lambda m: (abs(state.ratings[m].mu - mu_p), m))
        return ScheduleDecision(pivot, best, Mode.SPARRING, None)
    raise SchedulingError(f"no eligible opponent for pivot {pivot!r}")


def schedule(state: ArenaState, hp: RatingHyperParams) -> ScheduleDecision:
    return select_opponent(state, select_pivot(state), hp)


OutcomeSource = Callable[[str, str, int, int], "Sequence | MicroBatchResult"]


def _collect(source: OutcomeSource, a: str, b: str, round_index: int, n: int):
    raw = source(a, b, round_index, n)
    prompt_ids: tuple = ()
    if isinstance(raw, MicroBatchResult):
        batch = raw
    else:
        outcomes = list(raw)
        if outcomes and isinstance(outcomes[0], tuple):
            prompt_ids = tuple(p for p, _ in outcomes)
            outcomes = [o for _, o in outcomes]
        if len(outcomes) > n:
            raise ValueError(f"outcome source returned {len(outcomes)} outcomes for a batch of {n}")
        batch = MicroBatchResult.from_outcomes(outcomes)
    if batch.total > n:
        raise ValueError("micro-batch larger than batch_size")
    return batch, prompt_ids


def run_round(state: ArenaState, outcome_source: OutcomeSource, hp: RatingHyperParams) -> RoundRecord:
    """Play one scheduling round and update ``state`` in place.

    ``outcome_source(model_a, model_b, round_index, batch_size)`` returns
    either a :class:`MicroBatchResult` or a sequence of prompt-level
    verdicts (``"A"``, ``"B"``, ``"Tie"`` or ``None`` for a failed prompt),
    optionally as ``(prompt_id, verdict)`` pairs.
    """
    round_index = state.round_index + 1
    decision = schedule(state, hp)
    a, b = decision.pivot, decision.opponent
    try:
        batch, prompt_ids = _collect(outcome_source, a, b, round_index, hp.batch_size)
    except Exception as exc:
        raise RoundAborted(f"round {round_index} aborted: {exc}") from exc

    pre = (state.ratings[a], state.ratings[b])
    new_a, new_b, macro = apply_batch(pre[0], pre[1], batch, hp)
    state.ratings[a] = new_a
    state.ratings[b] = new_b
    if batch.total > 0:
        key = _pair(a, b)
        state.pair_counts[key] = state.pair_counts.get(key, 0) + 1
    state.round_index = round_index
    moved = []
    if state.converge_sigma is not None:
        for m in (a, b):
            if m in state.active and state.ratings[m].sigma <= state.converge_sigma:
                state.active.discard(m)
                state.converged.add(m)
                moved.append(m)
    return RoundRecord(
        round_index=round_index,
        decision=decision,
        batch=batch,
        macro=macro,
        pre=pre,
        post=(new_a, new_b),
        newly_converged=tuple(moved),
        prompt_ids=prompt_ids,
    )


def leaderboard(state: ArenaState, hp: RatingHyperParams) -> list[tuple[str, float, float, float]]:
    """Rows of (model, conservative score, mu, sigma), best first."""
    rows = [
        (m, conservative_score(s, hp), s.mu, s.sigma) for m, s in state.ratings.items()
    ]
    rows.sort(key=lambda row: (-row[1], -row[2], row[0]))
    return rows


def inject(state: ArenaState, model_id: str, hp: RatingHyperParams) -> None:
    """Late entry: fresh prior, zero batches, so it becomes pivot at once."""
    state.add_model(model_id, hp)
