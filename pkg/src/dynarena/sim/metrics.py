"""Rank agreement and late-entry localisation metrics.

Rankings are either ordered id sequences (best first, no ties) or mappings
from id to a rank value where equal values are ties. Permutation inputs use
integer arithmetic up to one final division, so results are exact to the
last bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .. import _kernels


class RankingMismatchError(ValueError):
    pass


def _as_rank_map(r) -> tuple[dict, bool]:
    """Return (id -> rank value, is_strict_permutation)."""
    if isinstance(r, Mapping):
        return dict(r), False
    ids = list(r)
    if len(set(ids)) != len(ids):
        raise RankingMismatchError("ranking lists must not repeat ids")
    return {m: i + 1 for i, m in enumerate(ids)}, True


def _aligned(rank_a, rank_b):
    a, strict_a = _as_rank_map(rank_a)
    b, strict_b = _as_rank_map(rank_b)
    if set(a) != set(b):
        raise RankingMismatchError("rankings cover different id sets")
    if len(a) < 2:
        raise RankingMismatchError("need at least two items")
    ids = sorted(a)
    x = np.array([a[m] for m in ids], dtype=float)
    y = np.array([b[m] for m in ids], dtype=float)
    return x, y, strict_a and strict_b


def spearman(rank_a, rank_b) -> float:
    x, y, strict = _aligned(rank_a, rank_b)
    n = len(x)
    if strict:
        d2 = int(((x - y) ** 2).sum())
        denom = n * (n * n - 1)
        return (denom - 6 * d2) / denom
    rx, ry = rankdata(x), rankdata(y)  # average ranks for ties
    rx -= rx.mean()
    ry -= ry.mean()
    norm = math.sqrt(float((rx * rx).sum() * (ry * ry).sum()))
    if norm == 0.0:
        return float("nan")
    return float(np.clip((rx * ry).sum() / norm, -1.0, 1.0))


def kendall(rank_a, rank_b) -> float:
    """Kendall tau-b (tau-a for strict permutations)."""
    x, y, _ = _aligned(rank_a, rank_b)
    con, dis, tx, ty = _kendall_counts(x, y)
    n0 = len(x) * (len(x) - 1) // 2
    if tx == 0 and ty == 0 and con + dis == n0:
        return (con - dis) / n0
    denom = math.sqrt((con + dis + tx) * (con + dis + ty))
    if denom == 0.0:
        return float("nan")
    return (con - dis) / denom


def _kendall_counts(x, y):
    return tuple(int(v) for v in _kernels.get("kendall_counts")(x, y))


def topk_overlap(rank_a: Sequence, rank_b: Sequence, k: int) -> float:
    a, b = list(rank_a), list(rank_b)
    if set(a) != set(b):
        raise RankingMismatchError("rankings cover different id sets")
    if not 1 <= k <= len(a):
        raise ValueError("k must lie in [1, n]")
    return len(set(a[:k]) & set(b[:k])) / k


@dataclass(frozen=True)
class Localization:
    """Where a late entry landed relative to a target position."""

    injection_round: int
    target_rank: int
    first_hit: int | None
    stable_hit: int | None
    success: bool

    @property
    def rounds_to_first_hit(self) -> int | None:
        return None if self.first_hit is None else self.first_hit - self.injection_round

    @property
    def rounds_to_stable_hit(self) -> int | None:
        return None if self.stable_hit is None else self.stable_hit - self.injection_round


def localize(trace: Mapping[int, int], injection_round: int, target_rank: int,
             window: int = 10, horizon: int | None = None, radius: int = 1) -> Localization:
    """Locate a late entry in ``trace`` (round -> 1-based position after that round).

    The first hit is the first round at or after the injection whose position
    is within ``radius`` of ``target_rank``; the stable hit is the first round
    from which the position stays in that band for ``window`` further rounds.
    Only hits no later than ``injection_round + horizon`` count as success.
    """
    rounds = sorted(r for r in trace if r >= injection_round)
    if not rounds or rounds[0] != injection_round:
        raise ValueError(f"trace does not cover injection round {injection_round}")
    inside = {r: abs(trace[r] - target_rank) <= radius for r in rounds}
    first = next((r for r in rounds if inside[r]), None)
    stable = None
    for r in rounds:
        if not inside[r]:
            continue
        span = range(r, r + window + 1)
        if all(inside.get(s, False) for s in span):
            stable = r
            break
    ok = first is not None and (horizon is None or first - injection_round <= horizon)
    return Localization(injection_round, target_rank, first, stable, ok)


@dataclass(frozen=True)
class DiscoverySummary:
    latency: float
    success: float
    top1_rate: float
    n: int


def summarize_discovery(events: Sequence[Localization], top1_flags: Sequence[bool | None] = ()) -> DiscoverySummary:
    """Mean latency over successful events, success rate, and top-1 rate.

    ``top1_flags`` holds one entry per event: None when the injected model was
    not the true best (excluded), otherwise whether it ended ranked first.
    """
    hits = [e.rounds_to_first_hit for e in events if e.success]
    latency = float(np.mean(hits)) if hits else float("nan")
    success = float(np.mean([e.success for e in events])) if events else float("nan")
    flags = [f for f in top1_flags if f is not None]
    top1 = float(np.mean(flags)) if flags else float("nan")
    return DiscoverySummary(latency, success, top1, len(events))
