"""Rank Centrality: stationary distribution of a comparison random walk.

The walk moves from ``i`` to ``j`` with probability proportional to the
fraction of ``i``-vs-``j`` comparisons that ``j`` won, scaled by the maximum
degree. A pseudo-count ``regularization`` added to both directions of every
pair connects missing edges at an uninformative 1/2 rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .base import PairwiseRater


@dataclass(frozen=True)
class RankCentralityResult:
    scores: np.ndarray
    components: np.ndarray
    partial: bool


def transition_matrix(wins: np.ndarray, regularization: float = 0.0) -> np.ndarray:
    """``wins[i, j]`` = (possibly fractional) wins of i over j."""
    w = np.asarray(wins, dtype=float)
    n = w.shape[0]
    off = ~np.eye(n, dtype=bool)
    totals = w + w.T
    if regularization > 0:
        beat = np.where(off, (w.T + regularization) / (totals + 2 * regularization), 0.0)
        edges = off
    else:
        edges = off & (totals > 0)
        beat = np.where(edges, w.T / np.where(edges, totals, 1.0), 0.0)
    d_max = max(1, int(edges.sum(axis=1).max()))
    p = beat / d_max
    p[np.diag_indices(n)] = 1.0 - p.sum(axis=1)
    return p


def _stationary(p: np.ndarray) -> np.ndarray:
    n = p.shape[0]
    if n == 1:
        return np.ones(1)
    # solve pi (P - I) = 0 with sum(pi) = 1
    a = np.vstack([(p - np.eye(n)).T, np.ones(n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def rank_centrality(wins: np.ndarray, regularization: float = 0.0) -> RankCentralityResult:
    w = np.asarray(wins, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 2:
        raise ValueError("win matrix must be square over at least two models")
    if regularization > 0:
        n_comp, labels = 1, np.zeros(w.shape[0], dtype=int)
    else:
        n_comp, labels = connected_components((w + w.T) > 0, directed=False)
    p = transition_matrix(w, regularization)
    scores = np.zeros(w.shape[0])
    for c in range(n_comp):
        idx = np.flatnonzero(labels == c)
        sub = p[np.ix_(idx, idx)].copy()
        sub[np.diag_indices(len(idx))] = 0.0
        sub[np.diag_indices(len(idx))] = 1.0 - sub.sum(axis=1)
        scores[idx] = _stationary(sub)
    return RankCentralityResult(scores, labels, n_comp > 1)


class RankCentrality(PairwiseRater):
    """Passive spectral ranker; ``regularization=None`` means 1/n."""

    name = "rank_centrality"

    def __init__(self, seed: int = 0, regularization: float | None = None):
        self.regularization = regularization
        self.index: dict[str, int] = {}
        self.wins = np.zeros((0, 0))
        self.last_partial = False
        super().__init__(seed)

    def _init_model(self, model_id):
        n = len(self.index)
        self.index[model_id] = n
        grown = np.zeros((n + 1, n + 1))
        grown[:n, :n] = self.wins
        self.wins = grown

    def _reset_state(self):
        self.index = {}
        self.wins = np.zeros((0, 0))

    def _update(self, a, b, score_a):
        i, j = self.index[a], self.index[b]
        self.wins[i, j] += score_a
        self.wins[j, i] += 1.0 - score_a

    def scores(self):
        n = len(self.models)
        if n < 2:
            return {m: 1.0 for m in self.models}
        reg = 1.0 / n if self.regularization is None else self.regularization
        res = rank_centrality(self.wins, reg)
        self.last_partial = res.partial
        # drop solver noise so exact ties fall back to the id order
        scores = np.round(res.scores, 12)
        return {m: float(scores[self.index[m]]) for m in self.models}
