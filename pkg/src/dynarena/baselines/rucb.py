"""Relative Upper Confidence Bound dueling bandit (Zoghi et al.).

Ranking is by Copeland score on the empirical preference matrix, then by
mean empirical preference.
"""

from __future__ import annotations

import numpy as np

from .base import PairwiseRater

ALPHA = 0.51


class RUCB(PairwiseRater):
    name = "rucb"
    chooses_pairs = True

    def __init__(self, seed: int = 0, alpha: float = ALPHA):
        self.alpha = alpha
        self.index: dict[str, int] = {}
        self.wins = np.zeros((0, 0))
        self.t = 0
        self.best: str | None = None
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
        self.t = 0
        self.best = None

    def upper_bounds(self) -> np.ndarray:
        w = self.wins
        n = w + w.T
        t = max(self.t, 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(n > 0, w / n + np.sqrt(self.alpha * np.log(t) / n), 1.0)
        np.fill_diagonal(u, 0.5)
        return u

    def propose(self):
        if len(self.models) < 2:
            raise ValueError("need at least two models")
        self.t += 1
        u = self.upper_bounds()
        ids = self.models  # index order equals registration order
        cands = [i for i in range(len(ids)) if np.all(u[i] >= 0.5)]
        if self.best is not None and self.index[self.best] not in cands:
            self.best = None
        if not cands:
            c = int(self.rng.integers(len(ids)))
        elif len(cands) == 1:
            c = cands[0]
            self.best = ids[c]
        elif self.best is not None and self.rng.random() < 0.5:
            c = self.index[self.best]
        else:
            rest = [i for i in cands if self.best is None or i != self.index[self.best]]
            c = rest[int(self.rng.integers(len(rest)))]
        col = u[:, c].copy()
        col[c] = -np.inf
        top = np.flatnonzero(col == col.max())
        d = int(top[int(self.rng.integers(len(top)))])
        return ids[c], ids[d]

    def _update(self, a, b, score_a):
        i, j = self.index[a], self.index[b]
        self.wins[i, j] += score_a
        self.wins[j, i] += 1.0 - score_a

    def preference(self) -> np.ndarray:
        n = self.wins + self.wins.T
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(n > 0, self.wins / n, 0.5)
        np.fill_diagonal(p, 0.5)
        return p

    def scores(self):
        p = self.preference()
        k = len(self.models)
        copeland = (p > 0.5).sum(axis=1)
        mean_pref = (p.sum(axis=1) - 0.5) / max(1, k - 1)
        # Copeland count dominates; mean preference (< 1) breaks ties
        return {m: float(copeland[self.index[m]] + mean_pref[self.index[m]] * 0.999) for m in self.models}
