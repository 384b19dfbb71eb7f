"""Active ranking by Borda-score elimination (Heckel et al. style).

Each item's Borda score is its probability of beating a uniformly drawn
opponent. The focal item of a round is the unresolved item with the fewest
comparisons; its opponent is uniform. An item is resolved once its
confidence interval is disjoint from every other item's interval.
"""

from __future__ import annotations

import math

import numpy as np

from .base import PairwiseRater

DELTA = 0.05


def confidence_radius(n: int, n_items: int, delta: float = DELTA) -> float:
    if n <= 0:
        return math.inf
    return math.sqrt(math.log(125.0 * n_items * math.log(1.12 * n + 1.0) / delta) / n)


class ActiveRanking(PairwiseRater):
    name = "active_ranking"
    chooses_pairs = True

    def __init__(self, seed: int = 0, delta: float = DELTA):
        self.delta = delta
        self.n: dict[str, int] = {}
        self.w: dict[str, float] = {}
        super().__init__(seed)

    def _init_model(self, model_id):
        self.n[model_id] = 0
        self.w[model_id] = 0.0

    def _reset_state(self):
        self.n, self.w = {}, {}

    def borda(self, model_id: str) -> float:
        n = self.n[model_id]
        return self.w[model_id] / n if n else 0.5

    def unresolved(self) -> list[str]:
        k = len(self.models)
        lo, hi = {}, {}
        for m in self.models:
            r = confidence_radius(self.n[m], k, self.delta)
            lo[m], hi[m] = self.borda(m) - r, self.borda(m) + r
        out = []
        for m in self.models:
            if any(o != m and lo[m] <= hi[o] and lo[o] <= hi[m] for o in self.models):
                out.append(m)
        return out

    def propose(self):
        if len(self.models) < 2:
            raise ValueError("need at least two models")
        pool = self.unresolved() or self.models
        focal = min(pool, key=lambda m: (self.n[m], m))
        others = [m for m in self.models if m != focal]
        return focal, others[int(self.rng.integers(len(others)))]

    def _update(self, a, b, score_a):
        # only the focal (first) item receives an unbiased Borda sample
        self.n[a] += 1
        self.w[a] += score_a

    def scores(self):
        return {m: self.borda(m) for m in self.models}
