"""K-wise arena: each round compares a small list of models at once.

An anchor is drawn uniformly and grouped with its nearest neighbours by
posterior mean; every pair inside the list is resolved from the same prompt
batch and folded into Gaussian skill beliefs with TrueSkill updates.
"""

from __future__ import annotations

from .trueskill import TrueSkill

LIST_SIZE = 4


class KSortArena(TrueSkill):
    name = "ksort"
    chooses_pairs = True

    def __init__(self, seed: int = 0, list_size: int = LIST_SIZE, **kw):
        if list_size < 2:
            raise ValueError("list_size must be >= 2")
        self.list_size = list_size
        super().__init__(seed, **kw)

    def propose(self):
        if len(self.models) < 2:
            raise ValueError("need at least two models")
        anchor = self.models[int(self.rng.integers(len(self.models)))]
        mu_a = self.mu[anchor]
        others = sorted((m for m in self.models if m != anchor), key=lambda m: (abs(self.mu[m] - mu_a), m))
        return [anchor] + others[: self.list_size - 1]
