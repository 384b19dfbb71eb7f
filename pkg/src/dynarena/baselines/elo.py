from __future__ import annotations

from .base import PairwiseRater

K_FACTOR = 32.0
INITIAL_RATING = 1500.0
SCALE = 400.0


def expected_score(r_a: float, r_b: float, scale: float = SCALE) -> float:
    return 1.0 / (1.0 + 10.0 ** ((r_b - r_a) / scale))


class Elo(PairwiseRater):
    name = "elo"

    def __init__(self, seed: int = 0, k: float = K_FACTOR, initial: float = INITIAL_RATING):
        self.k = k
        self.initial = initial
        self.ratings: dict[str, float] = {}
        super().__init__(seed)

    def _init_model(self, model_id):
        self.ratings[model_id] = self.initial

    def _reset_state(self):
        self.ratings = {}

    def _update(self, a, b, score_a):
        delta = self.k * (score_a - expected_score(self.ratings[a], self.ratings[b]))
        self.ratings[a] += delta
        self.ratings[b] -= delta

    def scores(self):
        return dict(self.ratings)
