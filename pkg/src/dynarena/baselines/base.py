"""Common pairwise-rater interface used by the simulation benchmark."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..rating import MacroVerdict, MicroBatchResult, RatingHyperParams, aggregate_micro_batch

# Baselines resolve every batch with the same thresholds as the main system
# but without confidence weighting: one standard update per batch.
_MACRO_HP = RatingHyperParams(decisive_weighting=False)


def batch_score(batch: MicroBatchResult) -> float | None:
    """Macro score for the first model: 1 win, 0 loss, 0.5 tie, None invalid."""
    verdict = aggregate_micro_batch(batch, _MACRO_HP).verdict
    if verdict is MacroVerdict.WIN_A:
        return 1.0
    if verdict is MacroVerdict.WIN_B:
        return 0.0
    if verdict is MacroVerdict.TIE:
        return 0.5
    return None


class UnknownModelError(KeyError):
    pass


class PairwiseRater:
    """Base class. Subclasses keep per-model state keyed by model id.

    ``chooses_pairs`` marks systems that schedule their own comparisons;
    passive ones are fed uniformly random pairs by :meth:`propose`.
    """

    name = "base"
    chooses_pairs = False
    list_size = 2

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.models: list[str] = []
        self.rng = np.random.default_rng(seed)

    # -- registration ------------------------------------------------------
    def register(self, model_id: str) -> None:
        if model_id in self.models:
            raise ValueError(f"model {model_id!r} already registered")
        self.models.append(model_id)
        self._init_model(model_id)

    def inject(self, model_id: str) -> None:
        self.register(model_id)

    def reset(self) -> None:
        models = list(self.models)
        self.models = []
        self.rng = np.random.default_rng(self.seed)
        self._reset_state()
        for m in models:
            self.register(m)

    def _check(self, *model_ids: str) -> None:
        for m in model_ids:
            if m not in self.models:
                raise UnknownModelError(m)

    # -- scheduling ----------------------------------------------------------
    def propose(self) -> Sequence[str]:
        if len(self.models) < 2:
            raise ValueError("need at least two models")
        i, j = self.rng.choice(len(self.models), size=2, replace=False)
        return self.models[int(i)], self.models[int(j)]

    # -- evidence ------------------------------------------------------------
    def observe(self, a: str, b: str, batch: MicroBatchResult) -> None:
        self._check(a, b)
        s = batch_score(batch)
        if s is not None:
            self._update(a, b, s)

    def observe_list(self, models: Sequence[str], counts) -> None:
        """K-wise evidence: ``counts[q]`` holds the tallies of pair q (i<j order)."""
        q = 0
        for i in range(len(models)):
            for j in range(i + 1, len(models)):
                wa, wb, t = (int(x) for x in counts[q])
                self.observe(models[i], models[j], MicroBatchResult(wa, wb, t))
                q += 1

    def rank(self) -> list[str]:
        scores = self.scores()
        return sorted(self.models, key=lambda m: (-scores[m], m))

    # -- hooks ---------------------------------------------------------------
    def _init_model(self, model_id: str) -> None:
        raise NotImplementedError

    def _reset_state(self) -> None:
        raise NotImplementedError

    def _update(self, a: str, b: str, score_a: float) -> None:
        raise NotImplementedError

    def scores(self) -> dict[str, float]:
        raise NotImplementedError
