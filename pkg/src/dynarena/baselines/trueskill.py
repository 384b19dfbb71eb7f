"""Two-player TrueSkill with draws, and an experience-weighted variant.

Standard formulation (Herbrich et al.): performance noise ``beta``,
dynamics ``tau`` added before each game, draw margin derived from the draw
probability. The draw probability tracks the observed tie rate of macro
outcomes with a weak prior.
"""

from __future__ import annotations

import math

from scipy.special import ndtri

from .._kernels import norm_cdf, norm_pdf
from .base import PairwiseRater

MU0 = 25.0
SIGMA0 = 25.0 / 3.0
BETA = 25.0 / 6.0
TAU = 25.0 / 300.0
DRAW_PRIOR = 0.1
DRAW_PRIOR_WEIGHT = 10.0


def draw_margin(p_draw: float, beta: float) -> float:
    return float(ndtri((p_draw + 1.0) / 2.0)) * math.sqrt(2.0) * beta


def v_win(t: float, eps: float) -> float:
    x = t - eps
    denom = norm_cdf(x)
    if denom < 1e-300:
        return -x
    return norm_pdf(x) / denom


def w_win(t: float, eps: float) -> float:
    v = v_win(t, eps)
    return v * (v + t - eps)


def _draw_terms(t: float, eps: float):
    lo, hi = -eps - t, eps - t
    denom = norm_cdf(hi) - norm_cdf(lo)
    return lo, hi, denom


def v_draw(t: float, eps: float) -> float:
    lo, hi, denom = _draw_terms(t, eps)
    if denom < 1e-300:
        # far outside the draw band: the posterior mean moves by ~(eps - |t|)
        return -t - eps if t > 0 else -t + eps
    return (norm_pdf(lo) - norm_pdf(hi)) / denom


def w_draw(t: float, eps: float) -> float:
    lo, hi, denom = _draw_terms(t, eps)
    if denom < 1e-300:
        return 1.0
    v = (norm_pdf(lo) - norm_pdf(hi)) / denom
    return v * v + (hi * norm_pdf(hi) - lo * norm_pdf(lo)) / denom


def trueskill_1v1(mu_a, sigma_a, mu_b, sigma_b, score_a, beta=BETA, p_draw=DRAW_PRIOR):
    """One game; ``score_a`` is 1 (a wins), 0 (b wins) or 0.5 (draw)."""
    c2 = 2.0 * beta * beta + sigma_a * sigma_a + sigma_b * sigma_b
    c = math.sqrt(c2)
    eps = draw_margin(p_draw, beta) / c
    if score_a == 0.5:
        t = (mu_a - mu_b) / c
        v, w = v_draw(t, eps), w_draw(t, eps)
        sign = 1.0
    else:
        sign = 1.0 if score_a == 1.0 else -1.0
        t = sign * (mu_a - mu_b) / c
        v, w = v_win(t, eps), w_win(t, eps)
    w = min(max(w, 0.0), 1.0)
    mu_a2 = mu_a + sign * sigma_a * sigma_a / c * v
    mu_b2 = mu_b - sign * sigma_b * sigma_b / c * v
    sa2 = sigma_a * math.sqrt(max(1e-12, 1.0 - sigma_a * sigma_a / c2 * w))
    sb2 = sigma_b * math.sqrt(max(1e-12, 1.0 - sigma_b * sigma_b / c2 * w))
    return mu_a2, sa2, mu_b2, sb2


class TrueSkill(PairwiseRater):
    """Ranks by posterior mean."""

    name = "trueskill"

    def __init__(self, seed: int = 0, mu0=MU0, sigma0=SIGMA0, beta=BETA, tau=TAU):
        self.mu0, self.sigma0, self.beta, self.tau = mu0, sigma0, beta, tau
        self.mu: dict[str, float] = {}
        self.sigma: dict[str, float] = {}
        self.games: dict[str, int] = {}
        self.n_batches = 0
        self.n_draws = 0
        super().__init__(seed)

    def _init_model(self, model_id):
        self.mu[model_id] = self.mu0
        self.sigma[model_id] = self.sigma0
        self.games[model_id] = 0

    def _reset_state(self):
        self.mu, self.sigma, self.games = {}, {}, {}
        self.n_batches = self.n_draws = 0

    @property
    def p_draw(self) -> float:
        p = (self.n_draws + DRAW_PRIOR * DRAW_PRIOR_WEIGHT) / (self.n_batches + DRAW_PRIOR_WEIGHT)
        return min(0.9, max(0.01, p))

    def _tau(self, model_id: str) -> float:
        return self.tau

    def _update(self, a, b, score_a):
        p_draw = self.p_draw
        self.n_batches += 1
        self.n_draws += score_a == 0.5
        sa = math.sqrt(self.sigma[a] ** 2 + self._tau(a) ** 2)
        sb = math.sqrt(self.sigma[b] ** 2 + self._tau(b) ** 2)
        self.mu[a], self.sigma[a], self.mu[b], self.sigma[b] = trueskill_1v1(
            self.mu[a], sa, self.mu[b], sb, score_a, self.beta, p_draw
        )
        self.games[a] += 1
        self.games[b] += 1

    def scores(self):
        return dict(self.mu)


class TrueSkill2(TrueSkill):
    """TrueSkill whose dynamics noise decays with a model's experience.

    ``tau_i = tau * sqrt(1 + boost / (1 + games_i))``: newcomers may move
    quickly, veterans settle to the base dynamics.
    """

    name = "trueskill2"

    def __init__(self, seed: int = 0, experience_boost: float = 9.0, **kw):
        self.experience_boost = experience_boost
        super().__init__(seed, **kw)

    def _tau(self, model_id):
        return self.tau * math.sqrt(1.0 + self.experience_boost / (1.0 + self.games[model_id]))
