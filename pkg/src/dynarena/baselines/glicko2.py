"""Glicko-2 with one rating period per observed batch (Glickman's procedure)."""

from __future__ import annotations

import math

from .base import PairwiseRater

R0 = 1500.0
RD0 = 350.0
VOL0 = 0.06
TAU = 0.5
GLICKO_SCALE = 173.7178
CONVERGENCE_TOL = 1e-6


def _g(phi: float) -> float:
    return 1.0 / math.sqrt(1.0 + 3.0 * phi * phi / (math.pi * math.pi))


def _volatility(sigma: float, phi: float, v: float, delta: float, tau: float) -> float:
    a = math.log(sigma * sigma)

    def f(x):
        ex = math.exp(x)
        d = phi * phi + v + ex
        return ex * (delta * delta - phi * phi - v - ex) / (2.0 * d * d) - (x - a) / (tau * tau)

    A = a
    if delta * delta > phi * phi + v:
        B = math.log(delta * delta - phi * phi - v)
    else:
        k = 1
        while f(a - k * tau) < 0:
            k += 1
        B = a - k * tau
    fa, fb = f(A), f(B)
    # Illinois variant of regula falsi
    while abs(B - A) > CONVERGENCE_TOL:
        C = A + (A - B) * fa / (fb - fa)
        fc = f(C)
        if fc * fb <= 0:
            A, fa = B, fb
        else:
            fa /= 2.0
        B, fb = C, fc
    return math.exp(A / 2.0)


def glicko2_update(r, rd, vol, r_opp, rd_opp, score, tau=TAU):
    """Single-game rating period for one player; returns (r, rd, vol)."""
    mu, phi = (r - R0) / GLICKO_SCALE, rd / GLICKO_SCALE
    mu_j, phi_j = (r_opp - R0) / GLICKO_SCALE, rd_opp / GLICKO_SCALE
    g = _g(phi_j)
    e = 1.0 / (1.0 + math.exp(-g * (mu - mu_j)))
    v = 1.0 / (g * g * e * (1.0 - e))
    delta = v * g * (score - e)
    vol2 = _volatility(vol, phi, v, delta, tau)
    phi_star = math.sqrt(phi * phi + vol2 * vol2)
    phi2 = 1.0 / math.sqrt(1.0 / (phi_star * phi_star) + 1.0 / v)
    mu2 = mu + phi2 * phi2 * g * (score - e)
    return R0 + GLICKO_SCALE * mu2, GLICKO_SCALE * phi2, vol2


class Glicko2(PairwiseRater):
    name = "glicko2"

    def __init__(self, seed: int = 0, r0=R0, rd0=RD0, vol0=VOL0, tau=TAU):
        self.r0, self.rd0, self.vol0, self.tau = r0, rd0, vol0, tau
        self.r: dict[str, float] = {}
        self.rd: dict[str, float] = {}
        self.vol: dict[str, float] = {}
        super().__init__(seed)

    def _init_model(self, model_id):
        self.r[model_id], self.rd[model_id], self.vol[model_id] = self.r0, self.rd0, self.vol0

    def _reset_state(self):
        self.r, self.rd, self.vol = {}, {}, {}

    def _update(self, a, b, score_a):
        pa = (self.r[a], self.rd[a], self.vol[a])
        pb = (self.r[b], self.rd[b], self.vol[b])
        self.r[a], self.rd[a], self.vol[a] = glicko2_update(*pa, pb[0], pb[1], score_a, self.tau)
        self.r[b], self.rd[b], self.vol[b] = glicko2_update(*pb, pa[0], pa[1], 1.0 - score_a, self.tau)

    def scores(self):
        return dict(self.r)
