"""Hot numeric kernels.

Every kernel has a plain Python/numpy implementation and, when numba is
importable, an ``@njit`` twin compiled from the same source. The compiled
path is used by default; set ``DYNARENA_DISABLE_NUMBA=1`` to force the
fallback (useful for debugging and for the equivalence tests).

Kernels never draw random numbers themselves: callers pass pre-drawn
uniforms/normals so both paths consume identical streams.
"""

from __future__ import annotations

import math
import os

import numpy as np

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
T_CLIP = 5.0
CDF_FLOOR = 1e-12
GAMMA_CAP = 1.2


def _flag_disabled() -> bool:
    return os.environ.get("DYNARENA_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _flag_disabled()


# --------------------------------------------------------------------------
# pure implementations (also the source the numba twins are compiled from)


def norm_pdf(x):
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def norm_cdf(x):
    # erfc keeps full relative accuracy in the lower tail.
    return 0.5 * math.erfc(-x / SQRT2)


def decisive_update(mu_w, sigma_w, mu_l, sigma_l, weight, beta, sigma_conv):
    """Weighted Gaussian win/loss update; returns (mu_w, sigma_w, mu_l, sigma_l)."""
    var_w = sigma_w * sigma_w
    var_l = sigma_l * sigma_l
    c2 = var_w + var_l + 2.0 * beta * beta
    c = math.sqrt(c2)
    t = (mu_w - mu_l) / c
    if t > T_CLIP:
        t = T_CLIP
    elif t < -T_CLIP:
        t = -T_CLIP
    # pdf/cdf inlined: compiled kernels cannot call uncompiled helpers
    pdf = INV_SQRT_2PI * math.exp(-0.5 * t * t)
    cdf = 0.5 * math.erfc(-t / SQRT2)
    v = pdf / max(cdf, CDF_FLOOR)
    w = v * (v + t)
    gamma = min(GAMMA_CAP, 1.0 + 0.5 * (weight - 1.0))
    new_mu_w = mu_w + (var_w / c) * v * weight
    new_mu_l = mu_l - (var_l / c) * v * weight
    floor = sigma_conv * sigma_conv
    fw = max(0.0, 1.0 - (var_w / c2) * w * gamma)
    fl = max(0.0, 1.0 - (var_l / c2) * w * gamma)
    new_sigma_w = math.sqrt(max(floor, var_w * fw))
    new_sigma_l = math.sqrt(max(floor, var_l * fl))
    return new_mu_w, new_sigma_w, new_mu_l, new_sigma_l


def kwise_outcomes(
    skills, skill_z, bias, u, z, pen, judge_z, difficulty, tie_jitter,
    sigma_std, sigma_ext, p_extreme, mu_penalty, sigma_penalty, judge_beta, tie_threshold,
):
    """Prompt-level verdict counts for every pair of K models over B prompts.

    Arrays ``bias, u, z, pen`` are (B, K); ``judge_z`` is (B, K*(K-1)/2);
    ``difficulty`` and ``tie_jitter`` are length B. Pair p enumerates (i<j)
    in row-major order. Returns an int64 (P, 3) array of (wins_i, wins_j, ties).
    """
    n_prompts, k = u.shape
    n_pairs = k * (k - 1) // 2
    counts = np.zeros((n_pairs, 3), dtype=np.int64)
    perf = np.empty(k)
    for b in range(n_prompts):
        for i in range(k):
            p = skills[i] + difficulty[b] * skill_z[i] + bias[b, i]
            if u[b, i] < p_extreme:
                p += sigma_ext * z[b, i] + mu_penalty + sigma_penalty * pen[b, i]
            else:
                p += sigma_std * z[b, i]
            perf[i] = p
        thr = tie_threshold + tie_jitter[b]
        if thr < 0.0:
            thr = 0.0
        q = 0
        for i in range(k):
            for j in range(i + 1, k):
                gap = (perf[i] - perf[j]) + judge_beta * judge_z[b, q]
                if abs(gap) < thr:
                    counts[q, 2] += 1
                elif gap > 0.0:
                    counts[q, 0] += 1
                else:
                    counts[q, 1] += 1
                q += 1
    return counts


def ucb_scores(mu_pivot, mus, sigmas, pair_counts, log_round, alpha, gamma_sigma):
    """Exploit+explore score and sigma bias for every candidate opponent."""
    n = mus.shape[0]
    u = np.empty(n)
    b = np.empty(n)
    for j in range(n):
        u[j] = -abs(mu_pivot - mus[j]) + alpha * math.sqrt(log_round / max(1.0, pair_counts[j]))
        b[j] = sigmas[j] ** gamma_sigma
    return u, b


def kendall_counts(x, y):
    """(concordant, discordant, ties_x_only, ties_y_only) over all pairs."""
    n = x.shape[0]
    con = 0
    dis = 0
    tx = 0
    ty = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                tx += 1
            elif dy == 0:
                ty += 1
            elif (dx > 0) == (dy > 0):
                con += 1
            else:
                dis += 1
    return con, dis, tx, ty


def kwise_outcomes_numpy(
    skills, skill_z, bias, u, z, pen, judge_z, difficulty, tie_jitter,
    sigma_std, sigma_ext, p_extreme, mu_penalty, sigma_penalty, judge_beta, tie_threshold,
):
    """Vectorised fallback for :func:`kwise_outcomes` (same arithmetic order)."""
    k = u.shape[1]
    ext = u < p_extreme
    perf = skills[None, :] + difficulty[:, None] * skill_z[None, :] + bias
    perf = perf + np.where(
        ext, sigma_ext * z + mu_penalty + sigma_penalty * pen, sigma_std * z
    )
    ii, jj = np.triu_indices(k, 1)
    gap = (perf[:, ii] - perf[:, jj]) + judge_beta * judge_z
    thr = np.maximum(tie_threshold + tie_jitter, 0.0)[:, None]
    tie = np.abs(gap) < thr
    win_i = ~tie & (gap > 0.0)
    win_j = ~tie & ~(gap > 0.0)
    return np.stack([win_i.sum(0), win_j.sum(0), tie.sum(0)], axis=1).astype(np.int64)


def ucb_scores_numpy(mu_pivot, mus, sigmas, pair_counts, log_round, alpha, gamma_sigma):
    u = -np.abs(mu_pivot - mus) + alpha * np.sqrt(log_round / np.maximum(1.0, pair_counts))
    return u, sigmas ** gamma_sigma


PY_KERNELS = {
    "norm_pdf": norm_pdf,
    "norm_cdf": norm_cdf,
    "decisive_update": decisive_update,
    "kwise_outcomes": kwise_outcomes_numpy,
    "ucb_scores": ucb_scores_numpy,
    "kendall_counts": kendall_counts,
}

if HAVE_NUMBA:
    _jit = numba.njit(cache=True, nogil=True)
    NB_KERNELS = {
        "norm_pdf": _jit(norm_pdf),
        "norm_cdf": _jit(norm_cdf),
        "decisive_update": _jit(decisive_update),
        "kwise_outcomes": _jit(kwise_outcomes),
        "ucb_scores": _jit(ucb_scores),
        "kendall_counts": _jit(kendall_counts),
    }
else:  # pragma: no cover
    NB_KERNELS = {}

ACTIVE = NB_KERNELS if USE_NUMBA else PY_KERNELS


def get(name: str):
    """Return the active implementation of kernel ``name``."""
    return ACTIVE[name]


def backend() -> str:
    return "numba" if USE_NUMBA else "python"
