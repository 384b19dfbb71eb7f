"""Synthetic prompt-level outcomes.

Per side: ``perf = skill + difficulty * z_skill + cluster_bias + noise`` where
the noise is ``Normal(0, sigma_std)`` or, with probability ``p_extreme``,
``Normal(0, sigma_ext) + Normal(mu_penalty, sigma_penalty)``. The judge sees
the performance gap plus ``Normal(0, judge_beta)`` and calls a tie when the
noisy gap is inside ``tie_threshold + tie_offset``.

``z_skill`` standardises the true skill, so a positive prompt difficulty
widens the spread between strong and weak models on that prompt and a
negative one compresses it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..rating import Verdict
from .environments import EnvironmentSpec

SKILL_MEAN = 1000.0
SKILL_SD = 250.0


@dataclass(frozen=True)
class PromptEffect:
    difficulty: float = 0.0
    tie_offset: float = 0.0
    bias_a: float = 0.0
    bias_b: float = 0.0

    def mirrored(self) -> "PromptEffect":
        return PromptEffect(self.difficulty, self.tie_offset, self.bias_b, self.bias_a)


NO_EFFECT = PromptEffect()


def _env_args(env: EnvironmentSpec):
    return (env.sigma_std, env.sigma_ext, env.p_extreme, env.mu_penalty,
            env.sigma_penalty, env.judge_beta, env.tie_threshold)


def _skill_z(skills: np.ndarray) -> np.ndarray:
    return (skills - SKILL_MEAN) / SKILL_SD


def sample_outcome(env: EnvironmentSpec, skill_a: float, skill_b: float,
                   prompt_effect: PromptEffect = NO_EFFECT, rng=None) -> Verdict:
    """One prompt-level verdict for ``a`` versus ``b``.

    Noise slots are assigned to the sides in a canonical order, so calling
    with the sides swapped and the same generator state returns exactly the
    mirrored verdict.
    """
    rng = np.random.default_rng() if rng is None else rng
    key_a = (skill_a, prompt_effect.bias_a)
    key_b = (skill_b, prompt_effect.bias_b)
    if key_b < key_a:
        return sample_outcome(env, skill_b, skill_a, prompt_effect.mirrored(), rng).mirrored()
    skills = np.array([skill_a, skill_b], dtype=float)
    bias = np.array([[prompt_effect.bias_a, prompt_effect.bias_b]])
    u = rng.random((1, 2))
    z = rng.standard_normal((1, 2))
    pen = rng.standard_normal((1, 2))
    jz = rng.standard_normal((1, 1))
    counts = _kernels.get("kwise_outcomes")(
        skills, _skill_z(skills), bias, u, z, pen, jz,
        np.array([prompt_effect.difficulty]), np.array([prompt_effect.tie_offset]), *_env_args(env),
    )
    if counts[0, 2]:
        return Verdict.TIE
    return Verdict.A if counts[0, 0] else Verdict.B


def outcome_counts(env: EnvironmentSpec, skill_a: float, skill_b: float, n: int, rng) -> np.ndarray:
    """Tallies (wins_a, wins_b, ties) over ``n`` independent prompts without prompt effects."""
    skills = np.array([skill_a, skill_b], dtype=float)
    u = rng.random((n, 2))
    z = rng.standard_normal((n, 2))
    pen = rng.standard_normal((n, 2))
    jz = rng.standard_normal((n, 1))
    zeros = np.zeros(n)
    return _kernels.get("kwise_outcomes")(
        skills, _skill_z(skills), np.zeros((n, 2)), u, z, pen, jz, zeros, zeros, *_env_args(env)
    )[0]


class TrialWorld:
    """Pre-drawn noise for a whole trial, shared by every system under test.

    All systems see the same per-round, per-slot random numbers (common random
    numbers), which sharpens paired comparisons between systems.
    """

    def __init__(self, env: EnvironmentSpec, skills: np.ndarray, ids: list[str], rounds: int,
                 rng: np.random.Generator, batch_size: int = 15, max_list: int = 4):
        self.env = env
        self.ids = list(ids)
        self.index = {m: i for i, m in enumerate(self.ids)}
        self.skills = np.asarray(skills, dtype=float)
        self.skill_z = _skill_z(self.skills)
        self.batch_size = batch_size
        self.rounds = rounds
        shape = (rounds, batch_size, max_list)
        n_pairs = max_list * (max_list - 1) // 2
        self.u = rng.random(shape)
        self.z = rng.standard_normal(shape)
        self.pen = rng.standard_normal(shape)
        self.judge = rng.standard_normal((rounds, batch_size, n_pairs))
        self.difficulty = env.prompt_difficulty_std * rng.standard_normal((rounds, batch_size))
        self.tie_offset = env.prompt_tie_sensitivity_std * rng.standard_normal((rounds, batch_size))
        n_clusters = max(1, env.prompt_cluster_count)
        self.cluster = rng.integers(0, n_clusters, size=(rounds, batch_size))
        bias = rng.standard_normal((n_clusters, len(self.ids)))
        self.cluster_bias = env.prompt_cluster_scale * bias if env.has_clusters else None
        self._zero_bias = np.zeros((batch_size, max_list))
        self._env_args = _env_args(env)
        self._kernel = _kernels.get("kwise_outcomes")

    def counts(self, round_index: int, models) -> np.ndarray:
        """(pairs, 3) verdict tallies for ``models`` on round ``round_index`` (1-based)."""
        r = round_index - 1
        idx = np.fromiter((self.index[m] for m in models), dtype=np.int64)
        k = idx.shape[0]
        if self.cluster_bias is None:
            bias = self._zero_bias[:, :k]
        else:
            bias = self.cluster_bias[self.cluster[r]][:, idx]
        n_pairs = k * (k - 1) // 2
        return self._kernel(
            self.skills[idx], self.skill_z[idx], bias, self.u[r, :, :k], self.z[r, :, :k],
            self.pen[r, :, :k], self.judge[r, :, :n_pairs], self.difficulty[r], self.tie_offset[r],
            *self._env_args,
        )
