"""One Monte Carlo trial: true skills, injections, a dynamic and a static phase."""

from __future__ import annotations

import math
import zlib
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtri

from ..baselines import REGISTRY as RATER_REGISTRY
from ..baselines import PairwiseRater, make_rater
from ..rating import MicroBatchResult, RatingHyperParams
from ..scheduler import ArenaState, inject, leaderboard, run_round
from .environments import EnvironmentSpec
from .generator import TrialWorld
from .metrics import Localization, kendall, localize, spearman, summarize_discovery, topk_overlap


@dataclass(frozen=True)
class TrialSpec:
    n_models: int = 40
    skill_mean: float = 1000.0
    skill_sd: float = 250.0
    dynamic_rounds: int = 3000
    static_rounds: int = 50
    n_trials: int = 20
    # (round, percentile); percentile None draws uniformly from injected_percentile_range
    injection_schedule: tuple = ((1000, None),)
    injected_percentile_range: tuple = (0.9, 1.0)
    checkpoints: tuple = (500, 1500, 3000)
    topk: tuple = (3, 5)
    discovery_window: int = 10
    discovery_horizon: int | None = 100
    batch_size: int = 15
    # arena only: sigma at which a model leaves the active set (None: never)
    converge_sigma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.dynamic_rounds <= 0:
            raise ValueError("dynamic_rounds must be positive")
        if self.static_rounds < 0 or self.n_trials <= 0 or self.n_models < 2:
            raise ValueError("static_rounds >= 0, n_trials > 0 and n_models >= 2 required")
        for r, pct in self.injection_schedule:
            if not 1 < r < self.dynamic_rounds:
                raise ValueError(f"injection round {r} must lie strictly inside the dynamic phase")
            if pct is not None and not 0.0 < pct < 1.0:
                raise ValueError("injection percentile must lie in (0, 1)")
        lo, hi = self.injected_percentile_range
        if not 0.0 < lo <= hi < 1.0 + 1e-12:
            raise ValueError("injected_percentile_range must satisfy 0 < lo <= hi <= 1")
        for c in self.checkpoints:
            if not 1 <= c <= self.total_rounds:
                raise ValueError(f"checkpoint {c} outside the trial")

    @property
    def total_rounds(self) -> int:
        return self.dynamic_rounds + self.static_rounds

    def to_dict(self) -> dict:
        d = asdict(self)
        d["injection_schedule"] = [list(x) for x in self.injection_schedule]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrialSpec":
        d = dict(d)
        for key in ("injection_schedule",):
            if key in d:
                d[key] = tuple(tuple(x) for x in d[key])
        for key in ("injected_percentile_range", "checkpoints", "topk"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


# -- systems under test ------------------------------------------------------


class ArenaSystem:
    """The online scheduler with weighted Bayesian updates."""

    def __init__(self, name: str, ids, seed: int, hp: RatingHyperParams, converge_sigma="default"):
        self.name = name
        self.hp = hp
        self.state = ArenaState.create(ids, hp, seed=seed, converge_sigma=converge_sigma)

    def inject(self, model_id: str) -> None:
        inject(self.state, model_id, self.hp)

    def play(self, round_index: int, world: TrialWorld) -> None:
        def source(a, b, r, n):
            wa, wb, t = world.counts(r, (a, b))[0]
            return MicroBatchResult(int(wa), int(wb), int(t))

        run_round(self.state, source, self.hp)

    def rank(self) -> list[str]:
        return [row[0] for row in leaderboard(self.state, self.hp)]


class RaterSystem:
    """Adapter giving a baseline rater the same round protocol."""

    def __init__(self, name: str, rater: PairwiseRater):
        self.name = name
        self.rater = rater

    def inject(self, model_id: str) -> None:
        self.rater.inject(model_id)

    def play(self, round_index: int, world: TrialWorld) -> None:
        models = list(self.rater.propose())
        counts = world.counts(round_index, models)
        if len(models) == 2:
            wa, wb, t = counts[0]
            self.rater.observe(models[0], models[1], MicroBatchResult(int(wa), int(wb), int(t)))
        else:
            self.rater.observe_list(models, counts)

    def rank(self) -> list[str]:
        return self.rater.rank()


ARENA_VARIANTS: dict[str, dict] = {
    "ours": {},
    "ours_no_warmup": {"warmup_batches": 0},
    "ours_unweighted": {"decisive_weighting": False},
}

SYSTEM_NAMES = tuple(RATER_REGISTRY) + ("ours",)
ALL_SYSTEMS = tuple(RATER_REGISTRY) + tuple(ARENA_VARIANTS)


def make_system(name: str, ids, seed: int, params: dict | None = None):
    params = dict(params or {})
    if name in ARENA_VARIANTS:
        converge_sigma = params.pop("converge_sigma", None)
        hp = RatingHyperParams.from_dict({**RatingHyperParams().to_dict(), **ARENA_VARIANTS[name], **params})
        return ArenaSystem(name, ids, seed, hp, converge_sigma)
    rater = make_rater(name, seed=seed, **params)
    for m in ids:
        rater.register(m)
    return RaterSystem(name, rater)


# -- report --------------------------------------------------------------------


@dataclass
class MetricsReport:
    environment: str
    system: str
    trial: int
    srcc_at: dict = field(default_factory=dict)
    kendall_at: dict = field(default_factory=dict)
    topk_overlap: dict = field(default_factory=dict)
    localizations: list = field(default_factory=list)
    top1_flags: list = field(default_factory=list)

    @property
    def discovery(self):
        return summarize_discovery(self.localizations, self.top1_flags)

    def to_dict(self) -> dict:
        d = self.discovery
        return {
            "environment": self.environment,
            "system": self.system,
            "trial": self.trial,
            "srcc_at": {str(k): v for k, v in self.srcc_at.items()},
            "kendall_at": {str(k): v for k, v in self.kendall_at.items()},
            "topk_overlap": {f"{r}:{k}": v for (r, k), v in self.topk_overlap.items()},
            "discovery_latency": d.latency,
            "discovery_success": d.success,
            "top1_after_injection": d.top1_rate,
            "localizations": [
                {
                    "injection_round": e.injection_round,
                    "target_rank": e.target_rank,
                    "first_hit": e.first_hit,
                    "stable_hit": e.stable_hit,
                    "rounds_to_first_hit": e.rounds_to_first_hit,
                    "rounds_to_stable_hit": e.rounds_to_stable_hit,
                    "success": e.success,
                }
                for e in self.localizations
            ],
            "top1_flags": list(self.top1_flags),
        }


def _stream_seed(seed: int, trial: int, tag: str) -> int:
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, trial, zlib.crc32(tag.encode())])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class TrialSetup:
    ids: list
    skills: np.ndarray
    injections: list  # (round, model id)
    world: TrialWorld


def build_trial(env: EnvironmentSpec, spec: TrialSpec, trial_index: int) -> TrialSetup:
    """Draw true skills, injected entrants and the shared noise for one trial."""
    rng = np.random.default_rng([spec.seed & 0xFFFFFFFFFFFFFFFF, trial_index, 1])
    base = spec.skill_mean + spec.skill_sd * rng.standard_normal(spec.n_models)
    ids = [f"m{i:02d}" for i in range(spec.n_models)]
    injections = []
    extra = []
    lo, hi = spec.injected_percentile_range
    for j, (r, pct) in enumerate(sorted(spec.injection_schedule)):
        p = rng.uniform(lo, min(hi, 1.0 - 1e-9)) if pct is None else pct
        extra.append(spec.skill_mean + spec.skill_sd * float(ndtri(p)))
        injections.append((int(r), f"new{j:02d}"))
    all_ids = ids + [m for _, m in injections]
    skills = np.concatenate([base, np.array(extra)])
    world_rng = np.random.default_rng([spec.seed & 0xFFFFFFFFFFFFFFFF, trial_index, 2])
    world = TrialWorld(env, skills, all_ids, spec.total_rounds, world_rng, batch_size=spec.batch_size)
    return TrialSetup(all_ids, skills, injections, world)


def run_trial(env: EnvironmentSpec, spec: TrialSpec, system: str, trial_index: int = 0,
              params: dict | None = None, on_round: Callable | None = None) -> MetricsReport:
    setup = build_trial(env, spec, trial_index)
    skill = dict(zip(setup.ids, setup.skills))
    injected = {m for _, m in setup.injections}
    initial = [m for m in setup.ids if m not in injected]
    params = dict(params or {})
    if system in ARENA_VARIANTS:
        params.setdefault("converge_sigma", spec.converge_sigma)
    sut = make_system(system, initial, _stream_seed(spec.seed, trial_index, system), params)

    present = list(initial)
    inject_at = {}
    for r, m in setup.injections:
        inject_at.setdefault(r, []).append(m)
    track_until = {}
    for r, m in setup.injections:
        end = spec.total_rounds if spec.discovery_horizon is None else r + spec.discovery_horizon + spec.discovery_window
        track_until[m] = (r, min(end, spec.total_rounds))
    traces: dict[str, dict[int, int]] = {m: {} for m in injected}
    report = MetricsReport(env.name, system, trial_index)
    checkpoints = set(spec.checkpoints)

    for r in range(1, spec.total_rounds + 1):
        for m in inject_at.get(r, ()):
            sut.inject(m)
            present.append(m)
        sut.play(r, setup.world)
        tracking = [m for m, (start, end) in track_until.items() if start <= r <= end]
        if tracking or r in checkpoints:
            ranking = sut.rank()
            for m in tracking:
                traces[m][r] = ranking.index(m) + 1
            if r in checkpoints:
                truth = sorted(present, key=lambda x: (-skill[x], x))
                report.srcc_at[r] = spearman(ranking, truth)
                report.kendall_at[r] = kendall(ranking, truth)
                for k in spec.topk:
                    if k <= len(truth):
                        report.topk_overlap[(r, k)] = topk_overlap(ranking, truth, k)
        if on_round is not None:
            on_round(r, sut)

    final = sut.rank()
    truth = sorted(present, key=lambda x: (-skill[x], x))
    report.srcc_at["final"] = spearman(final, truth)
    report.kendall_at["final"] = kendall(final, truth)
    for r, m in setup.injections:
        target = truth.index(m) + 1
        report.localizations.append(
            localize(traces[m], r, target, spec.discovery_window, spec.discovery_horizon)
        )
        report.top1_flags.append((final[0] == m) if truth[0] == m else None)
    return report
