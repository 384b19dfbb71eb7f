"""Environment x system x trial grids, aggregation and report files."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .environments import EnvironmentSpec, get_environment
from .trial import MetricsReport, TrialSpec, run_trial


def _job(args):
    env, spec, system, trial, params = args
    return run_trial(env, spec, system, trial, params)


def run_grid(environments: Sequence[str | EnvironmentSpec], systems: Sequence[str], spec: TrialSpec,
             jobs: int = 1, params: dict | None = None) -> list[MetricsReport]:
    """Run every (environment, system, trial); results sorted by that key."""
    params = params or {}
    envs = [get_environment(e) if isinstance(e, str) else e for e in environments]
    tasks = [
        (env, spec, system, t, params.get(system))
        for env in envs for system in systems for t in range(spec.n_trials)
    ]
    if jobs is None or jobs <= 0:
        jobs = os.cpu_count() or 1
    if jobs == 1:
        results = [_job(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_job, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    order = {e.name: i for i, e in enumerate(envs)}
    sys_order = {s: i for i, s in enumerate(systems)}
    results.sort(key=lambda r: (order[r.environment], sys_order[r.system], r.trial))
    return results


def _nanmean(xs) -> float:
    xs = [x for x in xs if x is not None and not (isinstance(x, float) and math.isnan(x))]
    return float(np.mean(xs)) if xs else float("nan")


@dataclass(frozen=True)
class SummaryRow:
    environment: str
    system: str
    n_trials: int
    metrics: dict

    def flat(self) -> dict:
        return {"environment": self.environment, "system": self.system, "n_trials": self.n_trials, **self.metrics}


def summarize(reports: Iterable[MetricsReport]) -> list[SummaryRow]:
    groups: dict[tuple, list[MetricsReport]] = {}
    for r in reports:
        groups.setdefault((r.environment, r.system), []).append(r)
    rows = []
    for (env, system), reps in groups.items():
        m = {}
        for key in reps[0].srcc_at:
            m[f"srcc@{key}"] = _nanmean(r.srcc_at.get(key) for r in reps)
            m[f"kendall@{key}"] = _nanmean(r.kendall_at.get(key) for r in reps)
        for key in reps[0].topk_overlap:
            m[f"top{key[1]}@{key[0]}"] = _nanmean(r.topk_overlap.get(key) for r in reps)
        events = [e for r in reps for e in r.localizations]
        flags = [f for r in reps for f in r.top1_flags if f is not None]
        m["discovery_latency"] = _nanmean(e.rounds_to_first_hit for e in events if e.success)
        m["discovery_success"] = _nanmean(float(e.success) for e in events)
        m["stable_hit_latency"] = _nanmean(e.rounds_to_stable_hit for e in events if e.stable_hit is not None)
        m["top1_after_injection"] = _nanmean(float(f) for f in flags)
        rows.append(SummaryRow(env, system, len(reps), m))
    return rows


@dataclass(frozen=True)
class PairedTest:
    metric: str
    baseline: str
    variant: str
    mean_baseline: float
    mean_variant: float
    statistic: float
    p_value: float
    n: int

    @property
    def significant(self) -> bool:
        return self.p_value < 0.05


def _per_trial(reports, system, metric):
    out = {}
    for r in reports:
        if r.system != system:
            continue
        if metric == "discovery_latency":
            vals = [e.rounds_to_first_hit for e in r.localizations if e.success]
            out[(r.environment, r.trial)] = float(np.mean(vals)) if vals else float("nan")
        else:
            key = int(metric.split("@")[1]) if metric.split("@")[1].isdigit() else metric.split("@")[1]
            # a checkpoint the run never reached counts as missing
            out[(r.environment, r.trial)] = r.srcc_at.get(key, float("nan"))
    return out


def paired_test(reports, metric: str, baseline: str, variant: str, alternative: str) -> PairedTest:
    """One-sided paired t-test of ``variant`` minus ``baseline`` over matching trials.

    ``alternative`` is "greater" when the variant is expected to be larger.
    Trials where either side is NaN (failed discovery) are dropped.
    """
    a = _per_trial(reports, baseline, metric)
    b = _per_trial(reports, variant, metric)
    keys = sorted(k for k in a if k in b and not (math.isnan(a[k]) or math.isnan(b[k])))
    x = np.array([a[k] for k in keys])
    y = np.array([b[k] for k in keys])
    if len(keys) < 2 or np.all(y - x == 0):
        return PairedTest(metric, baseline, variant, _nanmean(x), _nanmean(y), float("nan"), 1.0, len(keys))
    res = stats.ttest_rel(y, x, alternative=alternative)
    return PairedTest(metric, baseline, variant, float(x.mean()), float(y.mean()),
                      float(res.statistic), float(res.pvalue), len(keys))


def ablation_tests(reports) -> list[PairedTest]:
    return [
        paired_test(reports, "discovery_latency", "ours", "ours_no_warmup", "greater"),
        paired_test(reports, "srcc@500", "ours", "ours_unweighted", "less"),
    ]


def write_reports(reports: Sequence[MetricsReport], out_dir: str | Path, spec: TrialSpec | None = None) -> dict:
    """Write summary.csv (long format), summary.json and trials.jsonl; return paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = summarize(reports)
    csv_path = out / "summary.csv"
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["environment", "system", "metric", "value", "n_trials"])
        for row in rows:
            for k, v in row.metrics.items():
                w.writerow([row.environment, row.system, k, f"{v:.6g}", row.n_trials])
    json_path = out / "summary.json"
    payload = {"rows": [r.flat() for r in rows]}
    if spec is not None:
        payload["trial_spec"] = spec.to_dict()
    systems = {r.system for r in reports}
    if {"ours", "ours_no_warmup", "ours_unweighted"} <= systems:
        payload["ablations"] = [t.__dict__ | {"significant": t.significant} for t in ablation_tests(reports)]
    json_path.write_text(json.dumps(_clean(payload), indent=2, default=_json_default))
    trials_path = out / "trials.jsonl"
    with trials_path.open("w") as fh:
        for r in reports:
            fh.write(json.dumps(_clean(r.to_dict()), default=_json_default) + "\n")
    return {"csv": str(csv_path), "json": str(json_path), "trials": str(trials_path)}


def _clean(o):
    """NaN/inf -> None so the files stay strict JSON."""
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (float, np.floating)) and not math.isfinite(float(o)):
        return None
    return o


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o)}")
