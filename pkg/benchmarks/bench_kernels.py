"""Time each hot kernel under numba and under the Python/numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 2000]

Also times one simulated trial of the arena with each backend (the backend
is fixed at import, so the trial timing runs in a subprocess per backend).
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from dynarena import _kernels


def _cases(rng):
    b, k = 15, 4
    env = (25.0, 60.0, 0.05, -30.0, 20.0, 20.0, 12.0)
    skills = rng.normal(1000, 250, k)
    kwise = (skills, (skills - 1000) / 250, np.zeros((b, k)), rng.random((b, k)),
             rng.standard_normal((b, k)), rng.standard_normal((b, k)),
             rng.standard_normal((b, k * (k - 1) // 2)), rng.normal(0, 35, b), rng.normal(0, 8, b), *env)
    n = 40
    ucb = (1000.0, rng.normal(1000, 200, n), rng.uniform(20, 300, n), rng.integers(0, 9, n).astype(float),
           np.log(500.0), 190.0, 1.0)
    x = rng.permutation(40).astype(float)
    y = rng.permutation(40).astype(float)
    return {
        "norm_cdf": (-1.3,),
        "decisive_update": (1100.0, 120.0, 1000.0, 80.0, 1.5, 70.0, 20.0),
        "kwise_outcomes": kwise,
        "ucb_scores": ucb,
        "kendall_counts": (x, y),
    }


TRIAL_SNIPPET = (
    "import time;from dynarena.sim import *;"
    "spec=TrialSpec(n_trials=1);env=get_environment('reference');"
    "run_trial(env,TrialSpec(n_trials=1,dynamic_rounds=60,static_rounds=0,checkpoints=(60,),"
    "injection_schedule=((30,None),)),'ours');"
    "t=time.perf_counter();run_trial(env,spec,'ours');print(time.perf_counter()-t)"
)


def trial_seconds(disable_numba: bool) -> float:
    env = dict(os.environ, DYNARENA_DISABLE_NUMBA="1" if disable_numba else "0")
    out = subprocess.run([sys.executable, "-c", TRIAL_SNIPPET], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None) -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--skip-trial", action="store_true")
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        sys.exit("numba is not installed")
    cases = _cases(np.random.default_rng(0))
    print(f"{'kernel':<18}{'numba us':>12}{'python us':>12}{'speedup':>10}")
    for name, call_args in cases.items():
        nb, py = _kernels.NB_KERNELS[name], _kernels.PY_KERNELS[name]
        nb(*call_args)  # compile outside the timing
        t_nb = min(timeit.repeat(lambda: nb(*call_args), number=args.repeat, repeat=3)) / args.repeat
        t_py = min(timeit.repeat(lambda: py(*call_args), number=args.repeat, repeat=3)) / args.repeat
        print(f"{name:<18}{t_nb * 1e6:>12.2f}{t_py * 1e6:>12.2f}{t_py / t_nb:>10.1f}")
    if not args.skip_trial:
        t_nb, t_py = trial_seconds(False), trial_seconds(True)
        print(f"{'trial (ours)':<18}{t_nb:>11.2f}s{t_py:>11.2f}s{t_py / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
