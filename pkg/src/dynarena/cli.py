"""Command-line entry point: ``dynarena {simulate,arena,prompts,analyze,replay}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .prompts import CandidatePools, PromptWriter, SamplingPolicy, Task, analyze_outputs, demo_pools, generate
from .runtime.arena import ArenaRunError, replay_log, run_arena
from .runtime.config import ConfigError, RuntimeConfig, load_config, save_config
from .sim import ENVIRONMENT_NAMES, SYSTEM_NAMES, TrialSpec, run_grid, write_reports

log = logging.getLogger("dynarena")

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2


def _trial_spec(cfg: RuntimeConfig, seed: int | None, rounds: int | None) -> TrialSpec:
    spec = TrialSpec.from_dict(cfg.simulate.get("trial_spec", {}))
    if seed is not None:
        spec = replace(spec, seed=seed)
    if rounds is not None:
        # shrink the protocol to a shorter dynamic phase
        checkpoints = tuple(sorted({c for c in spec.checkpoints if c < rounds} | {rounds}))
        schedule = tuple((r if r < rounds else max(2, rounds // 3), p) for r, p in spec.injection_schedule)
        spec = replace(spec, dynamic_rounds=rounds, checkpoints=checkpoints, injection_schedule=schedule)
    return spec


def cmd_simulate(args, cfg: RuntimeConfig) -> int:
    sim = cfg.simulate
    spec = _trial_spec(cfg, args.seed, args.rounds)
    envs = sim.get("environments", list(ENVIRONMENT_NAMES))
    systems = sim.get("systems", list(SYSTEM_NAMES))
    t0 = time.perf_counter()
    reports = run_grid(envs, systems, spec, jobs=int(sim.get("jobs", 1)), params=sim.get("params"))
    paths = write_reports(reports, args.out_dir, spec)
    log.info("simulated %d trials in %.1f s", len(reports), time.perf_counter() - t0)
    print(json.dumps(paths))
    return EXIT_OK


def cmd_arena(args, cfg: RuntimeConfig) -> int:
    if args.seed is not None:
        cfg = RuntimeConfig.from_dict({**cfg.to_dict(), "seed": args.seed})
    dims = [args.dimension] if args.dimension else cfg.dimensions
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_config(cfg, out / "effective_config.json")
    for dim in dims:
        try:
            state = run_arena(cfg, dim, out, rounds=args.rounds, resume=args.resume)
        except ArenaRunError as exc:
            log.error("%s", exc)
            return EXIT_USAGE
        log.info("%s: %d rounds, %d models", dim, state.round_index, len(state.ratings))
    return EXIT_OK


def _load_pools(spec) -> CandidatePools:
    if spec is None:
        return demo_pools()
    if isinstance(spec, dict):
        return CandidatePools.from_dict(spec)
    return CandidatePools.load(spec)


def cmd_prompts(args, cfg: RuntimeConfig) -> int:
    pc = cfg.prompts
    task = Task(pc.get("task", "Alignment"))
    count = int(args.rounds if args.rounds is not None else pc.get("count", 100))
    seed = cfg.seed if args.seed is None else args.seed
    pools = _load_pools(pc.get("pools"))
    policy = SamplingPolicy.from_dict(pc.get("policy", {}))
    path = Path(args.out_dir) / pc.get("output", f"prompts_{task.value.lower()}.jsonl")
    if path.exists() and path.stat().st_size > 0 and not args.resume:
        log.error("%s exists; pass --resume to continue it", path)
        return EXIT_USAGE
    with PromptWriter(path) as writer:
        while writer.next_id < count:
            i = writer.next_id
            # one stream per id, so resumed files match uninterrupted ones
            rng = np.random.default_rng([seed, i])
            writer.write(generate(task, pools, policy, rng, config_id=i).config)
    print(str(path))
    return EXIT_OK


def cmd_analyze(args, cfg: RuntimeConfig) -> int:
    report = analyze_outputs(args.path).to_dict()
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "analysis.json").write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_replay(args, cfg: RuntimeConfig) -> int:
    result = replay_log(args.path)
    if result.snapshots_checked == 0:
        log.warning("log holds no snapshot; only per-round values were compared")
    status = "match" if result.ok else "mismatch"
    print(json.dumps({"status": status, "rounds": result.rounds, "snapshots": result.snapshots_checked,
                      "mismatches": result.mismatches[:20]}))
    return EXIT_OK if result.ok else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out-dir", default="out", help="output directory (default: out)")
    common.add_argument("--resume", action="store_true", help="continue an existing log or prompt file")
    common.add_argument("--rounds", type=int, help="rounds to play (prompts: total records)")
    common.add_argument("--dimension", choices=["Alignment", "Perceptual", "Aesthetic"],
                        help="run a single dimension")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="dynarena", description="Dynamic generative-model arena")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run the simulation grid").set_defaults(func=cmd_simulate)
    sub.add_parser("arena", parents=[common], help="run live rounds").set_defaults(func=cmd_arena)
    sub.add_parser("prompts", parents=[common], help="sample prompt configurations").set_defaults(func=cmd_prompts)
    a = sub.add_parser("analyze", parents=[common], help="analyse a prompt file")
    a.add_argument("path")
    a.set_defaults(func=cmd_analyze, out_dir=None)
    r = sub.add_parser("replay", parents=[common], help="verify a match log by replaying it")
    r.add_argument("path")
    r.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (ConfigError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
