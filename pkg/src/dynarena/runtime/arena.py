"""Live arena loop with logging, snapshots, resume and replay verification."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..rating import RatingHyperParams
from ..scheduler import ArenaState, inject, leaderboard, run_round
from .config import RuntimeConfig
from .matchlog import MatchLog, header_record, inject_record, match_record, read_log, snapshot_record
from .providers import LogReplayProvider, make_provider


class ArenaRunError(RuntimeError):
    pass


def log_path(out_dir: str | Path, dimension: str) -> Path:
    return Path(out_dir) / f"matchlog_{dimension.lower()}.jsonl"


def leaderboard_payload(state: ArenaState, hp: RatingHyperParams, dimension: str) -> dict:
    rows = [
        {"rank": i + 1, "model": m, "score": s, "mu": mu, "sigma": sigma,
         "batches": state.ratings[m].batches_evaluated}
        for i, (m, s, mu, sigma) in enumerate(leaderboard(state, hp))
    ]
    return {"dimension": dimension, "round": state.round_index, "rows": rows}


def write_leaderboard(state: ArenaState, hp: RatingHyperParams, dimension: str, out_dir: Path,
                      final: bool = False) -> Path:
    name = f"leaderboard_{dimension.lower()}" + ("" if final else f"_r{state.round_index:05d}") + ".json"
    path = out_dir / name
    path.write_text(json.dumps(leaderboard_payload(state, hp, dimension), indent=2, sort_keys=True) + "\n")
    return path


@dataclass
class ReplayResult:
    state: ArenaState
    hp: RatingHyperParams
    rounds: int
    snapshots_checked: int
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def replay_records(records: list[dict]) -> ReplayResult:
    """Re-derive the arena state from a log, comparing every stored value on the way."""
    header = records[0]
    hp = RatingHyperParams.from_dict(header["hyperparams"])
    state = ArenaState.create(header["models"], hp, seed=header["seed"], converge_sigma=header["converge_sigma"])
    source = LogReplayProvider(records)
    mismatches = []
    rounds = snaps = 0
    for rec in records[1:]:
        kind = rec.get("type")
        if kind == "inject":
            inject(state, rec["model"], hp)
        elif kind == "round":
            try:
                rr = run_round(state, source, hp)
            except Exception as exc:  # scheduling diverged from the log
                mismatches.append(f"round {rec['round_index']}: {exc}")
                break
            rounds += 1
            got = match_record(rr, header["dimension"], header["seed"])
            for key in ("pre", "post", "verdict", "weight", "p_a", "mode", "newly_converged"):
                if got[key] != rec[key]:
                    mismatches.append(f"round {rr.round_index}: {key} differs")
        elif kind == "snapshot":
            snaps += 1
            if state.snapshot() != rec["state"]:
                mismatches.append(f"snapshot at round {rec['round_index']} differs")
        else:
            mismatches.append(f"unknown record type {kind!r}")
    return ReplayResult(state, hp, rounds, snaps, mismatches)


def replay_log(path: str | Path) -> ReplayResult:
    return replay_records(read_log(path))


def _resolved_converge(cfg: RuntimeConfig):
    return cfg.hp.sigma_conv if cfg.converge_sigma == "default" else cfg.converge_sigma


def run_arena(cfg: RuntimeConfig, dimension: str, out_dir: str | Path, rounds: int | None = None,
              resume: bool = False, provider=None) -> ArenaState:
    """Play until ``rounds`` total rounds exist in the dimension's log."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = log_path(out, dimension)
    target = cfg.rounds if rounds is None else rounds
    hp = cfg.hp
    header = header_record(dimension, cfg.seed, hp.to_dict(), cfg.models, _resolved_converge(cfg))
    fresh = not path.exists() or path.stat().st_size == 0
    if not fresh:
        if not resume:
            raise ArenaRunError(f"{path} exists; pass --resume to continue it")
        records = read_log(path)
        stored = {k: records[0].get(k) for k in ("dimension", "seed", "hyperparams", "models", "converge_sigma")}
        wanted = {k: header[k] for k in stored}
        if json.loads(json.dumps(wanted)) != stored:
            raise ArenaRunError(f"{path} was written with a different configuration")
        result = replay_records(records)
        if not result.ok:
            raise ArenaRunError(f"{path} does not replay cleanly: {result.mismatches[0]}")
        state = result.state
    else:
        state = ArenaState.create(cfg.models, hp, seed=cfg.seed, converge_sigma=_resolved_converge(cfg))
    source = provider if provider is not None else make_provider(cfg.provider, cfg.seed, dimension)
    pending = sorted(cfg.injections, key=lambda i: (i.round, i.model))

    with MatchLog(path) as mlog:
        if fresh:
            mlog.append(header)
        last_snapshot = None
        while state.round_index < target:
            r = state.round_index + 1
            for inj in pending:
                if inj.round <= r and inj.model not in state.ratings:
                    inject(state, inj.model, hp)
                    mlog.append(inject_record(inj.model, r))
            rec = run_round(state, source, hp)
            mlog.append(match_record(rec, dimension, cfg.seed))
            if cfg.snapshot_every and r % cfg.snapshot_every == 0:
                mlog.append(snapshot_record(state))
                write_leaderboard(state, hp, dimension, out)
                last_snapshot = r
        if last_snapshot != state.round_index:
            mlog.append(snapshot_record(state))
    write_leaderboard(state, hp, dimension, out, final=True)
    return state
