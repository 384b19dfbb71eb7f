"""Append-only JSON Lines match log.

Line types: ``header`` (first line: dimension, seed, hyperparameters, roster),
``inject``, ``round`` and ``snapshot`` (full arena state). Floats are written
with ``repr`` precision, so reading a log back gives bit-identical values.
"""

from __future__ import annotations

import datetime as _dt
import fcntl
import hashlib
import json
import logging
import math
import os
from pathlib import Path

from ..scheduler import ArenaState, RoundRecord

log = logging.getLogger(__name__)

LOG_VERSION = 1


def seed_fingerprint(seed: int, dimension: str) -> str:
    return hashlib.sha256(f"{seed}:{dimension}".encode()).hexdigest()[:16]


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _num(x: float):
    return None if isinstance(x, float) and not math.isfinite(x) else x


def header_record(dimension: str, seed: int, hp: dict, models: list, converge_sigma) -> dict:
    return {
        "type": "header",
        "version": LOG_VERSION,
        "dimension": dimension,
        "seed": seed,
        "seed_fingerprint": seed_fingerprint(seed, dimension),
        "hyperparams": hp,
        "models": list(models),
        "converge_sigma": converge_sigma,
    }


def inject_record(model: str, round_index: int) -> dict:
    return {"type": "inject", "model": model, "round_index": round_index, "timestamp": _now()}


def match_record(rec: RoundRecord, dimension: str, seed: int) -> dict:
    d = rec.decision
    a, b = d.pivot, d.opponent
    return {
        "type": "round",
        "round_index": rec.round_index,
        "dimension": dimension,
        "model_a": a,
        "model_b": b,
        "mode": d.mode.value,
        "wins_a": rec.batch.wins_a,
        "wins_b": rec.batch.wins_b,
        "ties": rec.batch.ties,
        "p_a": _num(rec.macro.p_a),
        "verdict": rec.macro.verdict.value,
        "weight": rec.macro.weight,
        "pre": {a: rec.pre[0].to_dict(), b: rec.pre[1].to_dict()},
        "post": {a: rec.post[0].to_dict(), b: rec.post[1].to_dict()},
        "newly_converged": list(rec.newly_converged),
        "prompt_ids": list(rec.prompt_ids),
        "timestamp": _now(),
        "seed_fingerprint": seed_fingerprint(seed, dimension),
    }


def snapshot_record(state: ArenaState) -> dict:
    return {"type": "snapshot", "round_index": state.round_index, "state": state.snapshot()}


class MatchLog:
    """Exclusive appender; a torn last line from a crash is cut off on open."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("a+", encoding="utf-8")
        try:
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            self._fh.close()
            raise RuntimeError(f"{self.path} is locked by another writer") from None
        _drop_torn_tail(self.path)

    def append(self, record: dict) -> None:
        self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self) -> None:
        if not self._fh.closed:
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_UN)
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _drop_torn_tail(path: Path) -> None:
    data = path.read_bytes()
    if not data or data.endswith(b"\n"):
        return
    cut = data.rfind(b"\n") + 1
    log.warning("%s: dropping %d bytes of a torn last record", path, len(data) - cut)
    with path.open("rb+") as fh:
        fh.truncate(cut)


def read_log(path: str | Path) -> list[dict]:
    """Parse every complete line; a torn final line is ignored."""
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        lines = fh.readlines()
    for i, raw in enumerate(lines):
        if not raw.strip():
            continue
        try:
            out.append(json.loads(raw))
        except json.JSONDecodeError:
            if i == len(lines) - 1 and not raw.endswith("\n"):
                log.warning("%s: ignoring torn last line", path)
                break
            raise
    if out and out[0].get("type") != "header":
        raise ValueError(f"{path}: first record is not a header")
    return out
