"""Append-only JSON Lines persistence, resume and output analysis."""

from __future__ import annotations

import fcntl
import json
import logging
import os
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO

from .sampler import DEFAULT_POLLUTION, PromptConfig

log = logging.getLogger(__name__)

REQUIRED_KEYS = ("id", "task", "prompt", "tags")


def append_config(config: PromptConfig, sink: IO[str], fsync: bool = False) -> None:
    """Write one record as a single line and flush it."""
    line = json.dumps(config.to_record(), ensure_ascii=False, separators=(",", ":")) + "\n"
    sink.write(line)
    sink.flush()
    if fsync:
        os.fsync(sink.fileno())


def _iter_lines(path: Path):
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            yield lineno, raw


def resume_scan(path: str | Path) -> int:
    """Next free id: max id in the file plus one, or 0 for a missing file.

    A final line without a newline that does not parse is treated as a torn
    write and skipped with a warning.
    """
    path = Path(path)
    if not path.exists():
        return 0
    best = -1
    lines = list(_iter_lines(path))
    for i, (lineno, raw) in enumerate(lines):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
            rid = int(rec["id"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            last = i == len(lines) - 1
            if last and not raw.endswith("\n"):
                log.warning("%s: ignoring truncated last line %d", path, lineno)
            else:
                log.warning("%s: skipping malformed line %d", path, lineno)
            continue
        best = max(best, rid)
    return best + 1


def _repair_tail(path: Path) -> None:
    """Terminate a torn last line so the next append starts on a fresh line."""
    if not path.exists() or path.stat().st_size == 0:
        return
    with path.open("rb+") as fh:
        fh.seek(-1, os.SEEK_END)
        if fh.read(1) != b"\n":
            fh.write(b"\n")


class PromptWriter:
    """Single exclusive writer for one output file, resuming ids from its contents."""

    def __init__(self, path: str | Path, fsync: bool = False):
        self.path = Path(path)
        self.fsync = fsync
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = self.path.open("a", encoding="utf-8")
        try:
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            self._fh.close()
            raise RuntimeError(f"{self.path} is locked by another writer") from None
        _repair_tail(self.path)
        self.next_id = resume_scan(self.path)

    def write(self, config: PromptConfig) -> None:
        if config.id < self.next_id:
            raise ValueError(f"id {config.id} already used (next free id is {self.next_id})")
        append_config(config, self._fh, self.fsync)
        self.next_id = config.id + 1

    def close(self) -> None:
        if not self._fh.closed:
            fcntl.flock(self._fh.fileno(), fcntl.LOCK_UN)
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class AnalysisReport:
    total_lines: int = 0
    records: int = 0
    non_empty_rate: float = 0.0
    malformed_rate: float = 0.0
    mean_words: float = 0.0
    mean_chars: float = 0.0
    difficulty: dict = field(default_factory=dict)
    logic_pool: dict = field(default_factory=dict)
    support: dict = field(default_factory=dict)
    checklist: dict = field(default_factory=dict)
    pollution_hits: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _shares(counter: Counter) -> dict:
    total = sum(counter.values())
    return {str(k): v / total for k, v in sorted(counter.items(), key=lambda kv: str(kv[0]))} if total else {}


def analyze_outputs(path: str | Path, pollution: tuple = DEFAULT_POLLUTION) -> AnalysisReport:
    """Rates over non-blank lines; lengths and distributions over well-formed records."""
    path = Path(path)
    report = AnalysisReport()
    malformed = 0
    non_empty = 0
    words = chars = 0
    diff, logic, support, checklist, hits = Counter(), Counter(), Counter(), Counter(), Counter()
    for _, raw in _iter_lines(path):
        if not raw.strip():
            continue
        report.total_lines += 1
        try:
            rec = json.loads(raw)
            if not isinstance(rec, dict) or any(k not in rec for k in REQUIRED_KEYS):
                raise ValueError
        except ValueError:
            malformed += 1
            continue
        report.records += 1
        text = rec.get("prompt") or ""
        if text.strip():
            non_empty += 1
            words += len(text.split())
            chars += len(text)
            low = text.lower()
            for p in pollution:
                if p in low:
                    hits[p] += 1
        if rec.get("difficulty"):
            diff[rec["difficulty"]] += 1
        if rec.get("logic_pool"):
            logic[rec["logic_pool"]] += 1
        for s in (rec.get("tags") or {}).get("supports", ()):
            support[s["bucket"]] += 1
        slots = (rec.get("checklist") or {}).get("slots")
        if slots is not None:
            checklist[int(slots)] += 1
    if report.total_lines:
        report.non_empty_rate = non_empty / report.total_lines
        report.malformed_rate = malformed / report.total_lines
    if non_empty:
        report.mean_words = words / non_empty
        report.mean_chars = chars / non_empty
    report.difficulty = _shares(diff)
    report.logic_pool = _shares(logic)
    report.support = _shares(support)
    report.checklist = _shares(checklist)
    report.pollution_hits = dict(sorted(hits.items()))
    return report
