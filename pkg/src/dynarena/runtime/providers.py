"""Outcome providers: callables ``(model_a, model_b, round_index, n) -> outcomes``."""

from __future__ import annotations

import json
import zlib
from pathlib import Path

import numpy as np

from ..judge import JudgeClient, JudgeError
from ..rating import MicroBatchResult
from ..sim.environments import get_environment
from ..sim.generator import sample_outcome
from .matchlog import read_log


class ProviderError(RuntimeError):
    pass


def _crc(s: str) -> int:
    return zlib.crc32(s.encode())


class MockProvider:
    """Simulated judge over hidden skills.

    Each round draws from its own stream keyed by (seed, dimension, round),
    so outcomes do not depend on how many rounds ran before in this process.
    Missing skills are drawn from a stream keyed by the model id.
    """

    def __init__(self, seed: int, dimension: str, skills: dict | None = None,
                 environment: str = "reference", skill_mean: float = 1000.0, skill_sd: float = 250.0):
        self.seed = int(seed)
        self.dimension = dimension
        self.env = get_environment(environment)
        self.skills = dict(skills or {})
        self.skill_mean = skill_mean
        self.skill_sd = skill_sd

    def skill(self, model: str) -> float:
        if model not in self.skills:
            rng = np.random.default_rng([self.seed, _crc(model)])
            self.skills[model] = self.skill_mean + self.skill_sd * float(rng.standard_normal())
        return self.skills[model]

    def __call__(self, a: str, b: str, round_index: int, n: int):
        rng = np.random.default_rng([self.seed, _crc(self.dimension), round_index])
        sa, sb = self.skill(a), self.skill(b)
        return [
            (f"{self.dimension}:{round_index}:{i}", sample_outcome(self.env, sa, sb, rng=rng).value)
            for i in range(n)
        ]


class LogReplayProvider:
    """Serves the recorded tallies of an existing match log, checking the pairing."""

    def __init__(self, path_or_records):
        records = read_log(path_or_records) if isinstance(path_or_records, (str, Path)) else path_or_records
        self.rounds = {r["round_index"]: r for r in records if r.get("type") == "round"}

    def __call__(self, a: str, b: str, round_index: int, n: int):
        rec = self.rounds.get(round_index)
        if rec is None:
            raise ProviderError(f"log has no round {round_index}")
        if (rec["model_a"], rec["model_b"]) != (a, b):
            raise ProviderError(
                f"round {round_index}: scheduled {a} vs {b}, log has {rec['model_a']} vs {rec['model_b']}"
            )
        return MicroBatchResult(rec["wins_a"], rec["wins_b"], rec["ties"])


class JudgeProvider:
    """Alignment judging through the HTTP judge with order-swap aggregation.

    ``prompts`` are prompt-engine records; image references are built from
    ``image_pattern`` with ``{model}`` and ``{prompt_id}`` fields. A prompt
    whose judging fails counts as a failed prompt (``None``).
    """

    def __init__(self, client, prompts: list[dict], image_pattern: str, seed: int):
        if not prompts:
            raise ProviderError("judge provider needs a non-empty prompt set")
        self.client = client
        self.prompts = prompts
        self.image_pattern = image_pattern
        self.seed = int(seed)

    @staticmethod
    def load_prompts(path: str | Path) -> list[dict]:
        with Path(path).open(encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def __call__(self, a: str, b: str, round_index: int, n: int):
        rng = np.random.default_rng([self.seed, round_index])
        picks = rng.choice(len(self.prompts), size=min(n, len(self.prompts)), replace=False)
        items = []
        for i in picks:
            rec = self.prompts[int(i)]
            checklist = rec.get("checklist") or {}
            items.append({
                "prompt_id": rec["id"],
                "prompt": rec["prompt"],
                "checklist": checklist.get("items") or checklist.get("categories") or [],
                "image_a": self.image_pattern.format(model=a, prompt_id=rec["id"]),
                "image_b": self.image_pattern.format(model=b, prompt_id=rec["id"]),
            })
        out = []
        for item in items:
            try:
                res = self.client.compare(item["prompt"], item["checklist"], item["image_a"],
                                          item["image_b"], item["prompt_id"])
                out.append((item["prompt_id"], res.verdict.value))
            except JudgeError:
                out.append((item["prompt_id"], None))
        return out


def make_provider(spec: dict, seed: int, dimension: str):
    kind = spec.get("type", "mock")
    if kind == "mock":
        return MockProvider(seed, dimension, spec.get("skills"), spec.get("environment", "reference"))
    if kind == "replay":
        path = spec.get("path")
        if not path:
            raise ProviderError("replay provider needs a path")
        return LogReplayProvider(str(path).format(dimension=dimension))
    if kind == "judge":
        client = JudgeClient(spec.get("endpoint"), timeout=float(spec.get("timeout", 120.0)),
                             max_concurrency=int(spec.get("max_concurrency", 4)))
        prompts = JudgeProvider.load_prompts(spec["prompts"])
        return JudgeProvider(client, prompts, spec.get("image_pattern", "{model}/{prompt_id}.png"), seed)
    raise ProviderError(f"unknown provider type {kind!r}")
