"""Structured prompt-configuration sampling and space counting."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

import numpy as np

from .pools import LOGIC_BUCKETS, SUPPORT_BUCKETS, CandidatePools, PoolError


class Task(str, Enum):
    ALIGNMENT = "Alignment"
    QUALITY = "Quality"


class Difficulty(str, Enum):
    EASY = "Easy"
    MEDIUM = "Medium"
    HARD = "Hard"
    HARD_LONG_TEXT = "HardLongText"


DIFFICULTY_BUCKETS = {
    Difficulty.EASY: ("attribute_binding", "state_action"),
    Difficulty.MEDIUM: ("attribute_binding", "state_action", "counting", "short_text"),
    Difficulty.HARD: ("spatial", "counting", "short_text"),
    Difficulty.HARD_LONG_TEXT: ("long_text",),
}

# filler categories appended after the structural ones
_EXTRA_CHECKS = ("object_integrity", "detail_fidelity", "global_coherence")


class EmptyPoolError(PoolError):
    pass


@dataclass(frozen=True)
class SamplingPolicy:
    difficulty_weights: dict = field(default_factory=lambda: {d.value: 1.0 for d in Difficulty})
    # per-difficulty logic-bucket weights; missing entries are uniform over the map
    bucket_weights: dict = field(default_factory=dict)
    checklist_weights: dict = field(default_factory=lambda: {4: 0.41, 5: 0.56, 6: 0.03})
    quality_logic_prob: float = 0.1
    quality_support_weights: dict = field(default_factory=lambda: {
        "environment": 1.0, "lighting_atmosphere": 1.0, "camera_composition": 1.0, "medium_format": 0.25,
    })
    quality_support_count: int = 2
    max_attempts: int = 3
    # count the optional soft logic in the quality space (off: main space only)
    count_soft_logic: bool = False

    def __post_init__(self):
        if not 0.0 <= self.quality_logic_prob <= 1.0:
            raise ValueError("quality_logic_prob must lie in [0, 1]")
        if set(map(int, self.checklist_weights)) - {4, 5, 6}:
            raise ValueError("checklist sizes must be 4, 5 or 6")
        if self.quality_support_count < 1 or self.max_attempts < 1:
            raise ValueError("quality_support_count and max_attempts must be positive")

    def difficulty_table(self) -> list[tuple[Difficulty, float]]:
        return [(d, float(self.difficulty_weights.get(d.value, 0.0))) for d in Difficulty]

    def buckets_for(self, difficulty: Difficulty) -> list[tuple[str, float]]:
        custom = self.bucket_weights.get(difficulty.value, {})
        return [(b, float(custom.get(b, 1.0))) for b in DIFFICULTY_BUCKETS[difficulty]]

    def to_dict(self) -> dict:
        return {
            "difficulty_weights": dict(self.difficulty_weights),
            "bucket_weights": {k: dict(v) for k, v in self.bucket_weights.items()},
            "checklist_weights": {str(k): v for k, v in self.checklist_weights.items()},
            "quality_logic_prob": self.quality_logic_prob,
            "quality_support_weights": dict(self.quality_support_weights),
            "quality_support_count": self.quality_support_count,
            "max_attempts": self.max_attempts,
            "count_soft_logic": self.count_soft_logic,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingPolicy":
        d = dict(d)
        if "checklist_weights" in d:
            d["checklist_weights"] = {int(k): float(v) for k, v in d["checklist_weights"].items()}
        return cls(**d)


@dataclass(frozen=True)
class Tag:
    bucket: str
    text: str

    def to_dict(self) -> dict:
        return {"bucket": self.bucket, "text": self.text}


@dataclass(frozen=True)
class PromptConfig:
    id: int
    task: Task
    subject: Tag
    supports: tuple
    difficulty: Difficulty | None = None
    logic: Tag | None = None
    checklist_slots: int | None = None
    checklist_categories: tuple = ()
    rewritten_text: str | None = None

    def __post_init__(self):
        n_sup = len(self.supports)
        if self.task is Task.ALIGNMENT:
            if self.logic is None or n_sup != 1 or self.difficulty is None:
                raise ValueError("alignment configs need a difficulty, one logic tag and one support")
            if self.checklist_slots not in (4, 5, 6):
                raise ValueError("checklist_slots must be 4, 5 or 6")
            if self.logic.bucket not in DIFFICULTY_BUCKETS[self.difficulty]:
                raise ValueError(f"{self.logic.bucket} not allowed at {self.difficulty.value}")
        else:
            if self.difficulty is not None or self.checklist_slots is not None:
                raise ValueError("quality configs carry no difficulty or checklist")
            if len({s.bucket for s in self.supports}) != n_sup or n_sup < 1:
                raise ValueError("quality supports must come from distinct buckets")

    @property
    def tags(self) -> list[Tag]:
        out = [self.subject]
        if self.logic is not None:
            out.append(self.logic)
        return out + list(self.supports)

    def template_text(self) -> str:
        """Deterministic non-LLM rendering of the tags."""
        return ", ".join(t.text for t in self.tags)

    @property
    def text(self) -> str:
        return self.rewritten_text if self.rewritten_text is not None else self.template_text()

    @property
    def text_source(self) -> str:
        return "rewriter" if self.rewritten_text is not None else "template"

    def to_record(self) -> dict:
        rec = {
            "id": self.id,
            "task": self.task.value,
            "difficulty": None if self.difficulty is None else self.difficulty.value,
            "logic_pool": None if self.logic is None else self.logic.bucket,
            "tags": {
                "subject": self.subject.to_dict(),
                "logic": None if self.logic is None else self.logic.to_dict(),
                "supports": [s.to_dict() for s in self.supports],
            },
            "prompt": self.text,
            "prompt_source": self.text_source,
        }
        if self.checklist_slots is not None:
            rec["checklist"] = {"slots": self.checklist_slots, "categories": list(self.checklist_categories)}
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "PromptConfig":
        tags = rec["tags"]
        logic = tags.get("logic")
        checklist = rec.get("checklist") or {}
        return cls(
            id=int(rec["id"]),
            task=Task(rec["task"]),
            difficulty=None if rec.get("difficulty") is None else Difficulty(rec["difficulty"]),
            subject=Tag(**tags["subject"]),
            logic=None if logic is None else Tag(**logic),
            supports=tuple(Tag(**s) for s in tags["supports"]),
            checklist_slots=checklist.get("slots"),
            checklist_categories=tuple(checklist.get("categories", ())),
            rewritten_text=rec["prompt"] if rec.get("prompt_source") == "rewriter" else None,
        )


def _weighted_choice(rng, items: list, weights: list[float]):
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if not total > 0:
        raise EmptyPoolError("no option with positive weight")
    return items[int(rng.choice(len(items), p=w / total))]


def _pick(rng, pool: list, name: str):
    if not pool:
        raise EmptyPoolError(f"pool {name!r} is empty")
    return pool[int(rng.integers(len(pool)))]


def checklist_categories(logic: Tag | None, supports, slots: int) -> tuple:
    cats = ["subject"]
    if logic is not None:
        cats.append(logic.bucket)
    cats.extend(s.bucket for s in supports)
    extra = itertools.cycle(_EXTRA_CHECKS)
    while len(cats) < slots:
        cats.append(next(extra))
    return tuple(cats[:slots])


def sample_config(task: Task | str, pools: CandidatePools, policy: SamplingPolicy | None = None,
                  rng=None, config_id: int = 0, difficulty: Difficulty | str | None = None) -> PromptConfig:
    """Draw one rule-valid configuration. ``difficulty`` forces the alignment level."""
    task = Task(task)
    policy = policy or SamplingPolicy()
    rng = np.random.default_rng() if rng is None else rng
    subject = Tag("strong_subjects", _pick(rng, pools.strong_subjects, "strong_subjects"))

    if task is Task.ALIGNMENT:
        if difficulty is None:
            table = [(d, w) for d, w in policy.difficulty_table() if w > 0 and _alignment_ready(pools, policy, d)]
            if not table:
                raise EmptyPoolError("no difficulty level has non-empty pools")
            diff = _weighted_choice(rng, [d for d, _ in table], [w for _, w in table])
        else:
            diff = Difficulty(difficulty)
        buckets = [(b, w) for b, w in policy.buckets_for(diff) if w > 0 and pools.logic[b]]
        if not buckets:
            raise EmptyPoolError(f"no logic pool available for {diff.value}")
        bucket = _weighted_choice(rng, [b for b, _ in buckets], [w for _, w in buckets])
        logic = Tag(bucket, _pick(rng, pools.logic[bucket], bucket))
        sup_buckets = [b for b in SUPPORT_BUCKETS if pools.support[b]]
        if not sup_buckets:
            raise EmptyPoolError("all support pools are empty")
        # uniform over individual support tags
        sizes = [len(pools.support[b]) for b in sup_buckets]
        sb = _weighted_choice(rng, sup_buckets, sizes)
        support = Tag(sb, _pick(rng, pools.support[sb], sb))
        slots = int(_weighted_choice(rng, sorted(policy.checklist_weights),
                                     [policy.checklist_weights[k] for k in sorted(policy.checklist_weights)]))
        return PromptConfig(config_id, task, subject, (support,), diff, logic, slots,
                            checklist_categories(logic, (support,), slots))

    avail = [b for b in SUPPORT_BUCKETS if pools.support[b] and policy.quality_support_weights.get(b, 0.0) > 0]
    k = policy.quality_support_count
    if len(avail) < k:
        raise EmptyPoolError(f"quality needs {k} non-empty support buckets")
    w = np.array([policy.quality_support_weights[b] for b in avail], dtype=float)
    chosen = rng.choice(len(avail), size=k, replace=False, p=w / w.sum())
    supports = tuple(Tag(avail[i], _pick(rng, pools.support[avail[i]], avail[i])) for i in sorted(chosen))
    logic = None
    if rng.random() < policy.quality_logic_prob:
        logic_buckets = [b for b in LOGIC_BUCKETS if pools.logic[b]]
        if logic_buckets:
            b = _weighted_choice(rng, logic_buckets, [len(pools.logic[x]) for x in logic_buckets])
            logic = Tag(b, _pick(rng, pools.logic[b], b))
    return PromptConfig(config_id, task, subject, supports, logic=logic)


def _alignment_ready(pools: CandidatePools, policy: SamplingPolicy, d: Difficulty) -> bool:
    return any(w > 0 and pools.logic[b] for b, w in policy.buckets_for(d))


def count_space(task: Task | str, pools: CandidatePools, policy: SamplingPolicy | None = None,
                difficulty: Difficulty | str | None = None) -> int:
    """Number of distinct configurations ``sample_config`` can produce (checklist size aside).

    Alignment counts (difficulty, subject, logic, support) tuples; a logic tag
    reachable from two levels counts once per level. Quality counts subject
    times unordered support tuples from distinct buckets, times the optional
    logic choices when ``count_soft_logic`` is set.
    """
    task = Task(task)
    policy = policy or SamplingPolicy()
    n_subj = len(pools.strong_subjects)
    if task is Task.ALIGNMENT:
        n_sup = sum(len(v) for v in pools.support.values())
        levels = [Difficulty(difficulty)] if difficulty is not None else [
            d for d, w in policy.difficulty_table() if w > 0
        ]
        n_logic = sum(
            len(pools.logic[b]) for d in levels for b, w in policy.buckets_for(d) if w > 0
        )
        return n_subj * n_logic * n_sup
    sizes = [len(pools.support[b]) for b in SUPPORT_BUCKETS if policy.quality_support_weights.get(b, 0.0) > 0]
    combos = sum(math.prod(c) for c in itertools.combinations(sizes, policy.quality_support_count))
    total = n_subj * combos
    if policy.count_soft_logic and policy.quality_logic_prob > 0:
        total *= 1 + sum(len(v) for v in pools.logic.values())
    return total


# -- generation with optional rewriting -------------------------------------------

DEFAULT_POLLUTION = (
    "here is", "here's", "sure,", "as an ai", "prompt:", "checklist:", "i cannot", "rewritten",
)


def is_abnormal(text: str | None, pollution: tuple = DEFAULT_POLLUTION, min_words: int = 3) -> bool:
    if text is None or len(text.split()) < min_words:
        return True
    low = text.lower()
    return any(p in low for p in pollution)


def _contract(pools: CandidatePools, cfg: PromptConfig) -> CandidatePools:
    """Drop the tags of a failed attempt, keeping every pool non-empty."""
    def without(items, tag):
        rest = [x for x in items if x != tag]
        return rest or list(items)

    logic = dict(pools.logic)
    support = dict(pools.support)
    if cfg.logic is not None:
        logic[cfg.logic.bucket] = without(logic[cfg.logic.bucket], cfg.logic.text)
    for s in cfg.supports:
        support[s.bucket] = without(support[s.bucket], s.text)
    return CandidatePools(without(pools.strong_subjects, cfg.subject.text), logic, support,
                          pools.weak_subjects, pools.dependent_fragments)


@dataclass(frozen=True)
class GenerationResult:
    config: PromptConfig
    attempts: int
    ok: bool


def generate(task: Task | str, pools: CandidatePools, policy: SamplingPolicy | None = None, rng=None,
             config_id: int = 0, rewriter: Callable[[PromptConfig], str | None] | None = None,
             pollution: tuple = DEFAULT_POLLUTION) -> GenerationResult:
    """Sample a configuration and, if a rewriter is given, rewrite it with retries.

    Each abnormal rewrite contracts the pools around the failed tags before the
    next draw; the alignment difficulty level is kept across attempts. After
    ``max_attempts`` failures the template rendering is kept.
    """
    policy = policy or SamplingPolicy()
    rng = np.random.default_rng() if rng is None else rng
    cfg = sample_config(task, pools, policy, rng, config_id)
    if rewriter is None:
        return GenerationResult(cfg, 1, True)
    current = pools
    for attempt in range(1, policy.max_attempts + 1):
        text = rewriter(cfg)
        if not is_abnormal(text, pollution):
            return GenerationResult(replace(cfg, rewritten_text=text.strip()), attempt, True)
        if attempt == policy.max_attempts:
            break
        current = _contract(current, cfg)
        cfg = sample_config(task, current, policy, rng, config_id, difficulty=cfg.difficulty)
    return GenerationResult(cfg, policy.max_attempts, False)
