from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

LOGIC_BUCKETS = ("attribute_binding", "counting", "spatial", "state_action", "short_text", "long_text")
SUPPORT_BUCKETS = ("environment", "lighting_atmosphere", "camera_composition", "medium_format")


class PoolError(ValueError):
    pass


@dataclass
class CandidatePools:
    """Tag inventories. Restricted pools are kept for reference only and never sampled."""

    strong_subjects: list = field(default_factory=list)
    logic: dict = field(default_factory=dict)
    support: dict = field(default_factory=dict)
    weak_subjects: list = field(default_factory=list)
    dependent_fragments: list = field(default_factory=list)

    def __post_init__(self):
        unknown = set(self.logic) - set(LOGIC_BUCKETS)
        if unknown:
            raise PoolError(f"unknown logic buckets: {sorted(unknown)}")
        unknown = set(self.support) - set(SUPPORT_BUCKETS)
        if unknown:
            raise PoolError(f"unknown support buckets: {sorted(unknown)}")
        self.logic = {b: list(self.logic.get(b, ())) for b in LOGIC_BUCKETS}
        self.support = {b: list(self.support.get(b, ())) for b in SUPPORT_BUCKETS}
        self.strong_subjects = list(self.strong_subjects)

    def sizes(self) -> dict:
        return {
            "strong_subjects": len(self.strong_subjects),
            **{f"logic.{b}": len(v) for b, v in self.logic.items()},
            **{f"support.{b}": len(v) for b, v in self.support.items()},
        }

    def to_dict(self) -> dict:
        return {
            "strong_subjects": self.strong_subjects,
            "logic": self.logic,
            "support": self.support,
            "weak_subjects": list(self.weak_subjects),
            "dependent_fragments": list(self.dependent_fragments),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CandidatePools":
        extra = set(d) - {"strong_subjects", "logic", "support", "weak_subjects", "dependent_fragments"}
        if extra:
            raise PoolError(f"unknown pool keys: {sorted(extra)}")
        return cls(
            strong_subjects=d.get("strong_subjects", []),
            logic=d.get("logic", {}),
            support=d.get("support", {}),
            weak_subjects=d.get("weak_subjects", []),
            dependent_fragments=d.get("dependent_fragments", []),
        )

    @classmethod
    def load(cls, path: str | Path) -> "CandidatePools":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def from_sizes(cls, sizes: dict) -> "CandidatePools":
        """Placeholder tags ``bucket#i``; enough for counting and load tests."""
        def fill(name, n):
            return [f"{name}#{i}" for i in range(int(n))]

        return cls(
            strong_subjects=fill("subject", sizes.get("strong_subjects", 0)),
            logic={b: fill(b, n) for b, n in sizes.get("logic", {}).items()},
            support={b: fill(b, n) for b, n in sizes.get("support", {}).items()},
        )


def _data(name: str) -> str:
    return resources.files("dynarena.prompts.data").joinpath(name).read_text(encoding="utf-8")


def reference_pool_sizes() -> dict:
    """Inventory sizes of the production pools (support sizes are estimates)."""
    return json.loads(_data("pool_sizes.json"))


def demo_pools() -> CandidatePools:
    return CandidatePools.from_dict(json.loads(_data("demo_pools.json")))
