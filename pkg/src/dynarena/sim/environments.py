from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from functools import lru_cache
from importlib import resources

CATALOG_FILE = "environments.json"


@dataclass(frozen=True)
class EnvironmentSpec:
    name: str
    judge_beta: float
    sigma_std: float
    sigma_ext: float
    mu_penalty: float
    sigma_penalty: float
    tie_threshold: float
    p_extreme: float
    prompt_difficulty_std: float = 0.0
    prompt_tie_sensitivity_std: float = 0.0
    prompt_cluster_count: int = 0
    prompt_cluster_scale: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p_extreme <= 1.0:
            raise ValueError("p_extreme must lie in [0, 1]")
        for name in ("judge_beta", "sigma_std", "sigma_ext", "sigma_penalty",
                     "prompt_difficulty_std", "prompt_tie_sensitivity_std", "prompt_cluster_scale"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a finite non-negative number")
        if not math.isfinite(self.mu_penalty):
            raise ValueError("mu_penalty must be finite")
        if math.isnan(self.tie_threshold):
            raise ValueError("tie_threshold must not be NaN")
        if self.prompt_cluster_count < 0:
            raise ValueError("prompt_cluster_count must be >= 0")

    @property
    def has_clusters(self) -> bool:
        return self.prompt_cluster_count > 0 and self.prompt_cluster_scale > 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EnvironmentSpec":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown environment fields: {sorted(extra)}")
        return cls(**d)

    def with_overrides(self, **kw) -> "EnvironmentSpec":
        return replace(self, **kw)


@lru_cache(maxsize=1)
def _raw_catalog() -> dict:
    text = resources.files("dynarena.sim.data").joinpath(CATALOG_FILE).read_text(encoding="utf-8")
    return json.loads(text)


def load_catalog() -> dict[str, EnvironmentSpec]:
    return {name: EnvironmentSpec(name=name, **params) for name, params in _raw_catalog().items()}


def get_environment(name: str) -> EnvironmentSpec:
    catalog = load_catalog()
    if name not in catalog:
        raise KeyError(f"unknown environment {name!r}; choose from {sorted(catalog)}")
    return catalog[name]


ENVIRONMENT_NAMES = tuple(_raw_catalog())
