"""Runtime configuration: one JSON file for every subcommand.

Top-level keys (all optional):

``seed``              int, master seed (default 0)
``hyperparams``       rating hyperparameter overrides
``converge_sigma``    number, null (never converge) or "default" (``hyperparams.sigma_conv``)
``models``            initial roster
``injections``        list of ``{"round": r, "model": id}`` late entries
``dimensions``        arenas to run, each with its own state and log
``rounds``            rounds per dimension for ``arena``
``snapshot_every``    leaderboard snapshot period in rounds (0: final only)
``provider``          outcome provider, ``{"type": "mock" | "replay" | "judge", ...}``
``simulate``          ``{"environments", "systems", "trial_spec", "jobs", "params"}``
``prompts``           ``{"task", "count", "pools", "policy", "output"}``
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..evaluators import Dimension
from ..rating import RatingHyperParams


class ConfigError(ValueError):
    pass


PROVIDER_TYPES = ("mock", "replay", "judge")


@dataclass(frozen=True)
class Injection:
    round: int
    model: str


@dataclass
class RuntimeConfig:
    seed: int = 0
    hyperparams: dict = field(default_factory=dict)
    converge_sigma: float | str | None = "default"
    models: list = field(default_factory=lambda: [f"model_{i:02d}" for i in range(8)])
    injections: list = field(default_factory=list)
    dimensions: list = field(default_factory=lambda: [Dimension.ALIGNMENT.value])
    rounds: int = 250
    snapshot_every: int = 50
    provider: dict = field(default_factory=lambda: {"type": "mock"})
    simulate: dict = field(default_factory=dict)
    prompts: dict = field(default_factory=dict)

    def __post_init__(self):
        self.injections = [i if isinstance(i, Injection) else Injection(int(i["round"]), str(i["model"]))
                           for i in self.injections]
        self.dimensions = [Dimension(d).value for d in self.dimensions]
        if len(set(self.models)) != len(self.models):
            raise ConfigError("duplicate model ids in roster")
        clash = {i.model for i in self.injections} & set(self.models)
        if clash:
            raise ConfigError(f"injected models already in roster: {sorted(clash)}")
        if self.rounds < 0 or self.snapshot_every < 0:
            raise ConfigError("rounds and snapshot_every must be non-negative")
        if self.provider.get("type") not in PROVIDER_TYPES:
            raise ConfigError(f"provider.type must be one of {PROVIDER_TYPES}")
        if isinstance(self.converge_sigma, str) and self.converge_sigma != "default":
            raise ConfigError('converge_sigma must be a number, null or "default"')
        try:
            self.hp = RatingHyperParams.from_dict(self.hyperparams)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["injections"] = [asdict(i) for i in self.injections]
        # store the resolved hyperparameters so the file is self-contained
        d["hyperparams"] = self.hp.to_dict()
        return json.loads(json.dumps(d))

    @classmethod
    def from_dict(cls, d: dict) -> "RuntimeConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def load_config(path: str | Path | None) -> RuntimeConfig:
    if path is None:
        return RuntimeConfig()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return RuntimeConfig.from_dict(data)


def save_config(cfg: RuntimeConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
