"""Configuration, match logs, outcome providers and the live arena loop."""

from .arena import ArenaRunError, ReplayResult, leaderboard_payload, replay_log, replay_records, run_arena
from .config import ConfigError, Injection, RuntimeConfig, load_config, save_config
from .matchlog import MatchLog, read_log, seed_fingerprint
from .providers import JudgeProvider, LogReplayProvider, MockProvider, ProviderError, make_provider

__all__ = [
    "ArenaRunError", "ReplayResult", "leaderboard_payload", "replay_log", "replay_records", "run_arena",
    "ConfigError", "Injection", "RuntimeConfig", "load_config", "save_config",
    "MatchLog", "read_log", "seed_fingerprint",
    "JudgeProvider", "LogReplayProvider", "MockProvider", "ProviderError", "make_provider",
]
