"""Difficulty-aware prompt configuration sampling and bookkeeping."""

from .pools import LOGIC_BUCKETS, SUPPORT_BUCKETS, CandidatePools, PoolError, demo_pools, reference_pool_sizes
from .sampler import (
    DIFFICULTY_BUCKETS,
    Difficulty,
    EmptyPoolError,
    GenerationResult,
    PromptConfig,
    SamplingPolicy,
    Tag,
    Task,
    count_space,
    generate,
    is_abnormal,
    sample_config,
)
from .store import AnalysisReport, PromptWriter, analyze_outputs, append_config, resume_scan

__all__ = [
    "LOGIC_BUCKETS", "SUPPORT_BUCKETS", "CandidatePools", "PoolError", "demo_pools", "reference_pool_sizes",
    "DIFFICULTY_BUCKETS", "Difficulty", "EmptyPoolError", "GenerationResult", "PromptConfig",
    "SamplingPolicy", "Tag", "Task", "count_space", "generate", "is_abnormal", "sample_config",
    "AnalysisReport", "PromptWriter", "analyze_outputs", "append_config", "resume_scan",
]
