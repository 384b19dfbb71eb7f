from .environments import ENVIRONMENT_NAMES, EnvironmentSpec, get_environment, load_catalog
from .generator import NO_EFFECT, PromptEffect, TrialWorld, outcome_counts, sample_outcome
from .metrics import Localization, kendall, localize, spearman, summarize_discovery, topk_overlap
from .trial import ALL_SYSTEMS, SYSTEM_NAMES, MetricsReport, TrialSpec, make_system, run_trial
from .grid import PairedTest, ablation_tests, paired_test, run_grid, summarize, write_reports
