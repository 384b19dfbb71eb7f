"""Online pairwise leaderboard for text-to-image models."""

from .evaluators import (
    Dimension,
    PairwiseOutcome,
    ScoreSampleSet,
    aesthetic_compare,
    order_swap_aggregate,
    perceptual_compare,
    perceptual_probability,
)
from .rating import (
    MacroOutcome,
    MacroVerdict,
    MicroBatchResult,
    RatingHyperParams,
    RatingState,
    aggregate_micro_batch,
    apply_batch,
    conservative_score,
    decisive_update,
    effective_eta,
    tie_update,
    Verdict,
)
from .scheduler import ArenaState, Mode, RoundAborted, SchedulingError, inject, leaderboard, run_round, schedule

__version__ = "0.1.0"
