from .active_ranking import ActiveRanking
from .base import PairwiseRater, UnknownModelError, batch_score
from .elo import Elo
from .glicko2 import Glicko2
from .ksort import KSortArena
from .rank_centrality import RankCentrality, RankCentralityResult, rank_centrality
from .rucb import RUCB
from .trueskill import TrueSkill, TrueSkill2

REGISTRY = {
    cls.name: cls
    for cls in (Elo, TrueSkill, TrueSkill2, Glicko2, RankCentrality, KSortArena, ActiveRanking, RUCB)
}


def make_rater(name: str, seed: int = 0, **params) -> PairwiseRater:
    try:
        cls = REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown rater {name!r}; choose from {sorted(REGISTRY)}") from None
    return cls(seed=seed, **params)


__all__ = [
    "ActiveRanking", "Elo", "Glicko2", "KSortArena", "PairwiseRater", "RUCB", "RankCentrality",
    "RankCentralityResult", "TrueSkill", "TrueSkill2", "UnknownModelError", "REGISTRY",
    "batch_score", "make_rater", "rank_centrality",
]
