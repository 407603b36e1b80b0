"""
Visual-token saliency, block-adaptive budgets and subset selection.
"""

from .budget import BudgetRule, budget, matched_fixed_budget
from .selection import select_topk, select_maxmin, select_random
from .profile import BlockSaliency, SaliencyProfile, block_mean_saliency, block_saliency
from .signals import (
    SaliencySignal,
    TokenScores,
    abs_scores,
    dbs_scores,
    drift_scores,
    signal_scores,
)

__all__ = [
    "BudgetRule",
    "budget",
    "matched_fixed_budget",
    "select_topk",
    "select_maxmin",
    "select_random",
    "BlockSaliency",
    "SaliencyProfile",
    "block_mean_saliency",
    "block_saliency",
    "SaliencySignal",
    "TokenScores",
    "abs_scores",
    "dbs_scores",
    "drift_scores",
    "signal_scores",
]
