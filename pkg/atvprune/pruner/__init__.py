"""
Wanda importance, unstructured and N:M masks, and the pruning driver.
"""

from .pattern import ComparisonGroup, Propagation, SparsityPattern
from .wanda import wanda_scores, mask_unstructured, mask_nm, make_mask, pruned_count
from .report import BlockReport, BudgetSummary, LayerSparsity, PruneReport
from .pipeline import (
    BlockRunner,
    PruneOutcome,
    check_dataset,
    check_pattern,
    prune_block_layers,
    run_atv_pipeline,
)

__all__ = [
    "ComparisonGroup",
    "Propagation",
    "SparsityPattern",
    "wanda_scores",
    "mask_unstructured",
    "mask_nm",
    "make_mask",
    "pruned_count",
    "BlockReport",
    "BudgetSummary",
    "LayerSparsity",
    "PruneReport",
    "BlockRunner",
    "PruneOutcome",
    "check_dataset",
    "check_pattern",
    "prune_block_layers",
    "run_atv_pipeline",
]
