"""
Report models of a pruning run. The JSON schema of the report file is the
schema of :class:`PruneReport`.
"""

import numpy as np
from pydantic import BaseModel, Field
from typing import Any, Dict, List, Optional, Sequence

REPORT_VERSION = 1


class LayerSparsity(BaseModel):
    """Achieved sparsity of one prunable layer."""

    layer: str
    numel: int = Field(ge=0)
    pruned: int = Field(ge=0)
    sparsity: float = Field(ge=0.0, le=1.0)

    @classmethod
    def from_mask(cls, layer: str, mask: np.ndarray) -> "LayerSparsity":
        numel = int(mask.size)
        pruned = numel - int(np.count_nonzero(mask))
        return cls(
            layer=layer,
            numel=numel,
            pruned=pruned,
            sparsity=pruned / numel if numel else 0.0,
        )


class BudgetSummary(BaseModel):
    """Per-sample visual budgets of one block."""

    mean: float
    min: int
    max: int
    total: int

    @classmethod
    def from_budgets(cls, budgets: Sequence[int]) -> Optional["BudgetSummary"]:
        values = [k for k in budgets if k >= 0]
        if not values:
            return None
        return cls(
            mean=float(np.mean(values)),
            min=int(min(values)),
            max=int(max(values)),
            total=int(sum(values)),
        )


class BlockReport(BaseModel):
    """What happened at one block."""

    block: int = Field(ge=0)
    # Mean visual saliency; None for policies without saliency
    s_bar: Optional[float] = None
    budgets: List[int] = Field(default_factory=list)
    budget_summary: Optional[BudgetSummary] = None
    positions_total: int = Field(ge=0)
    text_kept_total: int = Field(ge=0)
    visual_selected_total: int = Field(ge=0)
    layers: List[LayerSparsity]


class PruneReport(BaseModel):
    """Full report of :func:`run_atv_pipeline`."""

    version: int = REPORT_VERSION
    config: Dict[str, Any]
    pattern: Dict[str, Any]
    comparison_group: str
    propagation: str
    n_samples: int = Field(ge=0)
    blocks: List[BlockReport]
    global_sparsity: float = Field(ge=0.0, le=1.0)
    flags: Dict[str, int] = Field(default_factory=dict)
    elapsed_seconds: float = Field(default=0.0, ge=0.0)

    def s_bar(self) -> List[Optional[float]]:
        return [b.s_bar for b in self.blocks]

    def layer_sparsity(self) -> Dict[str, float]:
        return {layer.layer: layer.sparsity for b in self.blocks for layer in b.layers}

    def total_visual_selected(self) -> int:
        return sum(b.visual_selected_total for b in self.blocks)
