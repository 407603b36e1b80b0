"""
Pathway x pool sensitivity grid and mask-overlap analysis.
"""

from pydantic import BaseModel
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Sequence, Tuple
from atvprune.evalgen import evaluate
from atvprune.utils import log
from atvprune.constants import PROBE_SPARSITIES
from atvprune.calibration import PoolKind
from atvprune.model import TokenSequence, ToyTransformer
from atvprune.pruner import ComparisonGroup, Propagation, SparsityPattern
from .iou import MaskIoUStats, mask_iou_stats
from .pathway import PROBE_POOLS, prune_pathway
from .decoupled import DecoupledModel, PathwayTarget, decouple


@dataclass
class GridCell:
    """Held-out reconstruction quality of one pruned pathway."""

    sparsity: float
    pathway: str
    pool: str
    retention: float
    error_text: float
    error_visual: float
    error_all: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class IoUSummary(BaseModel):
    """Mask overlap between two pools on one pathway at one sparsity."""

    sparsity: float
    pathway: str
    pool_a: str
    pool_b: str
    stats: MaskIoUStats


@dataclass
class ProbeResult:
    cells: List[GridCell]
    iou: List[IoUSummary]

    def iou_rows(self) -> List[Dict[str, Any]]:
        """One row per (sparsity, pathway, layer)."""
        return [
            {
                "sparsity": summary.sparsity,
                "pathway": summary.pathway,
                "pool_a": summary.pool_a,
                "pool_b": summary.pool_b,
                "layer": layer,
                "iou": value,
            }
            for summary in self.iou
            for layer, value in summary.stats.layers.items()
        ]


def sensitivity_grid(
    model: ToyTransformer,
    calib: Sequence[TokenSequence],
    heldout: Sequence[TokenSequence],
    sparsities: Sequence[float] = PROBE_SPARSITIES,
    iou_pools: Tuple[PoolKind, PoolKind] = (PoolKind.TEXT_ONLY, PoolKind.VISUAL_ONLY),
    group: ComparisonGroup = ComparisonGroup.PER_OUTPUT_ROW,
    propagation: Propagation = Propagation.SEQUENTIAL,
    threads: int = 1,
) -> ProbeResult:
    """
    Prune each pathway under each pool and measure what it costs.

    Every cell starts from the same dense decoupled model. For every sparsity
    and pathway the masks of the two ``iou_pools`` are compared layer by layer.

    Args:
        model: Dense shared backbone
        calib: Calibration samples
        heldout: Evaluation samples
        sparsities: Unstructured sparsity levels
        iou_pools: Pools whose masks are compared
        group: Comparison group
        propagation: Propagation mode
        threads: Worker threads

    Returns:
        ProbeResult with 2 x 3 cells per sparsity and one IoU summary per
        sparsity and pathway
    """
    dense: DecoupledModel = decouple(model)
    pool_a, pool_b = (PoolKind(p) for p in iou_pools)
    cells: List[GridCell] = []
    summaries: List[IoUSummary] = []

    for rho in sparsities:
        pattern = SparsityPattern.unstructured(rho)
        for target in PathwayTarget:
            masks = {}
            for pool in PROBE_POOLS:
                pruned, masks[pool] = prune_pathway(
                    dense, target, pool, pattern, calib, group, propagation, threads
                )
                result = evaluate(dense, pruned, heldout)
                cells.append(
                    GridCell(
                        sparsity=rho,
                        pathway=target.value,
                        pool=pool.value,
                        retention=result.retention,
                        error_text=result.error_text,
                        error_visual=result.error_visual,
                        error_all=result.error_all,
                    )
                )
                log(
                    f"rho={rho} {target.value}/{pool.value}: retention {result.retention:.4f}",
                    level="DEBUG",
                )
            summaries.append(
                IoUSummary(
                    sparsity=rho,
                    pathway=target.value,
                    pool_a=pool_a.value,
                    pool_b=pool_b.value,
                    stats=mask_iou_stats(masks[pool_a], masks[pool_b]),
                )
            )
    return ProbeResult(cells=cells, iou=summaries)
