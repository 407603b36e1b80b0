"""
Modality-decoupled probe: replicate QKV/FFN weights into textual and visual
pathways, prune one pathway under a chosen pool and compare masks.
"""

from .iou import HISTOGRAM_BINS, MaskIoUStats, mask_iou, mask_iou_stats
from .pathway import PROBE_POOLS, prune_pathway
from .grid import PROBE_SPARSITIES, GridCell, IoUSummary, ProbeResult, sensitivity_grid
from .decoupled import (
    PATHWAY_LAYERS,
    DecoupledBlock,
    DecoupledModel,
    PathwayTarget,
    PathwayWeights,
    decouple,
    forward_decoupled,
    forward_decoupled_block,
    pathway_activations,
)

__all__ = [
    "HISTOGRAM_BINS",
    "MaskIoUStats",
    "mask_iou",
    "mask_iou_stats",
    "PROBE_POOLS",
    "prune_pathway",
    "PROBE_SPARSITIES",
    "GridCell",
    "IoUSummary",
    "ProbeResult",
    "sensitivity_grid",
    "PATHWAY_LAYERS",
    "DecoupledBlock",
    "DecoupledModel",
    "PathwayTarget",
    "PathwayWeights",
    "decouple",
    "forward_decoupled",
    "forward_decoupled_block",
    "pathway_activations",
]
