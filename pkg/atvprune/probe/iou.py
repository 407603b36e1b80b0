"""
Overlap between pruning masks.
"""

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field
from typing import Dict, List, Mapping
from atvprune.context import raise_flag
from atvprune.errors import ValidationError

HISTOGRAM_BINS = 10


def mask_iou(mask_a: NDArray[np.bool_], mask_b: NDArray[np.bool_]) -> float:
    """
    Intersection over union of the kept coordinates of two masks.

    Two all-pruned masks are identical empty sets: IoU 1.0, flagged
    "iou-empty-masks".
    """
    mask_a = np.asarray(mask_a, dtype=bool)
    mask_b = np.asarray(mask_b, dtype=bool)
    if mask_a.shape != mask_b.shape:
        raise ValidationError("mask-mismatch", f"{mask_a.shape} vs {mask_b.shape}")
    union = int(np.count_nonzero(mask_a | mask_b))
    if union == 0:
        raise_flag("iou-empty-masks")
        return 1.0
    return int(np.count_nonzero(mask_a & mask_b)) / union


class MaskIoUStats(BaseModel):
    """Per-layer IoU between two mask sets plus a summary."""

    layers: Dict[str, float]
    min: float = Field(ge=0.0, le=1.0)
    mean: float = Field(ge=0.0, le=1.0)
    max: float = Field(ge=0.0, le=1.0)
    # Counts over equal bins of [0, 1]
    histogram: List[int]

    @classmethod
    def from_values(cls, layers: Dict[str, float]) -> "MaskIoUStats":
        if not layers:
            raise ValidationError("mask-mismatch", "no layers to compare")
        values = np.array(list(layers.values()), dtype=np.float64)
        counts, _ = np.histogram(values, bins=HISTOGRAM_BINS, range=(0.0, 1.0))
        return cls(
            layers=layers,
            min=float(values.min()),
            mean=float(values.mean()),
            max=float(values.max()),
            histogram=[int(c) for c in counts],
        )


def mask_iou_stats(
    masks_a: Mapping[str, NDArray[np.bool_]], masks_b: Mapping[str, NDArray[np.bool_]]
) -> MaskIoUStats:
    """IoU of every layer present in both mask sets, in the order of the first."""
    if set(masks_a) != set(masks_b):
        raise ValidationError("mask-mismatch", "mask sets cover different layers")
    return MaskIoUStats.from_values(
        {name: mask_iou(masks_a[name], masks_b[name]) for name in masks_a}
    )
