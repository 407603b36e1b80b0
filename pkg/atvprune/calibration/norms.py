"""
Channel activation norms restricted to the pooled calibration positions.
"""

import numpy as np
from numpy.typing import NDArray
from typing import Dict, Iterable, Sequence
from atvprune.context import raise_flag
from atvprune.numerics import column_sq_sums
from atvprune.errors import ValidationError
from atvprune.model import ForwardTrace, PRUNABLE_LAYERS
from .selection import CalibrationSelection

# Per prunable layer of a block: ||X_j||_2 over the pooled positions
ChannelNorms = Dict[str, NDArray[np.float64]]


def accumulate_norms(
    activations: Sequence[NDArray], selection: CalibrationSelection
) -> NDArray[np.float64]:
    """
    Column norms of one layer's input over the pooled positions of all samples.

    Squares are summed in float64, samples in dataset order and rows in
    ascending order, so the result is bit-reproducible.

    Args:
        activations: Input activation matrix of the layer, one per sample
        selection: Calibration positions of the same samples at this block

    Returns:
        Vector of length d_in; zeros plus an "empty-calibration" flag when no
        position is pooled
    """
    if len(activations) != len(selection.samples):
        raise ValidationError(
            "length-mismatch",
            f"{len(activations)} activation matrices for {len(selection.samples)} samples",
        )
    if not activations:
        raise ValidationError("length-mismatch", "no samples to accumulate")
    width = activations[0].shape[1]
    total = np.zeros(width, dtype=np.float64)
    for x, sample in zip(activations, selection.samples):
        if x.shape[1] != width:
            raise ValidationError("dimension-mismatch", "activation widths differ across samples")
        if sample.positions.size:
            total += column_sq_sums(x, sample.positions)
    if selection.total_positions == 0:
        raise_flag("empty-calibration", f"block {selection.block}")
    return np.sqrt(total)


def block_norms(
    traces: Sequence[ForwardTrace],
    selection: CalibrationSelection,
    layers: Iterable[str] = PRUNABLE_LAYERS,
) -> ChannelNorms:
    """Pooled channel norms of every prunable layer of a block."""
    block = selection.block
    return {
        name: accumulate_norms(
            [trace.block(block).activations[name] for trace in traces], selection
        )
        for name in layers
    }
