"""
Activation-aware importance scores and mask generation.
"""

import math
import numpy as np
from numpy.typing import NDArray
from atvprune.errors import ValidationError
from .pattern import ComparisonGroup, SparsityPattern


def wanda_scores(weight: NDArray, norms: NDArray) -> NDArray[np.float64]:
    """
    Importance ``I_ij = |W_ij| * ||X_j||_2``.

    Args:
        weight: Weight matrix, d_out x d_in
        norms: Input-channel activation norms, length d_in

    Returns:
        Nonnegative float64 matrix congruent to ``weight``
    """
    norms = np.asarray(norms, dtype=np.float64)
    if norms.ndim != 1 or norms.size != weight.shape[1]:
        raise ValidationError(
            "length-mismatch",
            f"{norms.size} channel norms for a weight with {weight.shape[1]} inputs",
        )
    return np.abs(weight.astype(np.float64)) * norms[None, :]


def pruned_count(rho: float, group_size: int) -> int:
    """Weights pruned in a comparison group: ``floor(rho * group_size)``."""
    return min(group_size, math.floor(rho * group_size))


def mask_unstructured(
    scores: NDArray, rho: float, group: ComparisonGroup = ComparisonGroup.PER_OUTPUT_ROW
) -> NDArray[np.bool_]:
    """
    Prune the lowest-scoring fraction of every comparison group.

    Within a group exactly ``floor(rho * group_size)`` weights are pruned. Equal
    scores are pruned larger flat index first.

    Args:
        scores: Importance scores, d_out x d_in
        rho: Target sparsity in [0, 1]
        group: Rank per output row or across the whole layer

    Returns:
        Boolean mask, True = kept
    """
    if not 0.0 <= rho <= 1.0:
        raise ValidationError("config", f"sparsity must be in [0, 1], got {rho}")
    scores = np.asarray(scores, dtype=np.float64)
    if ComparisonGroup(group) is ComparisonGroup.PER_LAYER:
        flat = scores.reshape(1, -1)
    else:
        flat = scores
    size = flat.shape[1]
    k = pruned_count(rho, size)
    mask = np.ones(flat.shape, dtype=bool)
    if k > 0:
        index = np.broadcast_to(np.arange(size), flat.shape)
        order = np.lexsort((-index, flat), axis=-1)
        np.put_along_axis(mask, order[:, :k], False, axis=-1)
    return mask.reshape(scores.shape)


def mask_nm(scores: NDArray, n: int, m: int) -> NDArray[np.bool_]:
    """
    Keep the ``n`` highest scores in every group of ``m`` consecutive inputs.

    Groups run along the input dimension of each output row. Equal scores
    keep the smaller column first.

    Raises:
        ValidationError: "divisibility" when d_in is not a multiple of m
    """
    scores = np.asarray(scores, dtype=np.float64)
    rows, cols = scores.shape
    if cols % m != 0:
        raise ValidationError("divisibility", f"d_in={cols} is not divisible by M={m}")
    grouped = scores.reshape(rows, cols // m, m)
    index = np.broadcast_to(np.arange(m), grouped.shape)
    order = np.lexsort((index, -grouped), axis=-1)
    mask = np.zeros(grouped.shape, dtype=bool)
    np.put_along_axis(mask, order[..., :n], True, axis=-1)
    return mask.reshape(rows, cols)


def make_mask(
    scores: NDArray, pattern: SparsityPattern, group: ComparisonGroup
) -> NDArray[np.bool_]:
    """Mask for a layer under a sparsity pattern."""
    if pattern.is_nm:
        return mask_nm(scores, pattern.n, pattern.m)
    return mask_unstructured(scores, pattern.rho, group)
