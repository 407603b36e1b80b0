"""
Dense linear algebra, vector metrics and deterministic randomness.
"""

from .rng import Rng
from .linalg import (
    DEGENERATE_NORM,
    TOLERANCE,
    DenseMatrix,
    as_dense,
    matmul,
    cosine_distance,
    rowwise_cosine_distance,
    pairwise_cosine_distance,
    column_sq_sums,
    column_l2_norms,
)

__all__ = [
    "Rng",
    "DEGENERATE_NORM",
    "TOLERANCE",
    "DenseMatrix",
    "as_dense",
    "matmul",
    "cosine_distance",
    "rowwise_cosine_distance",
    "pairwise_cosine_distance",
    "column_sq_sums",
    "column_l2_norms",
]
