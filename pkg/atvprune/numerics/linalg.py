"""
Dense linear algebra and vector metrics.

Matrices are 2-D ``numpy`` arrays stored as float32; every reduction is carried
out in float64 and, where it matters for reproducibility, in ascending index
order.
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray
from atvprune.context import raise_flag
from atvprune.errors import ValidationError
from typing import Iterable, Optional, Union

# Norms below this are treated as zero vectors.
DEGENERATE_NORM = 1e-12
# Default absolute/relative tolerance used by consistency checks.
TOLERANCE = 1e-6

DenseMatrix = NDArray[np.float32]
IndexSet = Union[Iterable[int], NDArray[np.integer]]


def as_dense(data: ArrayLike, name: str = "matrix") -> DenseMatrix:
    """
    Validate and convert data into a DenseMatrix.

    Args:
        data: Nested sequence or array with two dimensions
        name: Name used in error messages

    Returns:
        C-contiguous float32 array

    Raises:
        ValidationError: If the data is not 2-D or holds NaN/Inf
    """
    array = np.ascontiguousarray(data, dtype=np.float32)
    if array.ndim != 2:
        raise ValidationError(
            "dimension-mismatch", f"{name} must be 2-D, got shape {array.shape}"
        )
    if not np.all(np.isfinite(array)):
        raise ValidationError("non-finite", f"{name} contains NaN or Inf")
    return array


def matmul(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """
    Matrix product with float64 accumulation and float32 result.

    Raises:
        ValidationError: If ``a.cols != b.rows``
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValidationError(
            "dimension-mismatch", f"cannot multiply {a.shape} by {b.shape}"
        )
    product = np.matmul(a.astype(np.float64), b.astype(np.float64))
    return product.astype(np.float32)


def cosine_distance(u: ArrayLike, v: ArrayLike) -> float:
    """
    Cosine distance ``1 - u.v / (|u| |v|)`` in [0, 2].

    A vector with norm below DEGENERATE_NORM carries no direction: the
    distance is 0 and a "degenerate-vector" flag is raised.
    """
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ValidationError(
            "length-mismatch", f"vectors of length {u.size} and {v.size}"
        )
    norm_u = float(np.sqrt(np.dot(u, u)))
    norm_v = float(np.sqrt(np.dot(v, v)))
    if norm_u < DEGENERATE_NORM or norm_v < DEGENERATE_NORM:
        raise_flag("degenerate-vector")
        return 0.0
    cos = float(np.dot(u, v)) / (norm_u * norm_v)
    return float(min(2.0, max(0.0, 1.0 - cos)))


def rowwise_cosine_distance(a: NDArray, b: NDArray) -> NDArray[np.float64]:
    """
    Cosine distance between matching rows of two equally shaped matrices.

    Same semantics as :func:`cosine_distance` applied row by row.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError("dimension-mismatch", f"{a.shape} vs {b.shape}")
    if a.shape[0] == 0:
        return np.zeros(0, dtype=np.float64)
    norm_a = np.sqrt(np.einsum("ij,ij->i", a, a))
    norm_b = np.sqrt(np.einsum("ij,ij->i", b, b))
    degenerate = (norm_a < DEGENERATE_NORM) | (norm_b < DEGENERATE_NORM)
    if np.any(degenerate):
        raise_flag("degenerate-vector", f"{int(degenerate.sum())} rows")
    safe = np.where(degenerate, 1.0, norm_a * norm_b)
    cos = np.einsum("ij,ij->i", a, b) / safe
    distance = np.clip(1.0 - cos, 0.0, 2.0)
    distance[degenerate] = 0.0
    return distance


def pairwise_cosine_distance(x: NDArray) -> NDArray[np.float64]:
    """
    Matrix of cosine distances between all rows of ``x``.

    Degenerate rows are at distance 0 from everything.
    """
    x = np.asarray(x, dtype=np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", x, x))
    degenerate = norms < DEGENERATE_NORM
    if np.any(degenerate):
        raise_flag("degenerate-vector", f"{int(degenerate.sum())} rows")
    unit = x / np.where(degenerate, 1.0, norms)[:, None]
    distance = np.clip(1.0 - unit @ unit.T, 0.0, 2.0)
    distance[degenerate, :] = 0.0
    distance[:, degenerate] = 0.0
    np.fill_diagonal(distance, 0.0)
    return distance


def _sorted_rows(x: NDArray, row_subset: Optional[IndexSet]) -> NDArray[np.int64]:
    if row_subset is None:
        return np.arange(x.shape[0], dtype=np.int64)
    if isinstance(row_subset, np.ndarray):
        rows = np.unique(row_subset.astype(np.int64))
    else:
        rows = np.unique(np.fromiter(row_subset, dtype=np.int64))
    if rows.size and (rows[0] < 0 or rows[-1] >= x.shape[0]):
        raise ValidationError(
            "index-out-of-range", f"row index outside [0, {x.shape[0]})"
        )
    return rows


def column_sq_sums(x: NDArray, row_subset: Optional[IndexSet] = None) -> NDArray[np.float64]:
    """
    Per-column sum of squares over the selected rows, in float64.

    Rows are visited in ascending order so results are bit-reproducible.
    """
    rows = _sorted_rows(x, row_subset)
    selected = np.asarray(x)[rows].astype(np.float64)
    if selected.shape[0] == 0:
        return np.zeros(x.shape[1], dtype=np.float64)
    return np.add.reduce(selected * selected, axis=0)


def column_l2_norms(x: NDArray, row_subset: Optional[IndexSet] = None) -> NDArray[np.float64]:
    """
    Euclidean norm of every column over a subset of rows.

    Args:
        x: Activation matrix (tokens x channels)
        row_subset: Token positions to include; all rows when None

    Returns:
        Vector of length ``x.cols``; zeros plus an "empty-calibration" flag when
        the subset is empty
    """
    rows = _sorted_rows(x, row_subset)
    if rows.size == 0:
        raise_flag("empty-calibration", "column_l2_norms on empty row subset")
        return np.zeros(x.shape[1], dtype=np.float64)
    return np.sqrt(column_sq_sums(x, rows))
