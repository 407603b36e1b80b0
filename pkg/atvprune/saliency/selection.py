"""
Visual-token subset selection rules.
"""

import numpy as np
from numpy.typing import NDArray
from typing import Optional
from .signals import TokenScores
from atvprune.numerics import Rng, pairwise_cosine_distance

EMPTY = np.zeros(0, dtype=np.int64)


def select_topk(scores: TokenScores, k: int) -> NDArray[np.int64]:
    """
    The ``k`` highest-scoring positions, ascending.

    Ties go to the smaller token position; ``k >= len(scores)`` returns all.
    """
    if k <= 0 or len(scores) == 0:
        return EMPTY
    order = np.lexsort((scores.positions, -scores.scores))
    return np.sort(scores.positions[order[:k]])


def select_maxmin(
    reps: NDArray,
    positions: NDArray[np.int64],
    k: int,
    start_scores: Optional[NDArray[np.float64]] = None,
) -> NDArray[np.int64]:
    """
    Greedy farthest-point subset under cosine distance.

    Starts from the token with the highest diversity score, then repeatedly
    adds the token whose minimum distance to the chosen set is largest (ties:
    smaller position). This is the classic 2-approximation of the max-min
    dispersion objective for metric distances.

    Args:
        reps: Block-input representations of the candidate tokens, one row each
        positions: Token positions of the rows of ``reps``
        k: Subset size
        start_scores: Diversity scores of the rows; mean pairwise distance when None

    Returns:
        Selected positions, ascending
    """
    n = len(positions)
    if k <= 0 or n == 0:
        return EMPTY
    if k >= n:
        return np.sort(np.asarray(positions, dtype=np.int64))

    distances = pairwise_cosine_distance(reps)
    if start_scores is None:
        start_scores = distances.sum(axis=1) / max(n - 1, 1)
    chosen = [int(np.argmax(start_scores))]
    nearest = distances[chosen[0]].copy()
    nearest[chosen[0]] = -np.inf
    while len(chosen) < k:
        pick = int(np.argmax(nearest))
        chosen.append(pick)
        nearest = np.minimum(nearest, distances[pick])
        nearest[chosen] = -np.inf
    return np.sort(np.asarray(positions, dtype=np.int64)[chosen])


def select_random(rng: Rng, positions: NDArray[np.int64], k: int) -> NDArray[np.int64]:
    """Uniform k-subset of the positions without replacement."""
    positions = np.asarray(positions, dtype=np.int64)
    picks = rng.sample_without_replacement(len(positions), k)
    return np.sort(positions[picks])
