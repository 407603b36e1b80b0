"""
Per-token visual saliency signals computed from a block's forward trace.
"""

import numpy as np
from enum import Enum
from numpy.typing import NDArray
from dataclasses import dataclass
from typing import Optional
from atvprune.errors import ValidationError
from atvprune.model import ForwardTrace, TokenSequence
from atvprune.numerics import rowwise_cosine_distance, pairwise_cosine_distance


class SaliencySignal(str, Enum):
    """Which score ranks visual tokens for calibration."""

    # 1 - cos(block input, block output)
    DRIFT = "drift"
    # Mean attention received from text queries
    ABS_ATTENTION = "abs"
    # Mean cosine distance to the other visual tokens, max-min selection
    DBS_DIVERSITY = "dbs"
    # Seeded uniform selection; budgets still follow drift
    RANDOM = "random"


@dataclass(eq=False)
class TokenScores:
    """Scores of one sample at one block, aligned with ``positions``."""

    positions: NDArray[np.int64]
    scores: NDArray[np.float64]

    def __len__(self) -> int:
        return int(self.positions.size)

    def as_dict(self) -> dict:
        return {int(p): float(s) for p, s in zip(self.positions, self.scores)}


def drift_scores(
    trace: ForwardTrace,
    seq: TokenSequence,
    block: int,
    positions: Optional[NDArray[np.int64]] = None,
) -> TokenScores:
    """
    Visual drift ``1 - cos(X_in, X_out)`` of each token at a block.

    Args:
        trace: Trace with block_input/block_output captured
        seq: The sample the trace belongs to
        block: Block index
        positions: Token positions to score; the visual positions by default

    Returns:
        Scores in [0, 2] at the requested positions
    """
    block_trace = trace.block(block)
    if block_trace.block_input is None or block_trace.block_output is None:
        raise ValidationError("missing-capture", "drift needs block input and output")
    if positions is None:
        positions = seq.visual_positions
    scores = rowwise_cosine_distance(
        block_trace.block_input[positions], block_trace.block_output[positions]
    )
    return TokenScores(positions=positions, scores=scores)


def abs_scores(trace: ForwardTrace, seq: TokenSequence, block: int) -> TokenScores:
    """
    Attention-based saliency: attention each visual token receives from text queries.

    ``s_v`` is the mean over heads and over every text query position of the
    raw post-softmax weight ``A[t -> v]``; under causal masking queries that
    precede ``v`` contribute 0.

    Raises:
        ValidationError: "abs-requires-text" when the sample has no text token
    """
    block_trace = trace.block(block)
    if block_trace.attention is None:
        raise ValidationError("missing-capture", "ABS needs attention weights")
    text = seq.text_positions
    visual = seq.visual_positions
    if text.size == 0:
        raise ValidationError("abs-requires-text", f"sample {seq.id} has no text query")
    attention = block_trace.attention.astype(np.float64)
    received = attention[:, text][:, :, visual]
    return TokenScores(positions=visual, scores=received.mean(axis=(0, 1)))


def dbs_scores(seq: TokenSequence, trace: ForwardTrace, block: int) -> TokenScores:
    """
    Diversity-based saliency: mean cosine distance of a visual token to the
    other visual tokens of the sample, on block-input representations.

    A sample with a single visual token scores 0.
    """
    block_trace = trace.block(block)
    if block_trace.block_input is None:
        raise ValidationError("missing-capture", "DBS needs the block input")
    visual = seq.visual_positions
    if visual.size < 2:
        return TokenScores(positions=visual, scores=np.zeros(visual.size))
    distances = pairwise_cosine_distance(block_trace.block_input[visual])
    scores = distances.sum(axis=1) / (visual.size - 1)
    return TokenScores(positions=visual, scores=scores)


def signal_scores(
    signal: SaliencySignal, trace: ForwardTrace, seq: TokenSequence, block: int
) -> TokenScores:
    """Dispatch to the scoring function of a signal."""
    signal = SaliencySignal(signal)
    if signal is SaliencySignal.ABS_ATTENTION:
        return abs_scores(trace, seq, block)
    if signal is SaliencySignal.DBS_DIVERSITY:
        return dbs_scores(seq, trace, block)
    return drift_scores(trace, seq, block)
