"""
Block-level aggregation of token saliency.
"""

import numpy as np
from dataclasses import dataclass, field
from typing import Dict, List, Sequence
from atvprune.context import raise_flag
from atvprune.errors import ValidationError
from atvprune.model import ForwardTrace, TokenSequence
from .signals import SaliencySignal, TokenScores, signal_scores


def block_mean_saliency(samples: Sequence[TokenScores]) -> float:
    """
    Arithmetic mean of all visual-token scores of a block across the batch.

    Returns 0.0 and raises a "no-visual-tokens" flag when the batch holds no
    visual token, which forces a zero budget.
    """
    sizes = [len(s) for s in samples]
    if sum(sizes) == 0:
        raise_flag("no-visual-tokens")
        return 0.0
    pooled = np.concatenate([s.scores for s in samples if len(s)])
    return float(np.mean(pooled))


@dataclass(eq=False)
class BlockSaliency:
    """Token scores of every sample at one block plus their mean."""

    block: int
    signal: SaliencySignal
    samples: List[TokenScores]
    mean: float


@dataclass(eq=False)
class SaliencyProfile:
    """Saliency of one signal across blocks."""

    signal: SaliencySignal
    blocks: Dict[int, BlockSaliency] = field(default_factory=dict)

    def __post_init__(self):
        self.signal = SaliencySignal(self.signal)

    def add(self, block: BlockSaliency) -> None:
        if block.signal is not self.signal:
            raise ValidationError("config", f"{block.signal.value} scores in a {self.signal.value} profile")
        self.blocks[block.block] = block

    def means(self) -> List[float]:
        """Block means in block order."""
        return [self.blocks[b].mean for b in sorted(self.blocks)]


def block_saliency(
    signal: SaliencySignal,
    traces: Sequence[ForwardTrace],
    sequences: Sequence[TokenSequence],
    block: int,
) -> BlockSaliency:
    """
    Score every sample at a block and aggregate the block mean.

    The random signal has no score of its own; its block mean (and so its
    budget) is the drift mean.
    """
    signal = SaliencySignal(signal)
    samples = [
        signal_scores(signal, trace, seq, block) for trace, seq in zip(traces, sequences)
    ]
    return BlockSaliency(
        block=block, signal=signal, samples=samples, mean=block_mean_saliency(samples)
    )
