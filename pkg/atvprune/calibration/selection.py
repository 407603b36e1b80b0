"""
Construction of the per-sample calibration positions at one block.
"""

import numpy as np
from numpy.typing import NDArray
from dataclasses import dataclass
from typing import List, Optional, Sequence
from atvprune.numerics import Rng
from atvprune.errors import ValidationError
from atvprune.model import ForwardTrace, TokenSequence
from .policy import PoolKind, PoolPolicy, kept_text_count
from atvprune.saliency import (
    BlockSaliency,
    SaliencySignal,
    TokenScores,
    budget,
    drift_scores,
    select_maxmin,
    select_random,
    select_topk,
)


@dataclass(eq=False)
class SampleSelection:
    """Calibration positions of one sample at one block plus audit counts."""

    sample_id: str
    positions: NDArray[np.int64]
    n_text: int
    n_visual: int
    n_text_kept: int
    n_visual_selected: int
    # Visual budget, -1 when the policy has no budget
    k: int

    def audit(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "n_text": self.n_text,
            "n_visual": self.n_visual,
            "n_text_kept": self.n_text_kept,
            "n_visual_selected": self.n_visual_selected,
            "k": self.k,
        }


@dataclass(eq=False)
class CalibrationSelection:
    """Calibration positions of every sample at one block."""

    block: int
    samples: List[SampleSelection]

    @property
    def total_positions(self) -> int:
        return sum(int(s.positions.size) for s in self.samples)

    @property
    def total_visual_selected(self) -> int:
        return sum(s.n_visual_selected for s in self.samples)

    def budgets(self) -> List[int]:
        return [s.k for s in self.samples]


def _select_text(
    policy: PoolPolicy, trace: ForwardTrace, seq: TokenSequence, block: int
) -> NDArray[np.int64]:
    text = seq.text_positions
    if policy.text_keep_ratio >= 1.0:
        return text
    keep = kept_text_count(policy.text_keep_ratio, text.size)
    return select_topk(drift_scores(trace, seq, block, positions=text), keep)


def _select_visual(
    policy: PoolPolicy,
    trace: ForwardTrace,
    seq: TokenSequence,
    scores: TokenScores,
    k: int,
    block: int,
    rng: Optional[Rng],
) -> NDArray[np.int64]:
    if policy.signal is SaliencySignal.DBS_DIVERSITY:
        visual = seq.visual_positions
        reps = trace.block(block).block_input[visual]
        return select_maxmin(reps, visual, k, start_scores=scores.scores)
    if policy.signal is SaliencySignal.RANDOM:
        if rng is None:
            raise ValidationError("config", "the random signal requires a seed")
        return select_random(rng.spawn(seq.id, block), seq.visual_positions, k)
    return select_topk(scores, k)


def build_selection(
    policy: PoolPolicy,
    traces: Sequence[ForwardTrace],
    sequences: Sequence[TokenSequence],
    saliency: Optional[BlockSaliency],
    block: int,
    rng: Optional[Rng] = None,
) -> CalibrationSelection:
    """
    Build the calibration positions of every sample at a block.

    Args:
        policy: Pool policy
        traces: Forward traces, one per sample, covering the block
        sequences: The samples, in dataset order
        saliency: Visual saliency of the block; required for the atv policy
        block: Block index
        rng: Seeded generator; required for the random signal

    Returns:
        CalibrationSelection with ascending positions per sample
    """
    if len(traces) != len(sequences):
        raise ValidationError("length-mismatch", "one trace per sample is required")
    if policy.needs_saliency and saliency is None:
        raise ValidationError("missing-saliency", f"atv policy at block {block} needs saliency")

    samples = []
    for index, (trace, seq) in enumerate(zip(traces, sequences)):
        text = seq.text_positions
        visual = seq.visual_positions
        k = -1
        if policy.kind is PoolKind.MIXED_ALL:
            kept_text, chosen = text, visual
        elif policy.kind is PoolKind.TEXT_ONLY:
            kept_text, chosen = text, visual[:0]
        elif policy.kind is PoolKind.VISUAL_ONLY:
            kept_text, chosen = text[:0], visual
        else:
            k = budget(policy.budget, saliency.mean, seq.n_text)
            kept_text = _select_text(policy, trace, seq, block)
            chosen = _select_visual(
                policy, trace, seq, saliency.samples[index], k, block, rng
            )
        positions = np.union1d(kept_text, chosen).astype(np.int64)
        samples.append(
            SampleSelection(
                sample_id=seq.id,
                positions=positions,
                n_text=int(text.size),
                n_visual=int(visual.size),
                n_text_kept=int(kept_text.size),
                n_visual_selected=int(chosen.size),
                k=k,
            )
        )
    return CalibrationSelection(block=block, samples=samples)
