"""
Per-block visual saliency and budget statistics of a model on a dataset.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence
from atvprune.numerics import Rng
from atvprune.calibration import PoolPolicy, build_selection
from atvprune.saliency import SaliencyProfile, SaliencySignal, block_saliency
from atvprune.model import CAPTURE_ALL, TokenSequence, ToyTransformer


@dataclass
class DriftRow:
    block: int
    s_bar: float
    # Mean per-sample budget K
    mean_k: float
    # Visual tokens selected across all samples
    total_selected: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def drift_report(
    model: ToyTransformer,
    dataset: Sequence[TokenSequence],
    alpha: float = 1.0,
    signal: SaliencySignal = SaliencySignal.DRIFT,
    seed: Optional[int] = None,
) -> List[DriftRow]:
    """
    Block-wise saliency mean and adaptive budget on the dense model.

    Args:
        model: Dense model
        dataset: Calibration samples
        alpha: Budget coefficient
        signal: Saliency signal
        seed: Seed for the random signal

    Returns:
        One DriftRow per block
    """
    policy = PoolPolicy.atv(alpha=alpha, signal=signal)
    traces = [model.forward(seq, CAPTURE_ALL) for seq in dataset]
    rng = Rng(seed) if seed is not None else None
    profile = SaliencyProfile(policy.signal)
    rows = []
    for block in range(model.config.n_blocks):
        saliency = block_saliency(policy.signal, traces, dataset, block)
        profile.add(saliency)
        selection = build_selection(policy, traces, dataset, saliency, block, rng)
        budgets = selection.budgets()
        rows.append(
            DriftRow(
                block=block,
                s_bar=profile.blocks[block].mean,
                mean_k=sum(budgets) / len(budgets) if budgets else 0.0,
                total_selected=selection.total_visual_selected,
            )
        )
    return rows
