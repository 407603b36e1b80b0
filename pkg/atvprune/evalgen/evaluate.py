"""
Reconstruction error of a pruned model against its dense original.
"""

import numpy as np
from dataclasses import dataclass, field
from typing import Any, Dict, List, Protocol, Sequence
from atvprune.context import raise_flag
from atvprune.errors import ValidationError
from atvprune.numerics import DEGENERATE_NORM
from atvprune.model import CaptureFlags, ForwardTrace, TokenSequence

CAPTURE_HIDDEN = CaptureFlags(hidden=True, activations=False, attention=False)


class Backbone(Protocol):
    """Anything that runs a sequence: the shared or the decoupled model."""

    def forward(self, seq: TokenSequence, capture: CaptureFlags = ..., causal: bool = ...) -> ForwardTrace:
        ...


@dataclass
class EvalResult:
    """Relative Frobenius output errors on held-out data."""

    # Final-output error over text / visual / all positions
    error_text: float
    error_visual: float
    error_all: float
    # Block-output error over all positions, one per block
    layer_errors: List[float] = field(default_factory=list)
    n_samples: int = 0

    @property
    def retention(self) -> float:
        """1 - relative error, clamped to [0, 1]."""
        return 1.0 - min(1.0, max(0.0, self.error_all))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error_text": self.error_text,
            "error_visual": self.error_visual,
            "error_all": self.error_all,
            "retention": self.retention,
            "layer_errors": list(self.layer_errors),
            "n_samples": self.n_samples,
        }


class _ErrorSum:
    """Running ||Y_dense - Y_pruned||^2 and ||Y_dense||^2 in float64."""

    def __init__(self):
        self.diff = 0.0
        self.ref = 0.0

    def add(self, dense: np.ndarray, pruned: np.ndarray) -> None:
        dense = dense.astype(np.float64)
        delta = dense - pruned.astype(np.float64)
        self.diff += float(np.sum(delta * delta))
        self.ref += float(np.sum(dense * dense))

    def relative(self) -> float:
        if self.diff == 0.0:
            return 0.0
        if np.sqrt(self.ref) < DEGENERATE_NORM:
            raise_flag("zero-reference", "dense output is zero, reporting absolute error")
            return float(np.sqrt(self.diff))
        return float(np.sqrt(self.diff / self.ref))


def evaluate(
    dense: Backbone, pruned: Backbone, heldout: Sequence[TokenSequence]
) -> EvalResult:
    """
    Compare a pruned model with its dense original on held-out samples.

    Args:
        dense: Reference model
        pruned: Pruned model with the same config
        heldout: Samples; position classes come from their modality labels

    Returns:
        EvalResult; all errors are exactly 0 when both models agree bitwise
    """
    if dense.config.to_dict() != pruned.config.to_dict():
        raise ValidationError("config", "dense and pruned models differ in shape")
    if not heldout:
        raise ValidationError("empty-dataset", "no held-out samples to evaluate")

    text, visual, full = _ErrorSum(), _ErrorSum(), _ErrorSum()
    blocks = [_ErrorSum() for _ in range(dense.config.n_blocks)]
    for seq in heldout:
        ref = dense.forward(seq, CAPTURE_HIDDEN)
        out = pruned.forward(seq, CAPTURE_HIDDEN)
        text.add(ref.output[seq.is_text], out.output[seq.is_text])
        visual.add(ref.output[~seq.is_text], out.output[~seq.is_text])
        full.add(ref.output, out.output)
        for acc, a, b in zip(blocks, ref.blocks, out.blocks):
            acc.add(a.block_output, b.block_output)

    return EvalResult(
        error_text=text.relative(),
        error_visual=visual.relative(),
        error_all=full.relative(),
        layer_errors=[acc.relative() for acc in blocks],
        n_samples=len(heldout),
    )
