"""
Visual-token budget per sample and block.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple
from atvprune.errors import ValidationError


@dataclass(frozen=True)
class BudgetRule:
    """
    How many visual tokens a sample may contribute at a block.

    Adaptive: ``K = floor(alpha * s_bar * n_text)``. Fixed: ``K = fixed_k``
    at every block, used to compare against an adaptive run with the same
    total token count.
    """

    alpha: float = 1.0
    adaptive: bool = True
    fixed_k: Optional[int] = None

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise ValidationError("config", f"alpha must be >= 0, got {self.alpha}")
        if not self.adaptive and (self.fixed_k is None or self.fixed_k < 0):
            raise ValidationError("config", "a fixed budget needs fixed_k >= 0")

    @classmethod
    def fixed(cls, k: int) -> "BudgetRule":
        return cls(alpha=0.0, adaptive=False, fixed_k=int(k))


def budget(rule: BudgetRule, s_bar: float, n_text: int) -> int:
    """
    Visual-token budget K for one sample at one block.

    Args:
        rule: Budget rule
        s_bar: Mean block saliency
        n_text: Number of text tokens of the sample

    Returns:
        Nonnegative token count
    """
    if n_text < 1:
        raise ValidationError("no-text", "budget needs at least one text token")
    if not rule.adaptive:
        return int(rule.fixed_k)
    return max(0, math.floor(rule.alpha * s_bar * n_text))


def matched_fixed_budget(total_selected: int, n_samples: int, n_blocks: int) -> Tuple[int, int]:
    """
    Constant per-block K whose batch total best matches an adaptive run.

    Args:
        total_selected: Visual tokens selected over all samples and blocks
        n_samples: Calibration samples
        n_blocks: Pruned blocks

    Returns:
        Tuple of (K, tokens left unmatched by the constant budget)
    """
    slots = n_samples * n_blocks
    if slots < 1:
        raise ValidationError("config", "need at least one sample and one block")
    k = total_selected // slots
    return k, total_selected - k * slots
