"""
Which token positions feed the activation statistics.
"""

import math
from enum import Enum
from dataclasses import dataclass, field
from atvprune.errors import ValidationError
from atvprune.saliency import BudgetRule, SaliencySignal


class PoolKind(str, Enum):
    """Calibration pool construction."""

    # Every token of the sequence (modality-agnostic Wanda)
    MIXED_ALL = "mixed_all"
    # Text positions only
    TEXT_ONLY = "text_only"
    # Visual positions only
    VISUAL_ONLY = "visual_only"
    # Text tokens plus a block-adaptive subset of salient visual tokens
    ATV = "atv"


@dataclass(frozen=True)
class PoolPolicy:
    """Calibration pool policy."""

    kind: PoolKind = PoolKind.ATV
    # Visual saliency signal, ATV only
    signal: SaliencySignal = SaliencySignal.DRIFT
    # Visual budget rule, ATV only
    budget: BudgetRule = field(default_factory=BudgetRule)
    # Fraction of text tokens kept, ranked by drift; ATV only
    text_keep_ratio: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PoolKind(self.kind))
        object.__setattr__(self, "signal", SaliencySignal(self.signal))
        if not math.isfinite(self.text_keep_ratio) or not 0.0 <= self.text_keep_ratio <= 1.0:
            raise ValidationError(
                "config", f"text_keep_ratio must be in [0, 1], got {self.text_keep_ratio}"
            )
        if self.kind is not PoolKind.ATV and self.text_keep_ratio != 1.0:
            raise ValidationError("config", "text_keep_ratio only applies to the atv policy")

    @property
    def needs_saliency(self) -> bool:
        return self.kind is PoolKind.ATV

    @classmethod
    def atv(
        cls,
        alpha: float = 1.0,
        signal: SaliencySignal = SaliencySignal.DRIFT,
        text_keep_ratio: float = 1.0,
    ) -> "PoolPolicy":
        return cls(
            kind=PoolKind.ATV,
            signal=signal,
            budget=BudgetRule(alpha=alpha),
            text_keep_ratio=text_keep_ratio,
        )

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "signal": self.signal.value,
            "alpha": self.budget.alpha,
            "adaptive": self.budget.adaptive,
            "fixed_k": self.budget.fixed_k,
            "text_keep_ratio": self.text_keep_ratio,
        }


def kept_text_count(ratio: float, n_text: int) -> int:
    """Text tokens retained for a ratio; any positive ratio keeps at least one."""
    return min(n_text, math.ceil(ratio * n_text))
