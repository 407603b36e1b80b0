"""
Sparsity patterns and comparison groups.
"""

import re
import math
from enum import Enum
from dataclasses import dataclass
from typing import Any, Dict, Optional
from atvprune.errors import ValidationError


class ComparisonGroup(str, Enum):
    """Set of weights ranked against each other for unstructured pruning."""

    PER_LAYER = "per_layer"
    PER_OUTPUT_ROW = "per_output_row"


class Propagation(str, Enum):
    """Which hidden states feed the next block during calibration."""

    # Outputs of the already pruned blocks
    SEQUENTIAL = "sequential"
    # Outputs of the dense model
    DENSE = "dense"


@dataclass(frozen=True)
class SparsityPattern:
    """Unstructured sparsity ``rho`` or semi-structured N:M sparsity."""

    kind: str
    rho: Optional[float] = None
    n: Optional[int] = None
    m: Optional[int] = None

    def __post_init__(self):
        if self.kind == "unstructured":
            if self.rho is None or not math.isfinite(self.rho) or not 0.0 <= self.rho <= 1.0:
                raise ValidationError("config", f"sparsity must be in [0, 1], got {self.rho}")
        elif self.kind == "semi_structured":
            if self.n is None or self.m is None or not 1 <= self.n < self.m:
                raise ValidationError("config", f"N:M needs 1 <= N < M, got {self.n}:{self.m}")
        else:
            raise ValidationError("config", f"unknown sparsity pattern {self.kind!r}")

    @classmethod
    def unstructured(cls, rho: float) -> "SparsityPattern":
        return cls(kind="unstructured", rho=float(rho))

    @classmethod
    def nm(cls, n: int, m: int) -> "SparsityPattern":
        return cls(kind="semi_structured", n=int(n), m=int(m))

    @classmethod
    def parse(cls, text: str) -> "SparsityPattern":
        """Parse ``"N:M"``."""
        match = re.fullmatch(r"\s*(\d+)\s*:\s*(\d+)\s*", text)
        if not match:
            raise ValidationError("config", f"pattern must look like N:M, got {text!r}")
        return cls.nm(int(match.group(1)), int(match.group(2)))

    @classmethod
    def from_target(cls, text: Any) -> "SparsityPattern":
        """Parse a sparsity ratio such as ``"0.5"`` or an ``"N:M"`` pattern."""
        if ":" in str(text):
            return cls.parse(str(text))
        try:
            rho = float(text)
        except (TypeError, ValueError) as e:
            raise ValidationError("config", f"target must be a ratio or N:M, got {text!r}") from e
        return cls.unstructured(rho)

    @property
    def is_nm(self) -> bool:
        return self.kind == "semi_structured"

    @property
    def target_sparsity(self) -> float:
        return 1.0 - self.n / self.m if self.is_nm else self.rho

    def to_dict(self) -> Dict[str, Any]:
        if self.is_nm:
            return {"kind": self.kind, "n": self.n, "m": self.m}
        return {"kind": self.kind, "rho": self.rho}

    def __str__(self) -> str:
        return f"{self.n}:{self.m}" if self.is_nm else f"rho={self.rho}"
