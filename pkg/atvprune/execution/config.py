"""
Run configuration shared by every CLI command.
"""

import os
from dotenv import load_dotenv
from typing import Any, Dict, Optional
from dataclasses import asdict, dataclass, fields, replace
from atvprune.constants import DEFAULT_ALPHA, THREADS_ENV
from atvprune.errors import ValidationError
from atvprune.saliency import SaliencySignal
from atvprune.calibration import PoolKind, PoolPolicy
from atvprune.pruner import ComparisonGroup, Propagation, SparsityPattern


@dataclass
class RunConfig:
    """
    Dataclass to represent the options of a pruning or analysis run.
    Exactly one of ``sparsity`` and ``pattern`` is set.
    """

    alpha: float = DEFAULT_ALPHA
    sparsity: Optional[float] = 0.5
    # Semi-structured pattern "N:M"; excludes sparsity
    pattern: Optional[str] = None
    signal: str = SaliencySignal.DRIFT.value
    policy: str = PoolKind.ATV.value
    comparison_group: str = ComparisonGroup.PER_OUTPUT_ROW.value
    propagation: str = Propagation.SEQUENTIAL.value
    text_keep_ratio: float = 1.0
    seed: Optional[int] = None
    threads: int = 1

    def __post_init__(self):
        if self.pattern is not None and self.sparsity is not None:
            raise ValidationError("config", "an N:M pattern excludes a sparsity ratio")
        if self.pattern is None and self.sparsity is None:
            raise ValidationError("config", "either sparsity or pattern is required")
        try:
            SaliencySignal(self.signal)
            PoolKind(self.policy)
            ComparisonGroup(self.comparison_group)
            Propagation(self.propagation)
        except ValueError as e:
            raise ValidationError("config", str(e)) from e
        if self.signal == SaliencySignal.RANDOM.value and self.seed is None:
            raise ValidationError("config", "the random signal requires a seed")
        if int(self.threads) < 1:
            raise ValidationError("config", "threads must be >= 1")
        # Surface pattern and policy errors at construction time
        self.sparsity_pattern()
        self.pool_policy()

    def sparsity_pattern(self) -> SparsityPattern:
        if self.pattern is not None:
            return SparsityPattern.parse(self.pattern)
        return SparsityPattern.unstructured(float(self.sparsity))

    def pool_policy(self) -> PoolPolicy:
        kind = PoolKind(self.policy)
        if kind is PoolKind.ATV:
            return PoolPolicy.atv(
                alpha=float(self.alpha),
                signal=SaliencySignal(self.signal),
                text_keep_ratio=float(self.text_keep_ratio),
            )
        return PoolPolicy(kind=kind, text_keep_ratio=float(self.text_keep_ratio))

    def effective_threads(self) -> int:
        """Worker threads after the ATV_THREADS cap."""
        cap = os.getenv(THREADS_ENV)
        threads = int(self.threads)
        if cap:
            try:
                threads = min(threads, max(1, int(cap)))
            except ValueError as e:
                raise ValidationError("config", f"{THREADS_ENV} must be an integer") from e
        return threads

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary for serialization."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """Create configuration from dictionary, e.g. a config.yaml section."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError("config", f"unknown configuration keys {unknown}")
        return cls(**data)

    @classmethod
    def from_env(cls) -> "RunConfig":
        """Create configuration from environment variables."""
        load_dotenv()

        alpha = os.getenv("ATV_ALPHA")
        sparsity = os.getenv("ATV_SPARSITY")
        pattern = os.getenv("ATV_PATTERN")
        seed = os.getenv("ATV_SEED")
        threads = os.getenv(THREADS_ENV)

        return cls(
            alpha=float(alpha) if alpha else DEFAULT_ALPHA,
            sparsity=None if pattern else (float(sparsity) if sparsity else 0.5),
            pattern=pattern or None,
            seed=int(seed) if seed else None,
            threads=int(threads) if threads else 1,
        )
