"""
Configuration of the toy transformer backbone.
"""

from typing import Any, Dict
from dataclasses import asdict, dataclass
from atvprune.errors import ValidationError


@dataclass(frozen=True)
class ModelConfig:
    """
    Shape parameters of the toy backbone.
    """

    # Embedding width
    d_model: int
    # Number of transformer blocks
    n_blocks: int
    # Number of attention heads, must divide d_model
    n_heads: int
    # Hidden width of the feed-forward network
    d_ffn: int

    def __post_init__(self):
        for name in ("d_model", "n_blocks", "n_heads", "d_ffn"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValidationError("config", f"{name} must be an integer >= 1")
        if self.d_model % self.n_heads != 0:
            raise ValidationError(
                "config",
                f"d_model={self.d_model} is not divisible by n_heads={self.n_heads}",
            )

    @property
    def head_dim(self) -> int:
        """Width of one attention head."""
        return self.d_model // self.n_heads

    def to_dict(self) -> Dict[str, int]:
        """Convert to dictionary representation."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelConfig":
        """Create configuration from dictionary."""
        try:
            return cls(
                d_model=int(data["d_model"]),
                n_blocks=int(data["n_blocks"]),
                n_heads=int(data["n_heads"]),
                d_ffn=int(data["d_ffn"]),
            )
        except (KeyError, TypeError) as e:
            raise ValidationError("config", f"invalid model config: {e}") from e
