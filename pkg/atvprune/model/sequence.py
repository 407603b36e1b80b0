"""
Calibration and evaluation samples: embeddings plus per-token modality labels.
"""

import numpy as np
from numpy.typing import NDArray
from dataclasses import dataclass, field
from typing import Sequence, Tuple
from atvprune.errors import ValidationError
from atvprune.numerics import DenseMatrix, as_dense

TEXT = "text"
VISUAL = "visual"
MODALITIES = (TEXT, VISUAL)


@dataclass(frozen=True, eq=False)
class TokenSequence:
    """One sample: token embeddings and the modality of every token."""

    # Sample identifier, used to key per-sample randomness
    id: str
    # Embeddings, n_tokens x d_model
    embeddings: DenseMatrix
    # Modality label of every token, "text" or "visual"
    modality: Tuple[str, ...]
    is_text: NDArray[np.bool_] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        embeddings = as_dense(self.embeddings, name=f"embeddings of {self.id}")
        modality = tuple(self.modality)
        if len(modality) != embeddings.shape[0]:
            raise ValidationError(
                "length-mismatch",
                f"sample {self.id}: {len(modality)} labels for {embeddings.shape[0]} tokens",
            )
        unknown = sorted(set(modality) - set(MODALITIES))
        if unknown:
            raise ValidationError(
                "modality", f"sample {self.id}: unknown modality labels {unknown}"
            )
        if TEXT not in modality:
            raise ValidationError("no-text", f"sample {self.id} has no text token")
        object.__setattr__(self, "embeddings", embeddings)
        object.__setattr__(self, "modality", modality)
        object.__setattr__(
            self, "is_text", np.array([m == TEXT for m in modality], dtype=bool)
        )

    @classmethod
    def from_parts(
        cls, id: str, visual: np.ndarray, text: np.ndarray
    ) -> "TokenSequence":
        """Build a sample laid out as all visual tokens followed by all text tokens."""
        embeddings = np.concatenate([np.asarray(visual), np.asarray(text)], axis=0)
        modality: Sequence[str] = [VISUAL] * len(visual) + [TEXT] * len(text)
        return cls(id=id, embeddings=embeddings, modality=tuple(modality))

    @property
    def n_tokens(self) -> int:
        return self.embeddings.shape[0]

    @property
    def text_positions(self) -> NDArray[np.int64]:
        """Ascending positions of text tokens."""
        return np.flatnonzero(self.is_text).astype(np.int64)

    @property
    def visual_positions(self) -> NDArray[np.int64]:
        """Ascending positions of visual tokens."""
        return np.flatnonzero(~self.is_text).astype(np.int64)

    @property
    def n_text(self) -> int:
        return int(self.is_text.sum())

    @property
    def n_visual(self) -> int:
        return self.n_tokens - self.n_text
