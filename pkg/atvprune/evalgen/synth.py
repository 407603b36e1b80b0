"""
Synthetic bimodal calibration data.

Text tokens follow N(mu_t, sigma^2 I) and visual tokens N(mu_v, sigma^2 I).
The two means are orthogonal vectors of equal length placed so that
``||mu_t - mu_v|| == separation``. Each sample is laid out visual tokens
first, then text tokens.

With ``visual_channels`` set, visual tokens (mean and noise) are confined to
the leading channels and :func:`generate_model` gives those channels a block
of weights of their own, so the visual stream stays on them in every block.
"""

import math
import numpy as np
from numpy.typing import NDArray
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, NamedTuple, Sequence, Tuple
from atvprune.numerics import Rng
from atvprune.errors import ValidationError
from atvprune.constants import CALIBRATION_SIZE
from atvprune.model import ModelConfig, TokenSequence, ToyTransformer, apply_masks, layer_key

CALIB_FRACTION = 0.8


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic dataset."""

    seed: int = 0
    n_samples: int = CALIBRATION_SIZE
    n_visual: int = 48
    n_text: int = 16
    d_model: int = 32
    # Distance between the two modality means
    separation: float = 10.0
    sigma: float = 1.0
    # Leading channels that carry visual tokens; 0 spreads them over all channels
    visual_channels: int = 0

    def __post_init__(self):
        for name in ("n_samples", "n_visual", "n_text", "d_model"):
            if getattr(self, name) < 1:
                raise ValidationError("config", f"{name} must be >= 1")
        if not 0 <= self.visual_channels < self.d_model:
            raise ValidationError("config", "visual_channels must lie in [0, d_model)")
        if not math.isfinite(self.separation) or self.separation < 0:
            raise ValidationError("config", "separation must be a finite value >= 0")
        if not math.isfinite(self.sigma) or self.sigma <= 0:
            raise ValidationError("config", "sigma must be > 0")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class SynthDataset(NamedTuple):
    calib: List[TokenSequence]
    heldout: List[TokenSequence]


def modality_means(spec: SynthSpec) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """The text and visual means of a spec."""
    rng = Rng(spec.seed).spawn("means")
    if spec.d_model == 1:
        half = spec.separation / 2.0
        return np.array([half]), np.array([-half])
    basis = rng.normal((2, spec.d_model))
    if spec.visual_channels:
        basis[0, spec.visual_channels :] = 0.0
    u = basis[0] / np.linalg.norm(basis[0])
    w = basis[1] - np.dot(basis[1], u) * u
    w /= np.linalg.norm(w)
    length = spec.separation / math.sqrt(2.0)
    return length * u, length * w


def split_dataset(
    samples: Sequence[TokenSequence], fraction: float = CALIB_FRACTION
) -> SynthDataset:
    """Split by sample index: the first ``floor(fraction * n)`` samples calibrate."""
    n = len(samples)
    n_calib = max(1, min(n - 1, math.floor(fraction * n))) if n > 1 else n
    return SynthDataset(list(samples[:n_calib]), list(samples[n_calib:]))


def generate_samples(spec: SynthSpec) -> List[TokenSequence]:
    """All samples of a spec, in index order."""
    mu_t, mu_v = modality_means(spec)
    root = Rng(spec.seed)
    samples = []
    for i in range(spec.n_samples):
        rng = root.spawn("sample", i)
        noise = rng.normal((spec.n_visual + spec.n_text, spec.d_model), scale=spec.sigma)
        if spec.visual_channels:
            noise[: spec.n_visual, spec.visual_channels :] = 0.0
        visual = mu_v + noise[: spec.n_visual]
        text = mu_t + noise[spec.n_visual :]
        samples.append(
            TokenSequence.from_parts(
                f"synth-{spec.seed}-{i:04d}",
                visual.astype(np.float32),
                text.astype(np.float32),
            )
        )
    return samples


def generate(spec: SynthSpec) -> SynthDataset:
    """
    Deterministic synthetic dataset with an 80/20 calibration/held-out split.
    """
    return split_dataset(generate_samples(spec))


def modality_block_masks(config: ModelConfig, visual_channels: int) -> Dict[str, NDArray[np.bool_]]:
    """
    Masks that split every projection into a visual and a text block.

    Residual channels below ``visual_channels`` and the same share of FFN
    units connect only to each other. Tokens that are zero outside those
    channels therefore never leave them, and every visual-block row keeps
    at most ``visual_channels / d_model`` of its inputs.
    """
    d, f = config.d_model, config.d_ffn
    channels = np.arange(d) < visual_channels
    units = np.arange(f) < max(1, f * visual_channels // d)
    square = channels[:, None] == channels[None, :]
    layers = {
        "w_q": square,
        "w_k": square,
        "w_v": square,
        "w_o": square,
        "w_up": units[:, None] == channels[None, :],
        "w_down": channels[:, None] == units[None, :],
    }
    return {
        layer_key(b, name): mask for b in range(config.n_blocks) for name, mask in layers.items()
    }


def generate_model(
    spec: SynthSpec, n_blocks: int = 8, n_heads: int = 4, d_ffn: int = 0, gain: float = 1.0
) -> ToyTransformer:
    """
    A random toy backbone matching the dataset width; d_ffn defaults to 4 x d_model.

    When visual tokens are confined to leading channels, the weights
    crossing between the visual and text blocks are zeroed.
    """
    config = ModelConfig(
        d_model=spec.d_model,
        n_blocks=n_blocks,
        n_heads=n_heads,
        d_ffn=d_ffn or 4 * spec.d_model,
    )
    model = ToyTransformer.random(config, Rng(spec.seed).spawn("model"), gain=gain)
    if spec.visual_channels:
        model = apply_masks(model, modality_block_masks(config, spec.visual_channels))
    return model
