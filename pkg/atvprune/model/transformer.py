"""
A minimal pre-norm decoder transformer with activation capture.

Each block computes::

    x'  = x  + W_o . Attn(RMSNorm(x) W_q^T, RMSNorm(x) W_k^T, RMSNorm(x) W_v^T)
    x'' = x' + W_down . silu(W_up . RMSNorm(x'))

with causal multi-head softmax attention and no positional encoding. Linear
weights are stored ``(d_out, d_in)`` so a layer maps ``X -> X W^T`` and the
input channels of a weight are its columns.
"""

import numpy as np
from numpy.typing import NDArray
from .config import ModelConfig
from .sequence import TokenSequence
from atvprune.numerics import Rng, matmul
from atvprune.errors import ValidationError
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

PRUNABLE_LAYERS = ("w_q", "w_k", "w_v", "w_o", "w_up", "w_down")
ATTENTION_LAYERS = ("w_q", "w_k", "w_v", "w_o")
FFN_LAYERS = ("w_up", "w_down")
RMS_EPS = 1e-6


def layer_key(block: int, layer: str) -> str:
    """Fully qualified name of a prunable layer, e.g. ``blocks.3.w_up``."""
    return f"blocks.{block}.{layer}"


def parse_layer_key(key: str) -> Tuple[int, str]:
    """Inverse of :func:`layer_key`."""
    try:
        prefix, block, layer = key.split(".")
        if prefix != "blocks":
            raise ValueError(key)
        return int(block), layer
    except ValueError as e:
        raise ValidationError("mask-mismatch", f"bad layer name {key!r}") from e


@dataclass(frozen=True, eq=False)
class TransformerBlock:
    """Weights of one block. Linear weights are ``(d_out, d_in)`` float32."""

    w_q: NDArray[np.float32]
    w_k: NDArray[np.float32]
    w_v: NDArray[np.float32]
    w_o: NDArray[np.float32]
    w_up: NDArray[np.float32]
    w_down: NDArray[np.float32]
    norm1: NDArray[np.float32]
    norm2: NDArray[np.float32]

    def layer(self, name: str) -> NDArray[np.float32]:
        """Weight of a prunable layer by short name."""
        if name not in PRUNABLE_LAYERS:
            raise ValidationError("mask-mismatch", f"unknown layer {name!r}")
        return getattr(self, name)

    def layers(self) -> Iterator[Tuple[str, NDArray[np.float32]]]:
        for name in PRUNABLE_LAYERS:
            yield name, getattr(self, name)

    def with_masks(self, masks: Mapping[str, NDArray[np.bool_]]) -> "TransformerBlock":
        """
        Zero the weights whose mask entry is False.

        Args:
            masks: One boolean mask per prunable layer (short names)

        Returns:
            A new block; untouched fields are shared with this one
        """
        missing = [name for name in PRUNABLE_LAYERS if name not in masks]
        if missing:
            raise ValidationError("mask-mismatch", f"missing masks for {missing}")
        updates = {}
        for name in PRUNABLE_LAYERS:
            updates[name] = masked_weight(getattr(self, name), masks[name], name)
        return replace(self, **updates)


def masked_weight(
    weight: NDArray[np.float32], mask: NDArray[np.bool_], name: str = "layer"
) -> NDArray[np.float32]:
    """Weight with pruned coordinates set to exactly 0.0."""
    mask = np.asarray(mask)
    if mask.shape != weight.shape or mask.dtype != np.bool_:
        raise ValidationError(
            "mask-mismatch",
            f"{name}: mask {mask.shape}/{mask.dtype} does not match weight {weight.shape}",
        )
    out = np.where(mask, weight, np.float32(0.0)).astype(np.float32)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CaptureFlags:
    """Which tensors :func:`forward` keeps."""

    hidden: bool = True
    activations: bool = True
    attention: bool = True


CAPTURE_ALL = CaptureFlags()
CAPTURE_NONE = CaptureFlags(hidden=False, activations=False, attention=False)


@dataclass(eq=False)
class BlockTrace:
    """Captured tensors of one block for one sequence."""

    block_input: Optional[NDArray[np.float32]] = None
    block_output: Optional[NDArray[np.float32]] = None
    # Input activation matrix of every prunable layer (tokens x d_in)
    activations: Dict[str, NDArray[np.float32]] = field(default_factory=dict)
    # Post-softmax attention weights, heads x tokens x tokens
    attention: Optional[NDArray[np.float32]] = None


@dataclass(eq=False)
class ForwardTrace:
    """Per-block traces and the final hidden state of one sequence."""

    blocks: List[BlockTrace]
    output: NDArray[np.float32]

    def block(self, index: int) -> BlockTrace:
        if not 0 <= index < len(self.blocks):
            raise ValidationError(
                "index-out-of-range", f"block {index} not in [0, {len(self.blocks)})"
            )
        return self.blocks[index]


def rms_norm(x: NDArray, gain: NDArray) -> NDArray[np.float32]:
    """Root-mean-square normalisation over the feature axis."""
    x64 = x.astype(np.float64)
    scale = 1.0 / np.sqrt(np.mean(x64 * x64, axis=-1, keepdims=True) + RMS_EPS)
    return (x64 * scale * gain.astype(np.float64)).astype(np.float32)


def silu(x: NDArray) -> NDArray[np.float32]:
    x64 = x.astype(np.float64)
    return (x64 / (1.0 + np.exp(-x64))).astype(np.float32)


def causal_attention(
    q: NDArray[np.float32],
    k: NDArray[np.float32],
    v: NDArray[np.float32],
    n_heads: int,
    causal: bool = True,
) -> Tuple[NDArray[np.float32], NDArray[np.float32]]:
    """
    Multi-head softmax attention.

    Returns:
        Tuple of (context rows, tokens x d_model) and (weights, heads x tokens x tokens)
    """
    n, d = q.shape
    head_dim = d // n_heads
    qh = q.astype(np.float64).reshape(n, n_heads, head_dim).transpose(1, 0, 2)
    kh = k.astype(np.float64).reshape(n, n_heads, head_dim).transpose(1, 0, 2)
    vh = v.astype(np.float64).reshape(n, n_heads, head_dim).transpose(1, 0, 2)

    logits = np.matmul(qh, kh.transpose(0, 2, 1)) / np.sqrt(head_dim)
    if causal:
        future = np.triu(np.ones((n, n), dtype=bool), k=1)
        logits[:, future] = -np.inf
    logits -= logits.max(axis=-1, keepdims=True)
    weights = np.exp(logits)
    weights /= weights.sum(axis=-1, keepdims=True)

    context = np.matmul(weights, vh).transpose(1, 0, 2).reshape(n, d)
    return context.astype(np.float32), weights.astype(np.float32)


def residual_add(x: NDArray[np.float32], update: NDArray[np.float32]) -> NDArray[np.float32]:
    return (x.astype(np.float64) + update.astype(np.float64)).astype(np.float32)


def forward_block(
    block: TransformerBlock,
    x: NDArray[np.float32],
    n_heads: int,
    capture: CaptureFlags = CAPTURE_ALL,
    causal: bool = True,
) -> Tuple[NDArray[np.float32], BlockTrace]:
    """
    Run one block on a sequence of hidden states.

    Args:
        block: Block weights
        x: Block input, tokens x d_model
        n_heads: Number of attention heads
        capture: Tensors to keep in the returned trace
        causal: Mask future positions (disable only for tests)

    Returns:
        Tuple of (block output, trace)
    """
    h = rms_norm(x, block.norm1)
    q = matmul(h, block.w_q.T)
    k = matmul(h, block.w_k.T)
    v = matmul(h, block.w_v.T)
    context, weights = causal_attention(q, k, v, n_heads, causal)
    x_mid = residual_add(x, matmul(context, block.w_o.T))

    h2 = rms_norm(x_mid, block.norm2)
    hidden = silu(matmul(h2, block.w_up.T))
    out = residual_add(x_mid, matmul(hidden, block.w_down.T))

    trace = BlockTrace()
    if capture.hidden:
        trace.block_input = x
        trace.block_output = out
    if capture.activations:
        trace.activations = {
            "w_q": h,
            "w_k": h,
            "w_v": h,
            "w_o": context,
            "w_up": h2,
            "w_down": hidden,
        }
    if capture.attention:
        trace.attention = weights
    return out, trace


@dataclass(frozen=True, eq=False)
class ToyTransformer:
    """The toy backbone: a config plus a list of blocks."""

    config: ModelConfig
    blocks: Tuple[TransformerBlock, ...]

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if len(blocks) != self.config.n_blocks:
            raise ValidationError(
                "config", f"{len(blocks)} blocks for n_blocks={self.config.n_blocks}"
            )
        d, f = self.config.d_model, self.config.d_ffn
        shapes = {
            "w_q": (d, d),
            "w_k": (d, d),
            "w_v": (d, d),
            "w_o": (d, d),
            "w_up": (f, d),
            "w_down": (d, f),
        }
        for b, block in enumerate(blocks):
            for name, weight in block.layers():
                if weight.shape != shapes[name]:
                    raise ValidationError(
                        "dimension-mismatch",
                        f"{layer_key(b, name)} has shape {weight.shape}, expected {shapes[name]}",
                    )
            for name in ("norm1", "norm2"):
                if getattr(block, name).shape != (d,):
                    raise ValidationError(
                        "dimension-mismatch", f"blocks.{b}.{name} must have length {d}"
                    )
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def random(cls, config: ModelConfig, rng: Rng, gain: float = 1.0) -> "ToyTransformer":
        """Weights drawn from N(0, gain^2 / d_in); unit RMS-norm gains."""
        blocks = []
        d, f = config.d_model, config.d_ffn
        for _ in range(config.n_blocks):
            weights = {}
            for name, (d_out, d_in) in (
                ("w_q", (d, d)),
                ("w_k", (d, d)),
                ("w_v", (d, d)),
                ("w_o", (d, d)),
                ("w_up", (f, d)),
                ("w_down", (d, f)),
            ):
                weights[name] = _frozen(rng.normal((d_out, d_in), scale=gain / np.sqrt(d_in)))
            blocks.append(
                TransformerBlock(
                    **weights,
                    norm1=_frozen(np.ones(d)),
                    norm2=_frozen(np.ones(d)),
                )
            )
        return cls(config, tuple(blocks))

    @classmethod
    def zeros(cls, config: ModelConfig) -> "ToyTransformer":
        """All linear weights zero: every block reduces to its residual path."""
        d, f = config.d_model, config.d_ffn
        block = TransformerBlock(
            w_q=_frozen(np.zeros((d, d))),
            w_k=_frozen(np.zeros((d, d))),
            w_v=_frozen(np.zeros((d, d))),
            w_o=_frozen(np.zeros((d, d))),
            w_up=_frozen(np.zeros((f, d))),
            w_down=_frozen(np.zeros((d, f))),
            norm1=_frozen(np.ones(d)),
            norm2=_frozen(np.ones(d)),
        )
        return cls(config, tuple(block for _ in range(config.n_blocks)))

    def layer_keys(self) -> List[str]:
        """Names of all prunable layers in block order."""
        return [
            layer_key(b, name)
            for b in range(self.config.n_blocks)
            for name in PRUNABLE_LAYERS
        ]

    def layer(self, key: str) -> NDArray[np.float32]:
        block, name = parse_layer_key(key)
        return self.blocks[block].layer(name)

    def with_block(self, index: int, block: TransformerBlock) -> "ToyTransformer":
        blocks = list(self.blocks)
        blocks[index] = block
        return ToyTransformer(self.config, tuple(blocks))

    def forward(
        self,
        seq: TokenSequence,
        capture: CaptureFlags = CAPTURE_ALL,
        causal: bool = True,
    ) -> ForwardTrace:
        return forward(self, seq, capture, causal)


def _frozen(array: np.ndarray) -> NDArray[np.float32]:
    out = np.ascontiguousarray(array, dtype=np.float32)
    out.setflags(write=False)
    return out


def forward(
    model: ToyTransformer,
    seq: TokenSequence,
    capture: CaptureFlags = CAPTURE_ALL,
    causal: bool = True,
) -> ForwardTrace:
    """
    Run the whole model on one sequence.

    Args:
        model: The backbone
        seq: Input sequence; its width must equal d_model
        capture: Tensors to keep per block
        causal: Mask future positions (disable only for tests)

    Returns:
        ForwardTrace with one BlockTrace per block and the final hidden state
    """
    if seq.embeddings.shape[1] != model.config.d_model:
        raise ValidationError(
            "dimension-mismatch",
            f"sample {seq.id} has width {seq.embeddings.shape[1]}, model expects {model.config.d_model}",
        )
    x = seq.embeddings
    traces = []
    for block in model.blocks:
        x, trace = forward_block(block, x, model.config.n_heads, capture, causal)
        traces.append(trace)
    return ForwardTrace(blocks=traces, output=x)


def apply_masks(
    model: ToyTransformer, masks: Mapping[str, NDArray[np.bool_]]
) -> ToyTransformer:
    """
    Zero every weight whose mask entry is False.

    Args:
        model: Model to prune
        masks: One mask per prunable layer, keyed by :func:`layer_key`

    Returns:
        A new model; the input model is left untouched

    Raises:
        ValidationError: If a mask is missing, unknown or not congruent
    """
    expected = set(model.layer_keys())
    unknown = sorted(set(masks) - expected)
    missing = sorted(expected - set(masks))
    if unknown or missing:
        raise ValidationError(
            "mask-mismatch", f"missing masks {missing}, unknown masks {unknown}"
        )
    blocks = []
    for b, block in enumerate(model.blocks):
        blocks.append(
            block.with_masks({name: masks[layer_key(b, name)] for name in PRUNABLE_LAYERS})
        )
    return ToyTransformer(model.config, tuple(blocks))
