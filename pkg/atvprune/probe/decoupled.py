"""
Modality-decoupled copy of the backbone.

Every block's QKV and FFN weights are replicated into a textual and a visual
pathway; each token's projections run through its own modality's pathway
while attention still mixes all tokens jointly. The output projection and
the norms stay shared. Before any pruning the decoupled forward is bitwise
equal to the shared one: each pathway computes the full projection and the
rows are then picked by modality, so every kept row comes out of exactly the
same arithmetic as in the shared model.
"""

import numpy as np
from enum import Enum
from numpy.typing import NDArray
from atvprune.numerics import matmul
from atvprune.errors import ValidationError
from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Mapping, Tuple
from atvprune.model import (
    CAPTURE_ALL,
    BlockTrace,
    CaptureFlags,
    ForwardTrace,
    ModelConfig,
    TokenSequence,
    ToyTransformer,
    causal_attention,
    layer_key,
    masked_weight,
    residual_add,
    rms_norm,
    silu,
)

# Layers replicated per pathway; w_o stays shared
PATHWAY_LAYERS = ("w_q", "w_k", "w_v", "w_up", "w_down")


class PathwayTarget(str, Enum):
    """Which modality pathway a probe run prunes."""

    TEXTUAL = "textual"
    VISUAL = "visual"

    def selects(self, seq: TokenSequence) -> NDArray[np.bool_]:
        """Rows of a sequence routed through this pathway."""
        return seq.is_text if self is PathwayTarget.TEXTUAL else ~seq.is_text


@dataclass(frozen=True, eq=False)
class PathwayWeights:
    """The five replicated linear layers of one pathway."""

    w_q: NDArray[np.float32]
    w_k: NDArray[np.float32]
    w_v: NDArray[np.float32]
    w_up: NDArray[np.float32]
    w_down: NDArray[np.float32]

    def layer(self, name: str) -> NDArray[np.float32]:
        if name not in PATHWAY_LAYERS:
            raise ValidationError("mask-mismatch", f"{name!r} is not a pathway layer")
        return getattr(self, name)

    def layers(self) -> Iterator[Tuple[str, NDArray[np.float32]]]:
        for name in PATHWAY_LAYERS:
            yield name, getattr(self, name)

    def with_masks(self, masks: Mapping[str, NDArray[np.bool_]]) -> "PathwayWeights":
        missing = [name for name in PATHWAY_LAYERS if name not in masks]
        if missing:
            raise ValidationError("mask-mismatch", f"missing masks for {missing}")
        return replace(
            self,
            **{
                name: masked_weight(getattr(self, name), masks[name], name)
                for name in PATHWAY_LAYERS
            },
        )


def _copy(array: NDArray[np.float32]) -> NDArray[np.float32]:
    out = np.array(array, dtype=np.float32, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class DecoupledBlock:
    """A block with textual and visual pathways and shared w_o and norms."""

    text: PathwayWeights
    visual: PathwayWeights
    w_o: NDArray[np.float32]
    norm1: NDArray[np.float32]
    norm2: NDArray[np.float32]

    def pathway(self, target: PathwayTarget) -> PathwayWeights:
        return self.text if PathwayTarget(target) is PathwayTarget.TEXTUAL else self.visual

    def with_pathway(self, target: PathwayTarget, weights: PathwayWeights) -> "DecoupledBlock":
        if PathwayTarget(target) is PathwayTarget.TEXTUAL:
            return replace(self, text=weights)
        return replace(self, visual=weights)


def _route(
    x: NDArray[np.float32],
    text_weight: NDArray[np.float32],
    visual_weight: NDArray[np.float32],
    is_text: NDArray[np.bool_],
) -> NDArray[np.float32]:
    out_text = matmul(x, text_weight.T)
    out_visual = matmul(x, visual_weight.T)
    return np.where(is_text[:, None], out_text, out_visual)


def forward_decoupled_block(
    block: DecoupledBlock,
    x: NDArray[np.float32],
    is_text: NDArray[np.bool_],
    n_heads: int,
    capture: CaptureFlags = CAPTURE_ALL,
    causal: bool = True,
) -> Tuple[NDArray[np.float32], BlockTrace]:
    """
    Run one decoupled block.

    The captured activations are the pre-routing inputs of every layer over
    all tokens, i.e. what the shared layer would have seen.
    """
    t, v = block.text, block.visual
    h = rms_norm(x, block.norm1)
    q = _route(h, t.w_q, v.w_q, is_text)
    k = _route(h, t.w_k, v.w_k, is_text)
    val = _route(h, t.w_v, v.w_v, is_text)
    context, weights = causal_attention(q, k, val, n_heads, causal)
    x_mid = residual_add(x, matmul(context, block.w_o.T))

    h2 = rms_norm(x_mid, block.norm2)
    hidden = silu(_route(h2, t.w_up, v.w_up, is_text))
    out = residual_add(x_mid, _route(hidden, t.w_down, v.w_down, is_text))

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


def pathway_activations(
    trace: BlockTrace, seq: TokenSequence, target: PathwayTarget
) -> Dict[str, NDArray[np.float32]]:
    """
    Inputs a pathway's layers actually received after routing.

    Rows of the other modality are dropped, so a text-only sequence yields
    empty matrices for the visual pathway.
    """
    rows = PathwayTarget(target).selects(seq)
    return {name: trace.activations[name][rows] for name in PATHWAY_LAYERS}


@dataclass(frozen=True, eq=False)
class DecoupledModel:
    """Backbone whose blocks are all decoupled."""

    config: ModelConfig
    blocks: Tuple[DecoupledBlock, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if len(self.blocks) != self.config.n_blocks:
            raise ValidationError(
                "config", f"{len(self.blocks)} blocks for n_blocks={self.config.n_blocks}"
            )

    def pathway_keys(self) -> List[str]:
        """Mask names of a pathway's layers, e.g. ``blocks.0.w_q``."""
        return [
            layer_key(b, name)
            for b in range(self.config.n_blocks)
            for name in PATHWAY_LAYERS
        ]

    def with_block(self, index: int, block: DecoupledBlock) -> "DecoupledModel":
        blocks = list(self.blocks)
        blocks[index] = block
        return DecoupledModel(self.config, tuple(blocks))

    def forward(
        self,
        seq: TokenSequence,
        capture: CaptureFlags = CAPTURE_ALL,
        causal: bool = True,
    ) -> ForwardTrace:
        return forward_decoupled(self, seq, capture, causal)


def decouple(model: ToyTransformer) -> DecoupledModel:
    """
    Replicate QKV and FFN weights of every block into two pathways.

    Args:
        model: Shared backbone, left untouched

    Returns:
        DecoupledModel whose pathway weights are bitwise copies of the source
    """
    blocks = []
    for block in model.blocks:
        pathway = {name: block.layer(name) for name in PATHWAY_LAYERS}
        blocks.append(
            DecoupledBlock(
                text=PathwayWeights(**{k: _copy(w) for k, w in pathway.items()}),
                visual=PathwayWeights(**{k: _copy(w) for k, w in pathway.items()}),
                w_o=block.w_o,
                norm1=block.norm1,
                norm2=block.norm2,
            )
        )
    return DecoupledModel(model.config, tuple(blocks))


def forward_decoupled(
    model: DecoupledModel,
    seq: TokenSequence,
    capture: CaptureFlags = CAPTURE_ALL,
    causal: bool = True,
) -> ForwardTrace:
    """Run the decoupled model on one sequence, routing tokens by modality."""
    if seq.embeddings.shape[1] != model.config.d_model:
        raise ValidationError(
            "dimension-mismatch",
            f"sample {seq.id} has width {seq.embeddings.shape[1]}, model expects {model.config.d_model}",
        )
    x = seq.embeddings
    traces = []
    for block in model.blocks:
        x, trace = forward_decoupled_block(
            block, x, seq.is_text, model.config.n_heads, capture, causal
        )
        traces.append(trace)
    return ForwardTrace(blocks=traces, output=x)
