"""
The toy multimodal transformer backbone.
"""

from .config import ModelConfig
from .sequence import TEXT, VISUAL, MODALITIES, TokenSequence
from .transformer import (
    PRUNABLE_LAYERS,
    CAPTURE_ALL,
    CAPTURE_NONE,
    BlockTrace,
    CaptureFlags,
    ForwardTrace,
    ToyTransformer,
    TransformerBlock,
    apply_masks,
    causal_attention,
    forward,
    forward_block,
    layer_key,
    masked_weight,
    parse_layer_key,
    residual_add,
    rms_norm,
    silu,
)

__all__ = [
    "ModelConfig",
    "TEXT",
    "VISUAL",
    "MODALITIES",
    "TokenSequence",
    "PRUNABLE_LAYERS",
    "CAPTURE_ALL",
    "CAPTURE_NONE",
    "BlockTrace",
    "CaptureFlags",
    "ForwardTrace",
    "ToyTransformer",
    "TransformerBlock",
    "apply_masks",
    "causal_attention",
    "forward",
    "forward_block",
    "layer_key",
    "masked_weight",
    "parse_layer_key",
    "residual_add",
    "rms_norm",
    "silu",
]
