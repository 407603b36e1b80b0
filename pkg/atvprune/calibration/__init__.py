"""
Modality-aware calibration pools and pooled activation norms.
"""

from .policy import PoolKind, PoolPolicy, kept_text_count
from .norms import ChannelNorms, accumulate_norms, block_norms
from .selection import CalibrationSelection, SampleSelection, build_selection

__all__ = [
    "PoolKind",
    "PoolPolicy",
    "kept_text_count",
    "ChannelNorms",
    "accumulate_norms",
    "block_norms",
    "CalibrationSelection",
    "SampleSelection",
    "build_selection",
]
