"""
Utility modules for ATVPrune.
"""

from .rounding import round_sig, round_floats
from .console import console, log, error_panel, block_progress, set_quiet
from .config_loader import load_config, extract_command_config

__all__ = [
    "console",
    "log",
    "error_panel",
    "block_progress",
    "set_quiet",
    "round_sig",
    "round_floats",
    "load_config",
    "extract_command_config",
]
