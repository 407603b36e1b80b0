"""
File formats: binary checkpoints, calibration JSONL, JSON reports and CSV tables.
"""

from .calib import encode_sample, parse_calib, read_calib, write_calib
from .report import load_report, read_csv, report_schema, to_json_text, write_csv, write_json
from .checkpoint import (
    MAGIC,
    VERSION,
    decode_checkpoint,
    decode_header,
    encode_checkpoint,
    read_checkpoint,
    write_checkpoint,
)

__all__ = [
    "encode_sample",
    "parse_calib",
    "read_calib",
    "write_calib",
    "load_report",
    "read_csv",
    "report_schema",
    "to_json_text",
    "write_csv",
    "write_json",
    "MAGIC",
    "VERSION",
    "decode_checkpoint",
    "decode_header",
    "encode_checkpoint",
    "read_checkpoint",
    "write_checkpoint",
]
