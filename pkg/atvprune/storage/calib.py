"""
Calibration JSONL: one ``{"id", "modality", "embeddings"}`` object per line.
"""

import json
import math
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple
from atvprune.model import MODALITIES, TEXT, TokenSequence
from atvprune.errors import AtvError, CalibFormatError, StorageError

Issue = Dict[str, Any]


def _issue(line: int, message: str) -> Issue:
    return {"line": line, "column": 0, "message": message}


def _check_record(record: Any, width: Optional[int]) -> Optional[str]:
    """First schema violation of a decoded line, or None."""
    if not isinstance(record, dict):
        return "line must be a JSON object"
    missing = [key for key in ("id", "modality", "embeddings") if key not in record]
    if missing:
        return f"missing keys {missing}"
    if not isinstance(record["id"], str) or not record["id"]:
        return "id must be a non-empty string"
    modality, embeddings = record["modality"], record["embeddings"]
    if not isinstance(modality, list) or any(m not in MODALITIES for m in modality):
        return f"modality must be a list of {list(MODALITIES)}"
    if not isinstance(embeddings, list) or not embeddings:
        return "embeddings must be a non-empty list of rows"
    if len(modality) != len(embeddings):
        return f"{len(modality)} modality labels for {len(embeddings)} embedding rows"
    if TEXT not in modality:
        return "at least one text token is required"
    for i, row in enumerate(embeddings):
        if not isinstance(row, list):
            return f"embedding row {i} is not a list"
        if width is not None and len(row) != width:
            return f"embedding row {i} has width {len(row)}, expected {width}"
        for value in row:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return f"embedding row {i} holds a non-number"
            try:
                finite = math.isfinite(value)
            except OverflowError:
                return f"embedding row {i} holds a number outside the float range"
            if not finite:
                return f"embedding row {i} holds NaN or Inf"
    return None


def parse_calib(
    lines: Iterable[str], d_model: Optional[int] = None
) -> Tuple[List[TokenSequence], List[Issue]]:
    """
    Parse calibration lines, collecting one issue per offending line.

    Args:
        lines: Raw lines of the file
        d_model: Required row width; the first valid line fixes it when None

    Returns:
        Tuple of (samples in file order, issues with 1-based line numbers)
    """
    samples: List[TokenSequence] = []
    issues: List[Issue] = []
    seen = set()
    width = d_model
    for number, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            issues.append(_issue(number, f"invalid JSON: {e.msg}"))
            continue
        problem = _check_record(record, width)
        if problem is None and record["id"] in seen:
            problem = f"duplicate id {record['id']!r}"
        if problem is not None:
            issues.append(_issue(number, problem))
            continue
        try:
            seq = TokenSequence(
                id=record["id"], embeddings=record["embeddings"], modality=record["modality"]
            )
        except AtvError as e:
            issues.append(_issue(number, e.message))
            continue
        if width is None:
            width = seq.embeddings.shape[1]
        seen.add(seq.id)
        samples.append(seq)
    if not samples and not issues:
        issues.append(_issue(0, "no samples"))
    return samples, issues


def read_calib(path: str, d_model: Optional[int] = None) -> List[TokenSequence]:
    """
    Read a calibration file.

    Raises:
        CalibFormatError: With every line-numbered schema violation
        StorageError: If the file cannot be read
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as e:
        raise StorageError("io", f"cannot read {path}: {e}") from e
    samples, issues = parse_calib(lines, d_model)
    if issues:
        raise CalibFormatError(issues, path)
    return samples


def encode_sample(seq: TokenSequence) -> str:
    return json.dumps(
        {
            "id": seq.id,
            "modality": list(seq.modality),
            "embeddings": seq.embeddings.tolist(),
        },
        separators=(",", ":"),
    )


def write_calib(path: str, samples: Sequence[TokenSequence]) -> None:
    """Write samples one per line; float32 values survive the round trip exactly."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for seq in samples:
                f.write(encode_sample(seq))
                f.write("\n")
    except OSError as e:
        raise StorageError("io", f"cannot write {path}: {e}") from e
