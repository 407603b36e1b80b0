"""
Report and table emission: rounded JSON and CSV files.
"""

import csv
import json
from pydantic import BaseModel
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union
from atvprune.errors import StorageError
from atvprune.utils import round_floats
from atvprune.pruner import PruneReport


def to_json_text(data: Union[BaseModel, Dict[str, Any]]) -> str:
    """JSON text with every float rounded to 9 significant digits."""
    if isinstance(data, BaseModel):
        data = data.model_dump(mode="json")
    return json.dumps(round_floats(data), indent=2, ensure_ascii=False) + "\n"


def write_json(path: str, data: Union[BaseModel, Dict[str, Any]]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(to_json_text(data))
    except OSError as e:
        raise StorageError("io", f"cannot write {path}: {e}") from e


def write_csv(
    path: str, rows: Iterable[Dict[str, Any]], columns: Optional[Sequence[str]] = None
) -> int:
    """
    Write dict rows as CSV, floats rounded like the JSON reports.

    Returns:
        Number of data rows written
    """
    rows = [round_floats(dict(row)) for row in rows]
    columns = list(columns) if columns else (list(rows[0]) if rows else [])
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    except OSError as e:
        raise StorageError("io", f"cannot write {path}: {e}") from e
    return len(rows)


def read_csv(path: str) -> List[Dict[str, str]]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            return list(csv.DictReader(f))
    except OSError as e:
        raise StorageError("io", f"cannot read {path}: {e}") from e


def report_schema() -> Dict[str, Any]:
    """JSON schema every prune report validates against."""
    return PruneReport.model_json_schema()


def load_report(path: str) -> PruneReport:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return PruneReport.model_validate_json(f.read())
    except OSError as e:
        raise StorageError("io", f"cannot read {path}: {e}") from e
