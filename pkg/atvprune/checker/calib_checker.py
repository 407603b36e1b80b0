from typing import Any, Dict, List, Optional
from .interface import AbsChecker
from atvprune.storage import parse_calib


class CalibSchemaChecker(AbsChecker):
    """Schema of a calibration JSONL file, one issue per bad line."""

    def __init__(self, d_model: Optional[int] = None):
        self.d_model = d_model

    @property
    def name(self) -> str:
        return "calib-schema"

    def check(self, file_path: str) -> List[Dict[str, Any]]:
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                _, issues = parse_calib(f, self.d_model)
        except OSError as e:
            return [{"line": 0, "column": 0, "message": str(e), "code": "io"}]
        except UnicodeDecodeError as e:
            return [{"line": 0, "column": 0, "message": f"not UTF-8: {e}", "code": "calib-schema"}]
        return [{**issue, "code": "calib-schema"} for issue in issues]
