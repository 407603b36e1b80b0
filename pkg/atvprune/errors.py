"""
Exception hierarchy shared by every ATVPrune module.

Each error carries a short machine-readable ``code`` (used in reports and
messages) and the process ``exit_code`` the CLI returns for it.
"""

from typing import Any, Dict, List, Optional


class AtvError(Exception):
    """Base class of all ATVPrune errors."""

    exit_code: int = 1

    def __init__(self, code: str, message: Optional[str] = None):
        self.code = code
        self.message = message or code
        super().__init__(f"{code}: {self.message}")


class ValidationError(AtvError, ValueError):
    """Invalid input shapes, arguments, configuration or files."""

    exit_code = 2


class CalibFormatError(ValidationError):
    """Calibration JSONL schema violations, one issue per offending line."""

    def __init__(self, issues: List[Dict[str, Any]], path: Optional[str] = None):
        self.issues = issues
        self.path = path
        lines = [
            f"line {issue.get('line', '?')}: {issue.get('message', '')}"
            for issue in issues
        ]
        where = f"{path}: " if path else ""
        super().__init__("calib-schema", where + "; ".join(lines))


class EmptyCalibrationError(AtvError):
    """The pooled calibration selection holds no token positions."""

    exit_code = 3

    def __init__(self, message: Optional[str] = None, code: str = "empty-calibration"):
        super().__init__(code, message)


class StorageError(AtvError, OSError):
    """Checkpoint or file-system failures."""

    exit_code = 4
