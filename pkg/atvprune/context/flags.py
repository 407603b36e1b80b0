"""
Classes for tracking warning flags raised during a run.
"""

from datetime import datetime
from typing import Any, Dict, List, Optional


class FlagCount:
    """Number of times one flag code was raised."""

    def __init__(self):
        """Initialize the counter."""
        self.count = 0
        self.first_seen: Optional[str] = None

    def update(self) -> None:
        """Record one more occurrence."""
        if self.first_seen is None:
            self.first_seen = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        self.count += 1

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        return {"count": self.count, "first_seen": self.first_seen}


class FlagDetail:
    """A single flag occurrence with its location."""

    def __init__(self, code: str, detail: Optional[str] = None):
        """Initialize flag detail record."""
        self.code = code
        self.detail = detail

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        return {"code": self.code, "detail": self.detail}


class Flags:
    """Main class for tracking all flags raised during a run."""

    # Detailed records kept per code; counts keep growing past this.
    max_details_per_code = 20

    def __init__(self):
        """Initialize flag tracking."""
        self._codes: Dict[str, FlagCount] = {}
        self.detailed: List[FlagDetail] = []

    def update(self, code: str, detail: Optional[str] = None) -> bool:
        """
        Record a flag occurrence.

        Args:
            code: Flag code, e.g. "degenerate-vector"
            detail: Optional free-form location of the occurrence

        Returns:
            True when this is the first occurrence of the code
        """
        first = code not in self._codes
        if first:
            self._codes[code] = FlagCount()
        counter = self._codes[code]
        counter.update()
        if counter.count <= self.max_details_per_code:
            self.detailed.append(FlagDetail(code, detail))
        return first

    def count(self, code: str) -> int:
        """Number of times a code was raised."""
        counter = self._codes.get(code)
        return counter.count if counter else 0

    def codes(self) -> List[str]:
        """All codes raised so far, in first-seen order."""
        return list(self._codes)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        return {
            "by_code": {code: c.to_dict() for code, c in self._codes.items()},
            "detailed": [d.to_dict() for d in self.detailed],
        }
