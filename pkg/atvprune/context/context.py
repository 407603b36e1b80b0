"""
Context module for tracking flags, history and timing of a single run.

Numerical routines call :func:`raise_flag` for recoverable conditions
(degenerate vectors, empty calibration pools, ...). The flag lands in the
active :class:`RunContext` when one is entered, and is dropped otherwise.
"""

import time
from .flags import Flags
from datetime import datetime
from contextvars import ContextVar
from typing import Any, Dict, List, Optional

_active: ContextVar[Optional["RunContext"]] = ContextVar("atv_run_context", default=None)


class RunContext:
    """
    Context class that records what happened while a command ran.
    """

    def __init__(self, command: str, log_flags: bool = False):
        """
        Initialize the context.

        Args:
            command: Name of the command or experiment being run
            log_flags: Whether the first occurrence of each flag is logged
        """
        self.command = command
        self.log_flags = log_flags
        self.time = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        self.flags = Flags()
        self.history: List[Dict[str, Any]] = []
        self._started = time.perf_counter()
        self._token = None

    def __enter__(self) -> "RunContext":
        self._token = _active.set(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        _active.reset(self._token)
        self._token = None

    def elapsed(self) -> float:
        """Seconds since the context was created."""
        return time.perf_counter() - self._started

    def add_flag(self, code: str, detail: Optional[str] = None) -> None:
        """
        Record a flag in the context.

        Args:
            code: Flag code
            detail: Where it happened
        """
        first = self.flags.update(code, detail)
        if first and self.log_flags:
            from atvprune.utils.console import log

            suffix = f" ({detail})" if detail else ""
            log(f"{code}{suffix}", level="WARNING")

    def add_history(self, step: str, data: Dict[str, Any]) -> None:
        """
        Add a step to the history in the context.

        Args:
            step: Step name
            data: Data associated with the step
        """
        self.history.append(
            {
                "step": step,
                "elapsed": self.elapsed(),
                "data": data,
            }
        )

    def dump(self) -> Dict[str, Any]:
        """
        Dump the context data into a dictionary.

        Returns:
            Dictionary containing the context data
        """
        return {
            "command": self.command,
            "time": self.time,
            "elapsed_seconds": self.elapsed(),
            "flags": self.flags.to_dict(),
            "history": self.history,
        }


def current_context() -> Optional[RunContext]:
    """The innermost active run context, if any."""
    return _active.get()


def raise_flag(code: str, detail: Optional[str] = None) -> None:
    """
    Record a recoverable condition in the active run context.

    Args:
        code: Flag code, e.g. "empty-calibration"
        detail: Optional location information
    """
    context = _active.get()
    if context is not None:
        context.add_flag(code, detail)
