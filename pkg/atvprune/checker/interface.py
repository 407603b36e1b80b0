from typing import Any, Dict, List
from abc import ABC, abstractmethod


class AbsChecker(ABC):
    """
    Abstract base class for input file checkers.

    All checkers run before a file is loaded and report problems instead of
    raising.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """
        The name of the checker.
        """
        pass

    @abstractmethod
    def check(self, file_path: str) -> List[Dict[str, Any]]:
        """
        Check the given file and return a list of issues found.

        Args:
            file_path (str): Path to the file to check

        Returns:
            out (List[Dict[str, Any]]): One dictionary per issue with
                - 'line': 1-based line number, 0 when not line-oriented
                - 'column': column number, 0 when unknown
                - 'message': description of the issue
                - 'code': machine-readable error code
        """
        pass
