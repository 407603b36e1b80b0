from .interface import AbsChecker
from typing import Any, Dict, List


class CheckerPipeline:
    """
    A pipeline for running several checkers on one input file.
    """

    def __init__(self):
        """Initialize an empty pipeline."""
        self._checkers: List[AbsChecker] = []

    def add_checker(self, *checkers: AbsChecker) -> "CheckerPipeline":
        """
        Add one or more checkers to the pipeline.

        Args:
            *checkers (AbsChecker): One or more checker instances to add

        Returns:
            CheckerPipeline: The pipeline object for method chaining
        """
        self._checkers.extend(checkers)
        return self

    @property
    def names(self) -> List[str]:
        return [checker.name for checker in self._checkers]

    def run(self, file_path: str) -> List[Dict[str, Any]]:
        """
        Run checkers in order until one reports issues.

        Args:
            file_path (str): Path to the file to check

        Returns:
            out (List[Dict[str, Any]]): Issues of the first checker that found
                any, each tagged with the checker name, or an empty list
        """
        for checker in self._checkers:
            issues = checker.check(file_path)
            if issues:
                return [{**issue, "checker": checker.name} for issue in issues]
        return []
