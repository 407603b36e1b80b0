from .interface import AbsChecker
from .checker_pipeline import CheckerPipeline
from .calib_checker import CalibSchemaChecker
from .checkpoint_checker import CheckpointHeaderChecker

__all__ = [
    "AbsChecker",
    "CheckerPipeline",
    "CalibSchemaChecker",
    "CheckpointHeaderChecker",
]
