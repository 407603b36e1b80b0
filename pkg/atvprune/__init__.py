from .main import entry as run

__version__ = "v0.1.0"
__all__ = ["run"]
