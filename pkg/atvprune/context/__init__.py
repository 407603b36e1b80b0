from .flags import Flags
from .context import RunContext, current_context, raise_flag

__all__ = ["Flags", "RunContext", "current_context", "raise_flag"]
