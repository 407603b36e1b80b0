import math
from typing import Any
from atvprune.constants import REPORT_DIGITS


def round_sig(value: float, digits: int = REPORT_DIGITS) -> float:
    """
    Round a float to a fixed number of significant digits.

    Examples:
        ```
        0.123456789012 -> 0.123456789
        1234567890.5 -> 1234567890.0
        0.0 -> 0.0
        ```

    Args:
        value (float): The value to round
        digits (int): Number of significant digits to keep

    Returns:
        The rounded value; non-finite values are returned unchanged
    """
    if value == 0 or not math.isfinite(value):
        return float(value)
    return float(f"{value:.{digits}g}")


def round_floats(obj: Any, digits: int = REPORT_DIGITS) -> Any:
    """
    Recursively round every float inside dicts, lists and tuples.

    Args:
        obj: JSON-like structure
        digits: Number of significant digits to keep

    Returns:
        A structure of the same shape with rounded floats
    """
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return round_sig(obj, digits)
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj
