"""
Console output using rich: levelled log lines, error panels and progress bars.
"""

from datetime import datetime
from rich.text import Text
from rich.panel import Panel
from rich.align import Align
from rich.console import Console
from rich.progress import (
    BarColumn,
    Progress,
    TextColumn,
    TimeElapsedColumn,
    MofNCompleteColumn,
)

console = Console(stderr=True)

_quiet = False


def set_quiet(quiet: bool) -> None:
    """Silence (or re-enable) log lines below WARNING."""
    global _quiet
    _quiet = quiet


def get_level_style(level: str) -> str:
    """Get the appropriate style for a log level."""
    level = level.upper()
    if level == "INFO":
        return "bright_blue"
    elif level == "WARNING":
        return "yellow"
    elif level == "ERROR":
        return "red"
    elif level == "DEBUG":
        return "green"
    elif level == "CRITICAL":
        return "red bold"
    elif level == "SUCCESS":
        return "green bold"
    else:
        return "cyan"


def log(message: str, level: str = "INFO") -> None:
    """
    Print a log message as ``HH:MM:SS - LEVEL - message``.

    Args:
        message (str): The log message; multi-line messages are split per line
        level (str): Log level (INFO, WARNING, ERROR, DEBUG, CRITICAL, SUCCESS)
    """
    level = level.upper()
    if _quiet and level in ("INFO", "DEBUG", "SUCCESS"):
        return

    time_str = datetime.now().strftime("%H:%M:%S")
    for line in message.split("\n"):
        if not line.strip():
            continue
        text = Text()
        text.append(time_str, style="bright_black")
        text.append(" - ")
        text.append(level, style=get_level_style(level))
        text.append(" - ")
        text.append(line)
        console.print(text)


def error_panel(message: str, title: str = "Error") -> None:
    """Render an error message in a red panel."""
    console.print(
        Panel(
            Align.center(message),
            title=f"[bold red]{title}[/bold red]",
            border_style="red",
        )
    )


def block_progress() -> Progress:
    """Progress bar used by the block-by-block pruning driver."""
    return Progress(
        TextColumn("[bold blue]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    )
