"""
Display service implementation backed by rich
"""
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.table import Table

from ..core.ports import DisplayLevel, IDisplayService
from ..domain.entities import RunError

LEVEL_STYLES = {
    DisplayLevel.DEBUG: "dim",
    DisplayLevel.INFO: "cyan",
    DisplayLevel.WARNING: "yellow",
    DisplayLevel.ERROR: "bold red",
    DisplayLevel.SUCCESS: "bold green",
}


def _format_cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, bool) or value is None:
        return {True: "yes", False: "no", None: "-"}[value]
    return str(value)


class RichDisplayService(IDisplayService):
    """Console display; summaries go to stderr so stdout stays clean"""

    def __init__(self, console: Optional[Console] = None, quiet: bool = False):
        self.console = console or Console(stderr=True, highlight=False)
        self.quiet = quiet

    def display_message(self, message: str, level: DisplayLevel = DisplayLevel.INFO) -> None:
        if self.quiet and level in (DisplayLevel.DEBUG, DisplayLevel.INFO):
            return
        self.console.print(message, style=LEVEL_STYLES[level])

    def display_error(self, error: str, details: Optional[str] = None) -> None:
        self.console.print(f"error: {error}", style=LEVEL_STYLES[DisplayLevel.ERROR])
        if details:
            self.console.print(details, style="red")

    def display_success(self, message: str) -> None:
        self.display_message(message, DisplayLevel.SUCCESS)

    def display_table(self, data: List[Dict[str, Any]], headers: Optional[List[str]] = None,
                      title: Optional[str] = None) -> None:
        if self.quiet or not data:
            return
        headers = headers or list(data[0].keys())
        table = Table(title=title, show_lines=False)
        for header in headers:
            table.add_column(header)
        for row in data:
            table.add_row(*(_format_cell(row.get(h)) for h in headers))
        self.console.print(table)

    def display_progress(self, current: int, total: int, message: str = "") -> None:
        if self.quiet:
            return
        self.console.print(f"[{current}/{total}] {message}", style="dim")

    def display_run_error(self, error: RunError) -> None:
        """Render a classified failure with its suggestions"""
        self.console.print(
            f"{error.error_type.value} error (exit {error.exit_code}): {error.message}",
            style=error.severity_color,
        )
        for i, suggestion in enumerate(error.resolution_suggestions, 1):
            self.console.print(f"  {i}. {suggestion}")
