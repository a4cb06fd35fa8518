"""
Terminal output helpers.

One shared rich console for every command, plus small builders for the
tables, panels and progress bars the commands print.
"""

import math
from typing import Any, Iterable, Mapping, Optional, Sequence

from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table

# Global console instance
console = Console()


def fmt(value: Any, digits: int = 3) -> str:
    """Human-readable cell; the CSV files keep full precision."""
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if math.isnan(value):
            return "-"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if value != 0 and (abs(value) < 1e-3 or abs(value) >= 1e6):
            return f"{value:.{digits}e}"
        return f"{value:.{digits}f}"
    return str(value)


def make_table(title: str, columns: Sequence[str], rows: Iterable[Sequence[Any]],
               numeric: Optional[Sequence[str]] = None, digits: int = 3) -> Table:
    """Table with the first column cyan and numeric columns right-justified."""
    numeric = set(numeric or ())
    table = Table(title=title, show_header=True, header_style="bold magenta")
    for k, name in enumerate(columns):
        table.add_column(name, style="cyan" if k == 0 else "white",
                         justify="right" if name in numeric else "left")
    for row in rows:
        table.add_row(*(fmt(v, digits) for v in row))
    return table


def print_table(title: str, columns: Sequence[str], rows: Iterable[Sequence[Any]],
                numeric: Optional[Sequence[str]] = None, digits: int = 3) -> None:
    console.print(make_table(title, columns, rows, numeric, digits))


def print_summary(title: str, items: Mapping[str, Any], border_style: str = "cyan") -> None:
    """Key/value panel, one line per item."""
    body = "\n".join(f"[cyan]{k}:[/cyan] {fmt(v)}" for k, v in items.items())
    console.print(Panel(body, title=title, border_style=border_style, expand=False))


def print_outputs(paths: Iterable[Any]) -> None:
    for path in paths:
        console.print(f"[green]✓[/green] wrote [bold]{path}[/bold]")


def make_progress(transient: bool = True) -> Progress:
    """Progress bar for multi-step runs (recipes, per-link sounding)."""
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        TimeElapsedColumn(),
        console=console,
        transient=transient,
    )
