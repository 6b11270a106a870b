"""
kramers CLI UI Helpers
Centralized Rich console and styling configuration.
"""

import math
from typing import Dict, List, Optional, Sequence

from rich.console import Console
from rich.table import Table
from rich.theme import Theme

from experiments.models import ValidationReport

custom_theme = Theme(
    {
        "info": "cyan",
        "warning": "yellow",
        "error": "bold red",
        "success": "bold green",
        "title": "bold magenta",
        "subtitle": "blue",
        "dim": "dim white",
    }
)

console = Console(theme=custom_theme)


def print_success(message: str):
    """Print a success message with green checkmark."""
    console.print(f"✅ [success]{message}[/success]")


def print_error(message: str):
    """Print an error message with red cross."""
    console.print(f"❌ [error]{message}[/error]")


def print_warning(message: str):
    """Print a warning message with yellow triangle."""
    console.print(f"⚠️  [warning]{message}[/warning]")


def print_info(message: str):
    """Print an info message."""
    console.print(f"ℹ️  [info]{message}[/info]")


def print_title(title: str, subtitle: Optional[str] = None):
    """Print a styled title."""
    console.print()
    console.rule(f"[title]{title}[/title]")
    if subtitle:
        console.print(f"[subtitle]{subtitle}[/subtitle]", justify="center")
    console.print()


def create_table(columns: List[str], title: Optional[str] = None) -> Table:
    """Create a standard styled table."""
    table = Table(
        title=title,
        title_style="bold magenta",
        header_style="bold cyan",
        show_lines=False,
        box=None,
    )
    for col in columns:
        table.add_column(col)
    return table


def _fmt(value) -> str:
    if isinstance(value, float):
        return "-" if math.isnan(value) else f"{value:.4g}"
    return str(value)


def print_rows(rows: Sequence[Dict], columns: Sequence[str], title: Optional[str] = None):
    """Render result rows as a table, columns in the given order."""
    table = create_table(list(columns), title)
    for row in rows:
        table.add_row(*(_fmt(row.get(col, "")) for col in columns))
    console.print(table)


def print_report(report: ValidationReport):
    """One line per check, then the overall verdict."""
    table = create_table(["", "Check", "Value", "Tolerance", "Detail"], title=report.name)
    for check in report.checks:
        mark = "✅" if check.passed else "❌"
        table.add_row(
            mark,
            check.name,
            _fmt(check.value) if check.value is not None else "",
            _fmt(check.tolerance) if check.tolerance is not None else "",
            check.detail,
        )
    console.print(table)
    if report.passed:
        print_success(f"{report.name}: all {len(report.checks)} checks passed")
    else:
        print_error(f"{report.name}: {len(report.failures)} of {len(report.checks)} checks failed")
