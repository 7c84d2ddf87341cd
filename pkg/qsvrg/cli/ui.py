# qsvrg/cli/ui.py

import math
from typing import List, Optional

from rich.console import Console
from rich.table import Table

from ..core.exceptions import ConfigurationError, QsvrgError
from ..core.schemas import TraceFile, VerificationReport

console = Console()
err_console = Console(stderr=True)

EXIT_FAILURE = 1
EXIT_CONFIG = 2


def print_success(message: str):
    """Print success message in green"""
    console.print(f"[bold green]{message}[/bold green]")


def print_error(message: str):
    """Print error message in red"""
    err_console.print(f"[bold red]✗ {message}[/bold red]")


def print_warning(message: str):
    """Print warning message in yellow"""
    err_console.print(f"[bold yellow]⚠ {message}[/bold yellow]")


def print_info(message: str):
    """Print info message in blue"""
    console.print(f"[bold blue]ℹ {message}[/bold blue]")


def exit_code_for(error: Exception) -> int:
    """2 for configuration problems, 1 for everything else"""
    return EXIT_CONFIG if isinstance(error, ConfigurationError) else EXIT_FAILURE


def report_error(error: QsvrgError, context: str) -> int:
    print_error(f"{context}: {error}")
    return exit_code_for(error)


def fmt(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "[dim]-[/dim]"
    return f"{value:.3e}"


def print_traces_table(traces: List[TraceFile], wall_times: Optional[List[float]] = None):
    """One row per run: schedule, cost and final suboptimality"""
    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("Method", style="cyan")
    table.add_column("Seed", justify="right")
    table.add_column("Schedule")
    table.add_column("Passes", justify="right")
    table.add_column("Gradients", justify="right")
    table.add_column("Suboptimality", justify="right")
    if wall_times is not None:
        table.add_column("Time", justify="right", style="dim")

    for i, trace in enumerate(traces):
        if trace.l is not None:
            schedule = f"l={trace.l}, m={trace.m}"
        else:
            schedule = f"alpha={trace.alpha:.3g}"
        passes, final = trace.points[-1]
        row = [
            trace.method.value,
            str(trace.seed),
            schedule,
            f"{passes:.2f}",
            str(trace.gradient_count),
            fmt(final),
        ]
        if wall_times is not None:
            row.append(f"{wall_times[i]:.2f}s")
        table.add_row(*row)

    console.print(table)


def print_verification_report(report: VerificationReport):
    table = Table(title=f"Suite: {report.suite.value}", show_header=True, header_style="bold cyan")
    table.add_column("Check", style="cyan")
    table.add_column("Bound", justify="right")
    table.add_column("Measured", justify="right")
    table.add_column("Margin", justify="right")
    table.add_column("Status")

    for check in report.checks:
        status = "[green]pass[/green]" if check.passed else "[bold red]FAIL[/bold red]"
        table.add_row(check.name, fmt(check.bound), fmt(check.measured), fmt(check.margin), status)

    console.print(table)
    for check in report.failures:
        console.print(f"  [red]•[/red] {check.name}: {check.detail}")
    console.print(f"[dim]{len(report.checks)} checks in {report.elapsed_seconds:.2f}s[/dim]")


def print_comparison_table(table_data):
    """Suboptimality per trace at every shared checkpoint, with the best column marked"""
    table = Table(show_header=True, header_style="bold cyan")
    table.add_column("Passes", justify="right")
    for column in table_data.columns:
        table.add_column(column, justify="right")
    table.add_column("Winner", style="green")

    for row in table_data.rows:
        table.add_row(f"{row.passes:.2f}", *[fmt(v) for v in row.values], row.winner or "")

    console.print(table)
    source = f"{table_data.problem} on {table_data.dataset}"
    console.print(f"\n[dim]g* = {table_data.g_star!r} ({source})[/dim]")
