# qsvrg/cli/commands/report.py

from pathlib import Path

import click

from ...core.exceptions import QsvrgError
from ...services.report_service import ReportService
from ...storage.trace_store import TraceStore
from ..ui import print_comparison_table, print_success, report_error


@click.command()
@click.argument("traces", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--tsv", type=click.Path(dir_okay=False), help="Write the table as tab-separated text"
)
@click.option(
    "--json", "json_path", type=click.Path(dir_okay=False), help="Write the table as JSON"
)
@click.pass_context
def report(ctx, traces, tsv, json_path):
    """Compare traces of one problem at shared pass checkpoints

    Examples:
        qsvrg report traces/sonar.jsonl
        qsvrg report a.jsonl b.jsonl --tsv table.tsv --json table.json
    """
    service = ReportService()
    try:
        loaded = TraceStore().read_many(Path(p) for p in traces)
        table = service.build(loaded)
        service.write(
            table,
            tsv=Path(tsv) if tsv else None,
            json_path=Path(json_path) if json_path else None,
        )
    except QsvrgError as e:
        ctx.exit(report_error(e, "Report failed"))

    print_comparison_table(table)
    for path in filter(None, (tsv, json_path)):
        print_success(f"✓ Wrote {path}")
