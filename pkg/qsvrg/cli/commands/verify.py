# qsvrg/cli/commands/verify.py

import json
from pathlib import Path

import click

from ...core.exceptions import QsvrgError
from ...core.schemas import VerifySuite
from ...services.verification_service import VerificationService, suite_summary
from ..ui import (
    EXIT_FAILURE,
    console,
    print_error,
    print_success,
    print_verification_report,
    report_error,
)

# Replicate counts for --quick runs
QUICK_COUNTS = dict(
    theorem_replicates=200,
    variance_replicates=2000,
    unbiasedness_samples=20_000,
    sampler_draws=100_000,
    sampler_seeds=5,
    contraction_replicates=20,
)


@click.command()
@click.argument(
    "suite",
    type=click.Choice([s.value for s in VerifySuite]),
    default=VerifySuite.ALL.value,
    required=False,
)
@click.option("--quick", is_flag=True, help="Fewer Monte Carlo replicates")
@click.option(
    "--json", "json_path", type=click.Path(dir_okay=False), help="Write the reports as JSON"
)
@click.pass_context
def verify(ctx, suite, quick, json_path):
    """Check the convergence theory numerically

    Exits 0 when every check passes, 1 on a violated bound and 2 on a
    configuration error.

    Examples:
        qsvrg verify theorem
        qsvrg verify all --quick --json verify.json
    """
    try:
        service = VerificationService(**QUICK_COUNTS) if quick else VerificationService()
        with console.status(f"[bold blue]Running {suite} checks..."):
            reports = service.run(VerifySuite(suite))
    except QsvrgError as e:
        ctx.exit(report_error(e, "Verification could not run"))

    for report in reports:
        print_verification_report(report)

    if json_path:
        payload = [report.model_dump(mode="json") for report in reports]
        Path(json_path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    passed, total = suite_summary(reports)
    if passed < total:
        print_error(f"{total - passed} of {total} checks violated their bound")
        ctx.exit(EXIT_FAILURE)
    print_success(f"✓ All {total} checks passed")
