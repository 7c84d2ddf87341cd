# qsvrg/cli/commands/solve.py

from pathlib import Path

import click
from pydantic import ValidationError

from ...core.exceptions import ConfigurationError, QsvrgError
from ...core.schemas import ExperimentConfig, Method, ProblemSpec, SyntheticSpec
from ...services.benchmark_service import BenchmarkService
from ...storage.trace_store import TraceStore
from ..ui import (
    EXIT_FAILURE,
    console,
    print_error,
    print_info,
    print_success,
    print_traces_table,
    report_error,
)

METHOD_NAMES = [m.value for m in Method]


def _experiment(
    config,
    dataset,
    synthetic,
    problem,
    lambda_scale,
    lda_class,
    methods,
    passes,
    seeds,
    seed_base,
    out,
    workers,
    alpha=None,
    inner_steps=None,
    epochs=None,
):
    try:
        # explicit flags win over the ":" suffixes of --problem
        fields = ProblemSpec.parse(problem).model_dump()
        if lambda_scale is not None:
            fields["lambda_scale"] = lambda_scale
        if lda_class is not None:
            fields["lda_class"] = lda_class
        return ExperimentConfig(
            dataset=Path(dataset) if dataset else None,
            synthetic=SyntheticSpec.parse(synthetic) if synthetic else None,
            problem=ProblemSpec.model_validate(fields),
            methods=[Method(m) for m in methods],
            passes_budget=passes if passes is not None else config.default_passes,
            seeds=list(seeds) or [0],
            seed_base=seed_base if seed_base is not None else config.seed_base,
            output_path=Path(out) if out else config.output_dir / "traces.jsonl",
            workers=workers if workers is not None else config.workers,
            alpha=alpha,
            m=inner_steps,
            l=epochs,
        )
    except (ValidationError, ValueError) as e:
        raise ConfigurationError(str(e)) from e


@click.command()
@click.option(
    "--dataset",
    type=click.Path(exists=True, dir_okay=False),
    help="CSV dataset, label in the last column",
)
@click.option(
    "--synthetic", metavar="N,D,KAPPA[,SEED]", help="Generate a synthetic problem instead"
)
@click.option(
    "--problem",
    default="ridge",
    show_default=True,
    help="least_squares | ridge[:SCALE] | lda[:CLASS[:LAMBDA]]",
)
@click.option("--lambda-scale", type=float, help="Ridge lambda as a multiple of L̄/n")
@click.option("--lda-class", type=int, help="Target class for the LDA problem")
@click.option(
    "--method",
    "-m",
    "methods",
    multiple=True,
    type=click.Choice(METHOD_NAMES),
    help="Method to run (repeatable)",
)
@click.option("--passes", type=float, help="Effective pass budget per run")
@click.option(
    "--seed", "-s", "seeds", multiple=True, type=click.IntRange(min=0), help="Seed (repeatable)"
)
@click.option(
    "--seed-base",
    type=click.IntRange(min=0),
    help="Base of the per-method stream ids",
)
@click.option("--out", "-o", type=click.Path(dir_okay=False), help="Trace file to write")
@click.option("--workers", "-w", type=click.IntRange(min=1), help="Parallel (method, seed) runs")
@click.option("--alpha", type=float, help="Q-SVRG step size in (0, 1]")
@click.option("--inner-steps", type=click.IntRange(min=1), help="Q-SVRG inner iterations m")
@click.option("--epochs", type=click.IntRange(min=1), help="Q-SVRG epochs l")
@click.option(
    "--replay",
    type=click.Path(exists=True, dir_okay=False),
    help="Re-run the runs stored in a trace file",
)
@click.pass_context
def solve(
    ctx,
    dataset,
    synthetic,
    problem,
    lambda_scale,
    lda_class,
    methods,
    passes,
    seeds,
    seed_base,
    out,
    workers,
    alpha,
    inner_steps,
    epochs,
    replay,
):
    """Run solvers on a problem and write convergence traces

    Examples:
        qsvrg solve --synthetic 100,10,50 --method qsvrg --passes 20
        qsvrg solve --dataset sonar.csv --problem ridge:0.1 -m qsvrg -m sag_nonuniform -s 0 -s 1
        qsvrg solve --replay traces/traces.jsonl
    """
    config = ctx.obj["config"]
    service = BenchmarkService(config)

    if replay:
        ctx.exit(_replay(service, Path(replay)))

    try:
        experiment = _experiment(
            config,
            dataset,
            synthetic,
            problem,
            lambda_scale,
            lda_class,
            methods,
            passes,
            seeds,
            seed_base,
            out,
            workers,
            alpha=alpha,
            inner_steps=inner_steps,
            epochs=epochs,
        )
        with console.status(f"[bold blue]Solving {experiment.dataset_label()}..."):
            result = service.run(experiment)
        path = TraceStore(config.output_dir).write(result.traces, experiment.output_path)
    except QsvrgError as e:
        ctx.exit(report_error(e, "Solve failed"))

    print_traces_table(result.traces, result.wall_times)
    print_success(f"✓ Wrote {len(result.traces)} trace(s) to {path}")


def _replay(service: BenchmarkService, path: Path) -> int:
    try:
        traces = TraceStore().read(path)
        mismatches = 0
        for trace in traces:
            _, matches = service.replay(trace)
            if matches:
                print_info(f"{trace.label()}: reproduced exactly")
            else:
                mismatches += 1
                print_error(f"{trace.label()}: points differ from the stored trace")
    except QsvrgError as e:
        return report_error(e, "Replay failed")

    if mismatches:
        return EXIT_FAILURE
    print_success(f"✓ All {len(traces)} run(s) reproduced")
    return 0
