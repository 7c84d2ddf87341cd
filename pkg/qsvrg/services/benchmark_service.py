# qsvrg/services/benchmark_service.py

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from ..core.config import Config, get_config
from ..core.design import DesignMatrix, Vector
from ..core.exceptions import ConfigurationError, QsvrgError
from ..core.quadratic import ReferenceSolution, reference_minimizer
from ..core.schemas import (
    ExperimentConfig,
    Method,
    OracleKind,
    ProblemSpec,
    SolverConfig,
    SyntheticSpec,
    TraceFile,
)
from ..storage.datasets import load_csv, preprocess, synthetic_problem
from .lda import class_oracle, fit_lda
from .oracles import StochasticOracle, least_squares_oracle, ridge_oracle
from .solver_service import SolverService
from .solvers import RunTrace, geometric_checkpoints

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchmarkProblem:
    """An oracle with its reference solution and the labels written into traces"""

    oracle: StochasticOracle
    reference: ReferenceSolution
    dataset: str
    problem: str
    lam: float

    @property
    def n(self) -> int:
        return self.oracle.n

    @property
    def d(self) -> int:
        return self.oracle.d


def _class_labels(labels: Vector, from_sign: bool) -> np.ndarray:
    """Map raw labels onto classes 1..K"""
    if from_sign:
        return np.where(labels > 0, 2, 1)
    _, inverse = np.unique(labels, return_inverse=True)
    return inverse + 1


def build_oracle(
    design: DesignMatrix,
    y: Vector,
    problem: ProblemSpec,
    has_constant_column: bool,
    synthetic: bool,
) -> Tuple[StochasticOracle, float]:
    """Oracle for the requested problem kind and the λ it was built with"""
    if problem.kind == OracleKind.LEAST_SQUARES:
        return least_squares_oracle(design, y), 0.0
    if problem.kind == OracleKind.RIDGE:
        lam = problem.lambda_scale * design.lbar / design.n
        return ridge_oracle(design, y, lam), lam

    # The appended ones column has no within-class spread
    points = design.rows[:, :-1] if has_constant_column else design.rows
    labels = _class_labels(y, from_sign=synthetic)
    model = fit_lda(points, labels, lam=problem.lda_lambda)
    if problem.lda_class > model.n_classes:
        raise ConfigurationError(
            f"LDA class {problem.lda_class} requested but the data has {model.n_classes} classes"
        )
    return class_oracle(model, problem.lda_class), problem.lda_lambda


def stream_id_for(method: Method, seed_base: int) -> int:
    """seed_base offset by the method's position in ``Method``"""
    return seed_base + list(Method).index(Method(method))


@dataclass
class SweepResult:
    traces: List[TraceFile]
    wall_times: List[float]


class BenchmarkService:
    """Builds one problem per experiment and runs every (method, seed) pair against it"""

    def __init__(self, config: Optional[Config] = None):
        self.config = config or get_config()

    def build_problem(self, experiment: ExperimentConfig) -> BenchmarkProblem:
        if experiment.synthetic is not None:
            spec = experiment.synthetic
            design, y = synthetic_problem(spec.n, spec.d, spec.kappa, spec.seed)
            has_constant = False
        else:
            raw = load_csv(experiment.dataset)
            design, _ = preprocess(raw)
            y = raw.labels
            has_constant = True

        oracle, lam = build_oracle(
            design,
            y,
            experiment.problem,
            has_constant_column=has_constant,
            synthetic=experiment.synthetic is not None,
        )
        reference = reference_minimizer(oracle.problem)
        logger.info(
            f"Problem {experiment.problem.label()} on {experiment.dataset_label()}: "
            f"n={oracle.n}, d={oracle.d}, g*={reference.g_star:.6e}"
        )
        return BenchmarkProblem(
            oracle=oracle,
            reference=reference,
            dataset=experiment.dataset_label(),
            problem=experiment.problem.label(),
            lam=lam,
        )

    def checkpoint_grid(self, experiment: ExperimentConfig) -> Tuple[float, float]:
        """(start, ratio) of the recording grid; the experiment's values win over the config"""
        start = experiment.checkpoint_start or self.config.checkpoint_start
        ratio = experiment.checkpoint_ratio or self.config.checkpoint_ratio
        return start, ratio

    def solver_configs(self, experiment: ExperimentConfig) -> List[SolverConfig]:
        """One config per (method, seed), methods outermost"""
        checkpoints = geometric_checkpoints(
            experiment.passes_budget, *self.checkpoint_grid(experiment)
        )
        configs = []
        for method in experiment.methods:
            # step size and schedule overrides only apply to Q-SVRG
            overrides = (
                dict(alpha=experiment.alpha, m=experiment.m, l=experiment.l)
                if method == Method.QSVRG
                else {}
            )
            for seed in experiment.seeds:
                configs.append(
                    SolverConfig(
                        method=method,
                        target_passes=experiment.passes_budget,
                        seed=seed,
                        stream_id=stream_id_for(method, experiment.seed_base),
                        checkpoint_passes=checkpoints,
                        **overrides,
                    )
                )
        return configs

    def run(
        self, experiment: ExperimentConfig, problem: Optional[BenchmarkProblem] = None
    ) -> SweepResult:
        """Run the sweep; traces come back in (method, seed) order whatever the worker count"""
        problem = problem or self.build_problem(experiment)
        solver = SolverService(problem.oracle, problem.reference)
        configs = self.solver_configs(experiment)

        def run_one(config: SolverConfig) -> RunTrace:
            try:
                return solver.run(config)
            except QsvrgError as e:
                logger.error(f"{config.method.value} seed={config.seed} failed: {e}")
                raise

        if experiment.workers > 1 and len(configs) > 1:
            with ThreadPoolExecutor(max_workers=experiment.workers) as pool:
                runs = list(pool.map(run_one, configs))
        else:
            runs = [run_one(config) for config in configs]

        return SweepResult(
            traces=[
                self.to_trace(problem, config, run, experiment)
                for config, run in zip(configs, runs)
            ],
            wall_times=[run.wall_time for run in runs],
        )

    def to_trace(
        self,
        problem: BenchmarkProblem,
        config: SolverConfig,
        run: RunTrace,
        experiment: ExperimentConfig,
    ) -> TraceFile:
        start, ratio = self.checkpoint_grid(experiment)
        return TraceFile(
            dataset=problem.dataset,
            n=problem.n,
            d=problem.d,
            problem=problem.problem,
            lambda_=problem.lam,
            method=run.method,
            seed=config.seed,
            alpha=run.alpha,
            l=run.l,
            m=run.m,
            g_star=problem.reference.g_star,
            residual=problem.reference.residual_norm,
            points=[(float(p), float(s)) for p, s in run.points],
            passes=config.target_passes,
            seed_base=experiment.seed_base,
            gradient_count=run.gradient_count,
            stream_id=config.stream_id,
            checkpoint_start=start,
            checkpoint_ratio=ratio,
        )

    def experiment_from_trace(self, trace: TraceFile) -> ExperimentConfig:
        """The single-run experiment that produced ``trace``, independent of the active config"""
        try:
            source = {}
            if trace.dataset.startswith("synthetic:"):
                source["synthetic"] = SyntheticSpec.from_label(trace.dataset)
            else:
                source["dataset"] = Path(trace.dataset)
            schedule = {}
            if trace.method == Method.QSVRG:
                schedule = dict(alpha=trace.alpha, m=trace.m, l=trace.l)
            return ExperimentConfig(
                **source,
                **schedule,
                problem=ProblemSpec.parse(trace.problem),
                methods=[Method(trace.method)],
                passes_budget=trace.passes,
                seeds=[trace.seed],
                seed_base=trace.seed_base,
                checkpoint_start=trace.checkpoint_start,
                checkpoint_ratio=trace.checkpoint_ratio,
            )
        except (ValidationError, ValueError) as e:
            raise ConfigurationError(f"trace metadata cannot be replayed: {e}") from e

    def replay(self, trace: TraceFile) -> Tuple[TraceFile, bool]:
        """Re-run a trace's embedded configuration; True when the points match exactly"""
        (replayed,) = self.run(self.experiment_from_trace(trace)).traces
        matches = (
            replayed.points == trace.points
            and replayed.gradient_count == trace.gradient_count
            and (trace.stream_id is None or replayed.stream_id == trace.stream_id)
        )
        if not matches:
            logger.warning(
                f"Replay of {trace.label()} on {trace.dataset} diverged from the stored points"
            )
        return replayed, matches
