# qsvrg/services/solver_service.py

import logging
import math
from typing import Callable, Dict, Optional

from ..core.exceptions import ConfigurationError
from ..core.quadratic import ReferenceSolution
from ..core.schemas import Method, SolverConfig
from .oracles import StochasticOracle
from .solvers import (
    RunTrace,
    auto_schedule_for_budget,
    lsvrg_uniform,
    qsvrg,
    sag_nonuniform,
    sgd_nonuniform_averaged,
    sgd_uniform_averaged,
    svrg_nonuniform,
)
from .solvers.svrg import INNER_PER_ROW

logger = logging.getLogger(__name__)


class SolverService:
    """Runs a SolverConfig against an oracle, filling in the benchmark defaults"""

    def __init__(self, oracle: StochasticOracle, reference: Optional[ReferenceSolution] = None):
        self.oracle = oracle
        self.reference = reference

    def get_runner(self, method: Method) -> Callable[[SolverConfig], RunTrace]:
        """Get the runner for a specific method"""
        runners: Dict[Method, Callable[[SolverConfig], RunTrace]] = {
            Method.QSVRG: self._run_qsvrg,
            Method.SGD_UNIFORM: self._streaming(sgd_uniform_averaged),
            Method.SGD_NONUNIFORM: self._streaming(sgd_nonuniform_averaged),
            Method.SAG_NONUNIFORM: self._streaming(sag_nonuniform),
            Method.SVRG_NONUNIFORM: self._run_svrg,
            Method.LSVRG_UNIFORM: self._streaming(lsvrg_uniform),
        }
        runner = runners.get(Method(method))
        if runner is None:
            raise ConfigurationError(f"Unknown method: {method}")
        return runner

    def run(self, config: SolverConfig) -> RunTrace:
        logger.info(
            f"Running {config.method.value} (seed={config.seed}, passes={config.target_passes})"
        )
        return self.get_runner(config.method)(config)

    def schedule(self, config: SolverConfig):
        """(l, m) for a Q-SVRG run: explicit values win, else the budgeted auto schedule"""
        if config.l is not None and config.m is not None:
            return config.l, config.m
        return auto_schedule_for_budget(
            config.target_passes, self.oracle.n, self.oracle.ridge_ratio
        )

    def svrg_epochs(self, config: SolverConfig) -> int:
        if config.epochs is not None:
            return config.epochs
        return max(1, math.floor(config.target_passes / (1 + INNER_PER_ROW)))

    def _checkpoints(self, config: SolverConfig):
        return config.checkpoint_passes or None

    def _run_qsvrg(self, config: SolverConfig) -> RunTrace:
        l_epochs, m = self.schedule(config)
        return qsvrg(
            self.oracle,
            alpha=config.alpha if config.alpha is not None else 1.0,
            m=m,
            l=l_epochs,
            seed=config.seed,
            stream_id=config.stream_id,
            checkpoints=self._checkpoints(config),
            reference=self.reference,
        )

    def _run_svrg(self, config: SolverConfig) -> RunTrace:
        return svrg_nonuniform(
            self.oracle,
            epochs=self.svrg_epochs(config),
            seed=config.seed,
            stream_id=config.stream_id,
            checkpoints=self._checkpoints(config),
            reference=self.reference,
        )

    def _streaming(self, runner):
        def run(config: SolverConfig) -> RunTrace:
            return runner(
                self.oracle,
                config.target_passes,
                seed=config.seed,
                stream_id=config.stream_id,
                checkpoints=self._checkpoints(config),
                reference=self.reference,
            )

        return run
