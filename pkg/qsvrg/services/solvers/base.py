# qsvrg/services/solvers/base.py

import logging
import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import ClassVar, List, Optional, Sequence, Tuple

import numpy as np

from ...core.config import get_config
from ...core.design import Vector
from ...core.exceptions import DivergenceError, QsvrgError
from ...core.quadratic import ReferenceSolution, reference_minimizer, suboptimality
from ...core.schemas import Method
from ...utils.random_streams import RngStream

logger = logging.getLogger(__name__)


@dataclass
class RunTrace:
    method: Method
    points: List[Tuple[float, float]]
    final_theta: Vector
    gradient_count: int
    alpha: float
    l: Optional[int] = None  # noqa: E741
    m: Optional[int] = None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def final_suboptimality(self) -> float:
        return self.points[-1][1]


def effective_passes(gradient_count: int, n: int) -> float:
    """Stochastic gradients divided by the number of data points"""
    if n < 1:
        raise QsvrgError(f"n must be positive, got {n}")
    return gradient_count / n


def geometric_checkpoints(
    budget: float, start: Optional[float] = None, ratio: Optional[float] = None
) -> List[float]:
    """start, start·ratio, start·ratio², … below budget, then budget itself"""
    config = get_config()
    start = config.checkpoint_start if start is None else start
    ratio = config.checkpoint_ratio if ratio is None else ratio
    grid = []
    value = start
    while value < budget:
        grid.append(value)
        value *= ratio
    grid.append(float(budget))
    return grid


class CheckpointSchedule:
    """Tracks which requested pass counts have been reached"""

    def __init__(self, passes: Sequence[float]):
        self.targets = list(passes)
        self._next = 0

    def due(self, passes: float) -> bool:
        if self._next >= len(self.targets) or passes < self.targets[self._next]:
            return False
        while self._next < len(self.targets) and self.targets[self._next] <= passes:
            self._next += 1
        return True


class SolverBase(ABC):
    """Common run state: random stream, gradient accounting and the checkpoint trace"""

    method: ClassVar[Method]

    def __init__(
        self,
        oracle,
        seed: int = 0,
        stream_id: int = 0,
        checkpoints: Optional[Sequence[float]] = None,
        reference: Optional[ReferenceSolution] = None,
    ):
        self.oracle = oracle
        self.problem = oracle.problem
        self.n = oracle.n_components
        self.d = oracle.d
        self.seed = seed
        self.rng = RngStream(seed, stream_id)
        self._reference = reference
        self.schedule = CheckpointSchedule(
            checkpoints if checkpoints is not None else geometric_checkpoints(self.budget_passes())
        )
        self.gradient_count = 0
        self.points: List[Tuple[float, float]] = []

    @property
    def reference(self) -> ReferenceSolution:
        if self._reference is None:
            self._reference = reference_minimizer(self.problem)
        return self._reference

    @abstractmethod
    def budget_passes(self) -> float:
        """Effective passes the run will spend"""

    @abstractmethod
    def run(self) -> RunTrace:
        pass

    @property
    def passes(self) -> float:
        return effective_passes(self.gradient_count, self.n)

    def _suboptimality(self, theta: Vector) -> float:
        return suboptimality(self.problem, theta, self.reference)

    def _record(self, theta: Vector, value: Optional[float] = None):
        passes = self.passes
        if self.points and passes <= self.points[-1][0]:
            return
        if value is None:
            value = self._suboptimality(theta)
        self.points.append((passes, value))

    def _check_finite(self, theta: Vector, epoch: int, step: int):
        if not np.all(np.isfinite(theta)):
            logger.error(f"{self.method.value} diverged at epoch {epoch}, step {step}")
            raise DivergenceError(self.method.value, epoch, step)

    def _finish(
        self, theta: Vector, alpha: float, started: float, l=None, m=None  # noqa: E741
    ) -> RunTrace:
        elapsed = time.perf_counter() - started
        trace = RunTrace(
            method=self.method,
            points=list(self.points),
            final_theta=theta,
            gradient_count=self.gradient_count,
            alpha=alpha,
            l=l,
            m=m,
            wall_time=elapsed,
        )
        final = trace.final_suboptimality if trace.points else math.nan
        logger.info(
            f"{self.method.value} seed={self.seed}: {self.passes:.2f} passes, "
            f"suboptimality {final:.3e} in {elapsed:.2f}s"
        )
        return trace


class StreamingSolverBase(SolverBase):
    """Methods that run one stochastic gradient per step until a pass budget is spent"""

    def __init__(self, oracle, target_passes: float, **kwargs):
        if not target_passes > 0:
            raise QsvrgError(f"target_passes must be positive, got {target_passes}")
        self.target_passes = float(target_passes)
        super().__init__(oracle, **kwargs)
        self.target_count = math.ceil(self.target_passes * self.n)
        self.stride = max(1, math.ceil(self.n / 4))

    def budget_passes(self) -> float:
        return self.target_passes

    def _maybe_record(self, theta: Vector, force: bool = False) -> bool:
        if self.schedule.due(self.passes) or force:
            self._record(theta)
            return True
        return False
