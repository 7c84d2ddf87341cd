# qsvrg/services/solvers/svrg.py

import logging
import time
from typing import Optional, Sequence

import numpy as np

from ...core.design import Vector
from ...core.exceptions import QsvrgError
from ...core.quadratic import ReferenceSolution
from ...core.schemas import Method
from .base import RunTrace, SolverBase

logger = logging.getLogger(__name__)

INNER_PER_ROW = 2
STEP_FACTOR = 0.1


class SVRGSolver(SolverBase):
    """
    SVRG with rows drawn ∝ p_i, 2n inner steps per epoch and step 0.1/(λ + L̄).

    The component-gradient difference is reweighted by 1/(n p_i), which for these oracles
    is scale·Q_i(θ − θ̃). Each epoch restarts from its final iterate and costs 3n gradients.
    """

    method = Method.SVRG_NONUNIFORM

    def __init__(self, oracle, epochs: int, **kwargs):
        if epochs < 1:
            raise QsvrgError(f"epochs must be at least 1, got {epochs}")
        self.epochs = int(epochs)
        self.m = INNER_PER_ROW * oracle.n_components
        super().__init__(oracle, **kwargs)
        self.step_size = STEP_FACTOR / oracle.scale

    def budget_passes(self) -> float:
        return self.epochs * (self.n + self.m) / self.n

    def run(self, anchor: Optional[Vector] = None) -> RunTrace:
        """Run every epoch from ``anchor`` (zero when omitted), the first snapshot and iterate"""
        started = time.perf_counter()
        oracle = self.oracle
        gamma, scale = self.step_size, oracle.scale
        theta = np.zeros(self.d) if anchor is None else np.array(anchor, dtype=np.float64)
        self._record(theta)

        for epoch in range(1, self.epochs + 1):
            snapshot = theta.copy()
            snapshot_gradient = oracle.gradient_g(snapshot)
            self.gradient_count += self.n
            for index in oracle.sample_indices(self.rng, self.m):
                step = scale * oracle.apply_q_at(index, theta - snapshot) + snapshot_gradient
                theta = theta - gamma * step
            self.gradient_count += self.m
            self._check_finite(theta, epoch, self.m)
            logger.debug(f"svrg epoch {epoch}/{self.epochs}: {self.passes:.2f} passes")
            if self.schedule.due(self.passes) or epoch == self.epochs:
                self._record(theta)

        return self._finish(theta, gamma, started, m=self.m)


def svrg_nonuniform(
    oracle,
    epochs: int,
    seed: int = 0,
    checkpoints: Optional[Sequence[float]] = None,
    reference: Optional[ReferenceSolution] = None,
    stream_id: int = 0,
    anchor: Optional[Vector] = None,
) -> RunTrace:
    return SVRGSolver(
        oracle,
        epochs,
        seed=seed,
        stream_id=stream_id,
        checkpoints=checkpoints,
        reference=reference,
    ).run(anchor)
