# qsvrg/services/solvers/sgd.py

import logging
import time
from typing import Optional, Sequence

import numpy as np

from ...core.exceptions import QsvrgError
from ...core.quadratic import ReferenceSolution
from ...core.schemas import Method
from .base import RunTrace, StreamingSolverBase

logger = logging.getLogger(__name__)


class AveragedSGDSolver(StreamingSolverBase):
    """
    Averaged SGD on g, reporting the running mean (θ₀ + … + θ_k)/(k + 1).

    uniform:     i uniform, step 1/(4(λ + max‖x_i‖²)),
                 θ ← θ − γ((x_iᵀθ − y_i)x_i + λθ)
    nonuniform:  i ∝ p_i, step 1/(λ + L̄),
                 θ ← θ − γ(scale·Q_iθ − scale·c), whose expectation is the full gradient
    """

    def __init__(self, oracle, target_passes: float, sampling: str = "uniform", **kwargs):
        if sampling not in ("uniform", "nonuniform"):
            raise QsvrgError(f"sampling must be 'uniform' or 'nonuniform', got {sampling!r}")
        self.sampling = sampling
        self.method = Method.SGD_UNIFORM if sampling == "uniform" else Method.SGD_NONUNIFORM
        super().__init__(oracle, target_passes, **kwargs)
        if sampling == "uniform":
            self.step_size = 1.0 / (4.0 * oracle.max_component_smoothness)
        else:
            self.step_size = 1.0 / oracle.scale

    def _draw(self, size: int):
        if self.sampling == "uniform":
            return self.rng.integers(self.n, size)
        return self.oracle.sample_indices(self.rng, size)

    def _gradient(self, index: int, theta):
        oracle = self.oracle
        if self.sampling == "uniform":
            row = oracle.design.rows[index]
            return (
                oracle.row_weight * float(row @ theta) * row
                + oracle.ridge_weight * theta
                - oracle.row_response(index)
            )
        return oracle.scale * oracle.apply_q_at(index, theta) - oracle.b

    def run(self) -> RunTrace:
        started = time.perf_counter()
        gamma = self.step_size
        theta = np.zeros(self.d)
        total = theta.copy()
        steps = 0
        self._record(theta)

        while self.gradient_count < self.target_count:
            block = min(self.stride, self.target_count - self.gradient_count)
            for index in self._draw(block):
                theta = theta - gamma * self._gradient(index, theta)
                total += theta
                steps += 1
            self.gradient_count += block
            self._check_finite(theta, 0, steps)
            self._maybe_record(total / (steps + 1), force=self.gradient_count >= self.target_count)

        return self._finish(total / (steps + 1), gamma, started)


def sgd_uniform_averaged(
    oracle,
    target_passes: float,
    seed: int = 0,
    checkpoints: Optional[Sequence[float]] = None,
    reference: Optional[ReferenceSolution] = None,
    stream_id: int = 0,
) -> RunTrace:
    return AveragedSGDSolver(
        oracle,
        target_passes,
        sampling="uniform",
        seed=seed,
        stream_id=stream_id,
        checkpoints=checkpoints,
        reference=reference,
    ).run()


def sgd_nonuniform_averaged(
    oracle,
    target_passes: float,
    seed: int = 0,
    checkpoints: Optional[Sequence[float]] = None,
    reference: Optional[ReferenceSolution] = None,
    stream_id: int = 0,
) -> RunTrace:
    return AveragedSGDSolver(
        oracle,
        target_passes,
        sampling="nonuniform",
        seed=seed,
        stream_id=stream_id,
        checkpoints=checkpoints,
        reference=reference,
    ).run()
