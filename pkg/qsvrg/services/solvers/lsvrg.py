# qsvrg/services/solvers/lsvrg.py

import time
from typing import Optional, Sequence

import numpy as np

from ...core.quadratic import ReferenceSolution
from ...core.schemas import Method
from .base import RunTrace, StreamingSolverBase

STEP_FACTOR = 6.0


class LSVRGSolver(StreamingSolverBase):
    """
    Loopless SVRG with uniform rows and step 1/(6(λ + max‖x_i‖²)).

    After every step the reference point moves to the pre-step iterate with probability
    1/n; each move recomputes the full gradient and costs n gradients, as does the initial
    full gradient at θ₀ = 0.
    """

    method = Method.LSVRG_UNIFORM

    def __init__(self, oracle, target_passes: float, **kwargs):
        super().__init__(oracle, target_passes, **kwargs)
        self.step_size = 1.0 / (STEP_FACTOR * oracle.max_component_smoothness)
        self.refresh_probability = 1.0 / self.n
        self.refreshes = 0

    def run(self) -> RunTrace:
        started = time.perf_counter()
        oracle = self.oracle
        rows = oracle.design.rows
        gamma, weight, ridge = self.step_size, oracle.row_weight, oracle.ridge_weight
        n = self.n
        theta = np.zeros(self.d)
        self._record(theta)

        reference_point = theta.copy()
        reference_gradient = oracle.gradient_g(reference_point)
        self.gradient_count += n
        steps = 0

        while self.gradient_count < self.target_count:
            draws = self.rng.uniforms(2 * self.stride).reshape(self.stride, 2)
            for u_index, u_coin in draws:
                index = min(int(u_index * n), n - 1)
                row = rows[index]
                delta = theta - reference_point
                step = weight * float(row @ delta) * row + ridge * delta + reference_gradient
                previous = theta
                theta = theta - gamma * step
                self.gradient_count += 1
                steps += 1
                if u_coin < self.refresh_probability:
                    reference_point = previous
                    reference_gradient = oracle.gradient_g(reference_point)
                    self.gradient_count += n
                    self.refreshes += 1
                if self.gradient_count >= self.target_count:
                    break
            self._check_finite(theta, 0, steps)
            self._maybe_record(theta, force=self.gradient_count >= self.target_count)

        return self._finish(theta, gamma, started)


def lsvrg_uniform(
    oracle,
    target_passes: float,
    seed: int = 0,
    checkpoints: Optional[Sequence[float]] = None,
    reference: Optional[ReferenceSolution] = None,
    stream_id: int = 0,
) -> RunTrace:
    return LSVRGSolver(
        oracle,
        target_passes,
        seed=seed,
        stream_id=stream_id,
        checkpoints=checkpoints,
        reference=reference,
    ).run()
