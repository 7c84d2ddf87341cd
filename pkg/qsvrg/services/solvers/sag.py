# qsvrg/services/solvers/sag.py

import time
from typing import Optional, Sequence

import numpy as np

from ...core.quadratic import ReferenceSolution, evaluate_g
from ...core.schemas import Method
from .base import RunTrace, StreamingSolverBase


class SAGSolver(StreamingSolverBase):
    """
    SAG with rows drawn ∝ p_i and step 1/(λ + L̄).

    The data part of the i-th gradient is a_i·x_i with a_i = x_iᵀθ (times the row weight),
    so the memory is one scalar per row plus the running vector Σ a_i x_i. The ridge and
    response parts are applied exactly at every step. Checkpoints report the better of the
    last iterate and the running average of all iterates (θ₀ included).
    """

    method = Method.SAG_NONUNIFORM

    def __init__(self, oracle, target_passes: float, **kwargs):
        super().__init__(oracle, target_passes, **kwargs)
        self.step_size = 1.0 / oracle.scale
        # θ₀ = 0 makes the zero memory exact
        self.memory = np.zeros(self.n)
        self.memory_sum = np.zeros(self.d)

    def _output_suboptimality(self, theta, average) -> float:
        best = min(evaluate_g(self.problem, theta), evaluate_g(self.problem, average))
        return max(0.0, best - self.reference.g_star)

    def run(self) -> RunTrace:
        started = time.perf_counter()
        oracle = self.oracle
        rows = oracle.design.rows
        gamma = self.step_size
        weight, ridge, b = oracle.row_weight, oracle.ridge_weight, oracle.b
        theta = np.zeros(self.d)
        total = theta.copy()
        steps = 0
        self._record(theta)

        while self.gradient_count < self.target_count:
            block = min(self.stride, self.target_count - self.gradient_count)
            for index in oracle.sample_indices(self.rng, block):
                row = rows[index]
                fresh = weight * float(row @ theta)
                self.memory_sum += (fresh - self.memory[index]) * row
                self.memory[index] = fresh
                theta = theta - gamma * (self.memory_sum / self.n + ridge * theta - b)
                total += theta
                steps += 1
            self.gradient_count += block
            self._check_finite(theta, 0, steps)
            if self.schedule.due(self.passes) or self.gradient_count >= self.target_count:
                average = total / (steps + 1)
                self._record(theta, self._output_suboptimality(theta, average))

        average = total / (steps + 1)
        if evaluate_g(self.problem, average) < evaluate_g(self.problem, theta):
            theta = average
        return self._finish(theta, gamma, started)


def sag_nonuniform(
    oracle,
    target_passes: float,
    seed: int = 0,
    checkpoints: Optional[Sequence[float]] = None,
    reference: Optional[ReferenceSolution] = None,
    stream_id: int = 0,
) -> RunTrace:
    return SAGSolver(
        oracle,
        target_passes,
        seed=seed,
        stream_id=stream_id,
        checkpoints=checkpoints,
        reference=reference,
    ).run()
