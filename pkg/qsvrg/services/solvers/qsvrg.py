# qsvrg/services/solvers/qsvrg.py

"""
Q-SVRG: l epochs of m variance-reduced inner steps

    θ_{k+1} = θ_k − α(Q_k(θ_k − θ₀) − c̃),    c̃ = c − Hθ₀,

each epoch restarting from the average of θ₀, …, θ_{m−1} (θ_m is computed but not
averaged). An epoch costs n + m stochastic gradients.
"""

import logging
import math
import time
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ...core.design import Matrix, Vector
from ...core.exceptions import ConfigurationError, QsvrgError
from ...core.quadratic import ReferenceSolution
from ...core.schemas import Method
from ...utils.random_streams import RngStream
from .base import RunTrace, SolverBase

logger = logging.getLogger(__name__)

AUTO_MIN_EPOCHS = 4


def _ceil(x: float) -> int:
    # N·λ/L̄ products like 1000·0.01 must not round up past the exact integer
    return math.ceil(round(x, 9))


def qsvrg_auto_schedule(N: int, n: int, lam: float, lbar: float) -> Tuple[int, int]:
    """l = max(4, ⌈N·min(1/n, λ/L̄)⌉), m = ⌊N/l⌋"""
    if N < AUTO_MIN_EPOCHS:
        raise ConfigurationError(f"N must be at least {AUTO_MIN_EPOCHS}, got {N}")
    if n < 1:
        raise ConfigurationError(f"n must be positive, got {n}")
    ratio = lam / lbar if lam > 0 else 0.0
    return _schedule_from_ratio(N, n, ratio)


def _schedule_from_ratio(N: int, n: int, ratio: float) -> Tuple[int, int]:
    l_epochs = max(AUTO_MIN_EPOCHS, _ceil(N * min(1.0 / n, ratio)))
    m = N // l_epochs
    if m < 1:
        raise ConfigurationError(f"schedule leaves no inner iterations (N={N}, l={l_epochs})")
    return l_epochs, m


def auto_schedule_for_budget(passes: float, n: int, ratio: float) -> Tuple[int, int]:
    """Largest auto schedule whose cost l(n + m) fits in ``passes`` effective passes"""
    budget = math.floor(passes * n)
    r = min(1.0 / n, ratio)
    N = math.floor(min(budget - AUTO_MIN_EPOCHS * n, budget / (1.0 + r * n)))
    if N < AUTO_MIN_EPOCHS:
        raise ConfigurationError(
            f"a budget of {passes} passes is too small for the automatic schedule "
            f"(at least {AUTO_MIN_EPOCHS} epochs of n + m gradients are needed)"
        )
    l_epochs, m = _schedule_from_ratio(N, n, ratio)
    while l_epochs * (n + m) > budget and N > AUTO_MIN_EPOCHS:
        N -= 1
        l_epochs, m = _schedule_from_ratio(N, n, ratio)
    return l_epochs, m


def theoretical_schedule(
    kappa: float, n: int, epsilon: float, initial_gap: float
) -> Tuple[int, int, int]:
    """m = ⌈9·max(eκ, n)⌉, l = ⌈log(gap/ε)/max(1, log(n/κ))⌉, N_ε = l(n + m)"""
    if kappa < 1:
        raise QsvrgError(f"condition number must be at least 1, got {kappa}")
    if n < 1:
        raise QsvrgError(f"n must be positive, got {n}")
    if not epsilon > 0:
        raise QsvrgError(f"epsilon must be positive, got {epsilon}")
    m = math.ceil(9.0 * max(math.e * kappa, n))
    if epsilon >= initial_gap:
        return 0, m, 0
    l_epochs = _ceil(math.log(initial_gap / epsilon) / max(1.0, math.log(n / kappa)))
    return l_epochs, m, l_epochs * (n + m)


class QSVRGSolver(SolverBase):
    method = Method.QSVRG

    def __init__(
        self,
        oracle,
        alpha: float,
        m: int,
        l: int,  # noqa: E741
        iterate_log: Optional[List[Vector]] = None,
        **kwargs,
    ):
        if m < 1 or l < 1:
            raise ConfigurationError(f"m and l must be at least 1, got m={m}, l={l}")
        L = oracle.problem.L
        if not (0 < alpha <= 1.0 / L):
            raise ConfigurationError(
                f"alpha must lie in (0, 1/L] = (0, {1.0 / L:.6g}], got {alpha}"
            )
        self.alpha = float(alpha)
        self.m = int(m)
        self.l = int(l)
        self.iterate_log = iterate_log
        super().__init__(oracle, **kwargs)

    def budget_passes(self) -> float:
        return self.l * (self.n + self.m) / self.n

    def epochs(self) -> Iterator[Vector]:
        """Yield the anchor θ₀ after each epoch"""
        oracle, alpha, m = self.oracle, self.alpha, self.m
        theta0 = np.zeros(self.d)
        for epoch in range(1, self.l + 1):
            c_tilde = oracle.shifted_gradient_anchor(theta0)
            self.gradient_count += self.n
            indices = oracle.sample_indices(self.rng, m)

            theta = theta0.copy()
            total = theta0.copy()
            if self.iterate_log is not None:
                self.iterate_log.append(theta.copy())
            for k in range(m):
                theta = theta - alpha * (oracle.apply_q_at(indices[k], theta - theta0) - c_tilde)
                if k < m - 1:
                    total += theta
                    if self.iterate_log is not None:
                        self.iterate_log.append(theta.copy())
            self._check_finite(theta, epoch, m)
            self.gradient_count += m

            theta0 = total / m
            self._check_finite(theta0, epoch, m)
            logger.debug(f"qsvrg epoch {epoch}/{self.l}: {self.passes:.2f} passes")
            yield theta0

    def run(self) -> RunTrace:
        started = time.perf_counter()
        theta0 = np.zeros(self.d)
        self._record(theta0)
        for epoch, theta0 in enumerate(self.epochs(), start=1):
            if self.schedule.due(self.passes) or epoch == self.l:
                self._record(theta0)
        return self._finish(theta0, self.alpha, started, l=self.l, m=self.m)


def qsvrg(
    oracle,
    alpha: float,
    m: int,
    l: int,  # noqa: E741
    seed: int = 0,
    checkpoints: Optional[Sequence[float]] = None,
    reference: Optional[ReferenceSolution] = None,
    stream_id: int = 0,
    iterate_log: Optional[List[Vector]] = None,
) -> RunTrace:
    """T^l_m(0) with a suboptimality checkpoint trace"""
    solver = QSVRGSolver(
        oracle,
        alpha=alpha,
        m=m,
        l=l,
        seed=seed,
        stream_id=stream_id,
        checkpoints=checkpoints,
        reference=reference,
        iterate_log=iterate_log,
    )
    return solver.run()


def qsvrg_final(
    oracle,
    alpha: float,
    m: int,
    l: int,  # noqa: E741
    seed: int = 0,
    stream_id: int = 0,
) -> Vector:
    """T^l_m(0) alone, without a reference solve"""
    solver = QSVRGSolver(
        oracle, alpha=alpha, m=m, l=l, seed=seed, stream_id=stream_id, checkpoints=[]
    )
    theta0 = np.zeros(oracle.d)
    for theta0 in solver.epochs():
        pass
    return theta0


def qsvrg_replicates(
    oracle,
    alpha: float,
    m: int,
    l: int,  # noqa: E741
    replicates: int,
    rng: RngStream,
    start: Optional[Vector] = None,
) -> Matrix:
    """Independent copies of T^l_m(start), advanced in lock-step; one row per replicate.

    ``start`` is a single vector shared by every replicate or one row per replicate.
    """
    if not (0 < alpha <= 1.0 / oracle.problem.L):
        raise ConfigurationError(f"alpha must lie in (0, 1/L], got {alpha}")
    if start is None:
        theta0 = np.zeros((replicates, oracle.d))
    else:
        start = np.asarray(start, dtype=np.float64)
        theta0 = start.copy() if start.ndim == 2 else np.tile(start, (replicates, 1))
    c = oracle.problem.c
    for _ in range(l):
        c_tilde = c[None, :] - oracle.hessian_apply_many(theta0)
        theta = theta0.copy()
        total = theta0.copy()
        for k in range(m):
            indices = oracle.sample_indices(rng, replicates)
            theta = theta - alpha * (oracle.apply_q_many(indices, theta - theta0) - c_tilde)
            if k < m - 1:
                total += theta
        theta0 = total / m
    return theta0
