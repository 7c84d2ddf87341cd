# qsvrg/core/quadratic.py

"""
Quadratic model f(θ) = ½θᵀHθ − cᵀθ and the exact quantities built on it.

The user-facing objective is g(θ) = scale·f(θ) + g_offset; suboptimality is always
reported in g. H is only ever reached through ``hessian_apply`` unless a dense copy is
requested, in which case the dimension cap from the configuration applies.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from .config import get_config
from .design import Matrix, Vector, as_vector
from .exceptions import (
    DimensionCapError,
    DimensionError,
    NonFiniteError,
    QsvrgError,
    SingularProblemError,
)

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class QuadraticProblem:
    c: Vector
    hessian_apply: Callable[[Vector], Vector]
    dimension: int
    L: float = 1.0
    mu: Optional[float] = None
    scale: float = 1.0
    g_offset: float = 0.0
    # Optional fast path returning H as a dense array
    dense_hessian: Optional[Callable[[], Matrix]] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise DimensionError(f"dimension must be positive, got {self.dimension}")
        if self.c.shape != (self.dimension,):
            raise DimensionError(f"c has shape {self.c.shape}, expected ({self.dimension},)")
        if self.L <= 0:
            raise QsvrgError(f"L must be positive, got {self.L}")
        if self.mu is not None and not (0 < self.mu <= self.L):
            raise QsvrgError(f"mu must satisfy 0 < mu <= L, got mu={self.mu}, L={self.L}")
        if self.scale <= 0:
            raise QsvrgError(f"scale must be positive, got {self.scale}")

    @classmethod
    def from_matrix(
        cls,
        hessian,
        c,
        L: Optional[float] = None,
        mu: Optional[float] = None,
        scale: float = 1.0,
        g_offset: float = 0.0,
    ) -> "QuadraticProblem":
        """Build a problem from an explicit symmetric matrix"""
        h = np.array(hessian, dtype=np.float64)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise DimensionError(f"Hessian must be square, got shape {h.shape}")
        if not np.allclose(h, h.T, rtol=0.0, atol=SYMMETRY_TOLERANCE):
            raise QsvrgError("Hessian is not symmetric")
        h.setflags(write=False)
        c_vec = as_vector(c, "c", h.shape[0])
        if L is None:
            L = float(max(np.linalg.eigvalsh(h)[-1], np.finfo(float).tiny))
        return cls(
            c=c_vec,
            hessian_apply=lambda v: h @ v,
            dimension=h.shape[0],
            L=L,
            mu=mu,
            scale=scale,
            g_offset=g_offset,
            dense_hessian=lambda: h.copy(),
        )


@dataclass(frozen=True)
class ReferenceSolution:
    theta_star: Vector
    f_star: float
    g_star: float
    residual_norm: float


def _check_theta(problem: QuadraticProblem, theta) -> Vector:
    return as_vector(theta, "theta", problem.dimension)


def evaluate_f(problem: QuadraticProblem, theta) -> float:
    """½θᵀ(Hθ) − cᵀθ with a single Hessian application"""
    theta = _check_theta(problem, theta)
    h_theta = problem.hessian_apply(theta)
    if not np.all(np.isfinite(h_theta)):
        raise NonFiniteError("H·theta")
    value = 0.5 * float(theta @ h_theta) - float(problem.c @ theta)
    if not math.isfinite(value):
        raise NonFiniteError("f(theta)")
    return value


def evaluate_g(problem: QuadraticProblem, theta) -> float:
    """User objective g(θ) = scale·f(θ) + g(0)"""
    return problem.scale * evaluate_f(problem, theta) + problem.g_offset


def materialize_hessian(problem: QuadraticProblem, cap: Optional[int] = None) -> Matrix:
    """Dense H whose column j is hessian_apply(e_j)"""
    if cap is None:
        cap = get_config().hessian_cap
    d = problem.dimension
    if d > cap:
        raise DimensionCapError(d, cap)

    if problem.dense_hessian is not None:
        h = np.array(problem.dense_hessian(), dtype=np.float64)
    else:
        h = np.empty((d, d))
        e = np.zeros(d)
        for j in range(d):
            e[j] = 1.0
            h[:, j] = problem.hessian_apply(e)
            e[j] = 0.0

    if not np.all(np.isfinite(h)):
        raise NonFiniteError("materialized Hessian")
    asym = float(np.max(np.abs(h - h.T)))
    if asym > SYMMETRY_TOLERANCE * max(1.0, float(np.max(np.abs(h)))):
        raise QsvrgError(f"hessian_apply is not symmetric (max asymmetry {asym:.3e})")
    return 0.5 * (h + h.T)


def strong_convexity(problem: QuadraticProblem, cap: Optional[int] = None) -> float:
    """Known μ, or the smallest eigenvalue of the materialized Hessian"""
    if problem.mu is not None:
        return problem.mu
    h = materialize_hessian(problem, cap)
    mu = float(linalg.eigvalsh(h, subset_by_index=[0, 0])[0])
    if mu <= 0:
        raise SingularProblemError(
            residual=abs(mu), tolerance=0.0, reason=f"smallest eigenvalue {mu:.3e} is not positive"
        )
    return mu


def reference_minimizer(
    problem: QuadraticProblem,
    cap: Optional[int] = None,
    tolerance: Optional[float] = None,
) -> ReferenceSolution:
    """Solve Hθ* = c by dense factorization with iterative refinement"""
    config = get_config()
    if tolerance is None:
        tolerance = config.reference_tolerance
    h = materialize_hessian(problem, cap)
    c = problem.c
    target = tolerance * max(1.0, float(np.linalg.norm(c)))

    try:
        factor = linalg.cho_factor(h, lower=True, check_finite=False)

        def solve(rhs):
            return linalg.cho_solve(factor, rhs, check_finite=False)

    except linalg.LinAlgError:
        logger.warning("Cholesky factorization failed; falling back to LU")
        try:
            lu = linalg.lu_factor(h, check_finite=False)
        except (linalg.LinAlgError, ValueError) as e:
            raise SingularProblemError(residual=math.inf, tolerance=target) from e

        def solve(rhs):
            return linalg.lu_solve(lu, rhs, check_finite=False)

    theta = solve(c)
    residual = c - problem.hessian_apply(theta)
    residual_norm = float(np.linalg.norm(residual))
    for step in range(config.refinement_steps):
        if residual_norm <= target or not math.isfinite(residual_norm):
            break
        logger.debug(f"Refinement step {step + 1}: residual {residual_norm:.3e}")
        theta = theta + solve(residual)
        residual = c - problem.hessian_apply(theta)
        residual_norm = float(np.linalg.norm(residual))

    if not math.isfinite(residual_norm) or residual_norm > target:
        raise SingularProblemError(residual=residual_norm, tolerance=target)

    f_star = -0.5 * float(theta @ c)
    g_star = problem.scale * f_star + problem.g_offset
    logger.info(f"Reference solve: d={problem.dimension}, residual={residual_norm:.3e}")
    return ReferenceSolution(
        theta_star=theta, f_star=f_star, g_star=g_star, residual_norm=residual_norm
    )


def expected_iterate(problem: QuadraticProblem, theta_star, alpha: float, k: int) -> Vector:
    """E(θ_k) = (I − (I − αH)^k)θ* for the recursion started at θ₀ = 0"""
    if k < 0:
        raise QsvrgError(f"k must be non-negative, got {k}")
    if not (0 < alpha * problem.L <= 1.0):
        raise QsvrgError(f"alpha must lie in (0, 1/L], got alpha={alpha}, L={problem.L}")
    theta_star = _check_theta(problem, theta_star)
    # gap_k = (I − αH)^k θ*
    gap = theta_star.copy()
    for _ in range(k):
        gap = gap - alpha * problem.hessian_apply(gap)
    return theta_star - gap


def suboptimality(problem: QuadraticProblem, theta, ref: ReferenceSolution) -> float:
    """g(θ) − g(θ*), clamped at zero"""
    return max(0.0, evaluate_g(problem, theta) - ref.g_star)
