# qsvrg/services/oracles.py

"""
Stochastic Hessian oracles.

Every data oracle is stored in one normalized form. With X the design matrix, n its row
count and L̄ = tr(XᵀX)/n, the user objective g = scale·f + g(0) has Hessian

    scale·H = ridge_weight·I + (row_weight/n)·XᵀX,     scale = ridge_weight + row_weight·L̄,

and the sampled matrix for row i (drawn with p_i = ‖x_i‖²/tr(XᵀX)) is

    Q_i = (ridge_weight·I + row_weight·L̄·u_iu_iᵀ)/scale,    u_i = x_i/‖x_i‖,

so E(Q) = H and Q ≤ I (L = 1). Least squares, ridge and (regularized) LDA differ only in
(ridge_weight, row_weight, scale, c).
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Protocol

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..core.design import DesignMatrix, Matrix, Vector, as_vector
from ..core.exceptions import DimensionError, QsvrgError
from ..core.quadratic import QuadraticProblem
from ..core.schemas import OracleKind
from ..utils.alias import AliasTable, alias_build, alias_sample, alias_sample_many
from ..utils.random_streams import RngStream

logger = logging.getLogger(__name__)


class HessianOracle(Protocol):
    """What Q-SVRG needs from a problem: sampled Q products and the anchor gradient"""

    @property
    def d(self) -> int: ...

    @property
    def n_components(self) -> int: ...

    @property
    def problem(self) -> QuadraticProblem: ...

    def sample_indices(self, rng: RngStream, size: int) -> NDArray[np.int64]: ...

    def apply_q_at(self, index: int, v: Vector) -> Vector: ...

    def apply_q_many(self, indices: NDArray[np.int64], vs: Matrix) -> Matrix: ...

    def hessian_apply_many(self, vs: Matrix) -> Matrix: ...

    def shifted_gradient_anchor(self, theta0: Vector) -> Vector: ...


@dataclass(frozen=True)
class StochasticOracle:
    design: DesignMatrix
    c: Vector
    sampler: AliasTable
    kind: OracleKind
    lam: float
    lbar: float
    scale: float
    g_offset: float
    ridge_weight: float
    row_weight: float
    mu_known: Optional[float] = None
    responses: Optional[Vector] = None
    L: float = 1.0

    @property
    def n(self) -> int:
        return self.design.n

    @property
    def d(self) -> int:
        return self.design.d

    @property
    def n_components(self) -> int:
        return self.design.n

    @cached_property
    def b(self) -> Vector:
        """−∇g(0) = scale·c"""
        return self.scale * self.c

    @cached_property
    def problem(self) -> QuadraticProblem:
        return QuadraticProblem(
            c=self.c,
            hessian_apply=self.hessian_apply,
            dimension=self.d,
            L=self.L,
            mu=self.mu_known,
            scale=self.scale,
            g_offset=self.g_offset,
            dense_hessian=self.dense_hessian,
        )

    @property
    def max_component_smoothness(self) -> float:
        """max_i of the smoothness of the i-th term of g: λ + max‖x_i‖² for ridge"""
        return self.ridge_weight + self.row_weight * self.design.max_sq_norm

    @property
    def ridge_ratio(self) -> float:
        """λ/L̄ in g units; zero when the problem carries no ridge term"""
        return self.ridge_weight / (self.row_weight * self.lbar)

    # Hessian products

    def hessian_apply(self, v: Vector) -> Vector:
        x = self.design.rows
        data = x.T @ (x @ v)
        return (self.ridge_weight * v + (self.row_weight / self.n) * data) / self.scale

    def hessian_apply_many(self, vs: Matrix) -> Matrix:
        x = self.design.rows
        data = (vs @ x.T) @ x
        return (self.ridge_weight * vs + (self.row_weight / self.n) * data) / self.scale

    def dense_hessian(self) -> Matrix:
        h = (self.row_weight / self.n) * self.design.gram()
        h[np.diag_indices_from(h)] += self.ridge_weight
        return h / self.scale

    def full_gradient(self, theta: Vector) -> Vector:
        """∇f(θ) = Hθ − c"""
        return self.hessian_apply(theta) - self.c

    def gradient_g(self, theta: Vector) -> Vector:
        """∇g(θ) = scale·(Hθ − c), computed in one pass over the rows"""
        x = self.design.rows
        return self.ridge_weight * theta + (self.row_weight / self.n) * (x.T @ (x @ theta)) - self.b

    def shifted_gradient_anchor(self, theta0: Vector) -> Vector:
        """c̃ = c − Hθ₀ without materializing H"""
        if self.responses is not None and self.row_weight == 1.0:
            # Xᵀ(Y − Xθ₀)/(n·scale), the residual form of the least-squares anchor
            residual = self.responses - self.design.matvec(theta0)
            data = self.design.rmatvec(residual) / self.n
            return (data - self.ridge_weight * theta0) / self.scale
        return -self.full_gradient(theta0)

    # Sampled Q

    def sample_indices(self, rng: RngStream, size: int) -> NDArray[np.int64]:
        return alias_sample_many(self.sampler, rng, size)

    def apply_q_at(self, index: int, v: Vector) -> Vector:
        row = self.design.rows[index]
        # L̄·u uᵀv = L̄·x (xᵀv)/‖x‖²
        coef = self.row_weight * self.lbar * float(row @ v) / self.design.row_sq_norms[index]
        return (self.ridge_weight * v + coef * row) / self.scale

    def apply_q_many(self, indices: NDArray[np.int64], vs: Matrix) -> Matrix:
        rows = self.design.rows[indices]
        proj = np.einsum("ij,ij->i", rows, vs) / self.design.row_sq_norms[indices]
        coef = (self.row_weight * self.lbar) * proj
        return (self.ridge_weight * vs + coef[:, None] * rows) / self.scale

    # Finite-sum view of g used by the baseline methods

    def row_response(self, index: int) -> Vector:
        """Constant part r_i of the i-th term gradient; the r_i average to scale·c"""
        if self.responses is not None and self.row_weight == 1.0:
            return self.responses[index] * self.design.rows[index]
        return self.b


@dataclass(frozen=True)
class ExactHessianOracle:
    """Q_k ≡ H: the deterministic instance of the stochastic Hessian assumption"""

    hessian: Matrix
    c: Vector
    mu_known: Optional[float] = None

    @property
    def d(self) -> int:
        return self.hessian.shape[0]

    @property
    def n_components(self) -> int:
        return 1

    @cached_property
    def problem(self) -> QuadraticProblem:
        return QuadraticProblem.from_matrix(self.hessian, self.c, mu=self.mu_known)

    def sample_indices(self, rng: RngStream, size: int) -> NDArray[np.int64]:
        return np.zeros(size, dtype=np.int64)

    def apply_q_at(self, index: int, v: Vector) -> Vector:
        return self.hessian @ v

    def apply_q_many(self, indices: NDArray[np.int64], vs: Matrix) -> Matrix:
        return vs @ self.hessian

    def hessian_apply_many(self, vs: Matrix) -> Matrix:
        return vs @ self.hessian

    def shifted_gradient_anchor(self, theta0: Vector) -> Vector:
        return self.c - self.hessian @ theta0


def exact_hessian_oracle(hessian: ArrayLike, c: ArrayLike, mu: Optional[float] = None):
    h = np.array(hessian, dtype=np.float64)
    h.setflags(write=False)
    oracle = ExactHessianOracle(hessian=h, c=as_vector(c, "c", h.shape[0]), mu_known=mu)
    _ = oracle.problem  # validates symmetry and shape
    return oracle


def _as_design(x) -> DesignMatrix:
    return x if isinstance(x, DesignMatrix) else DesignMatrix.from_rows(x)


def row_probabilities(design: DesignMatrix) -> Vector:
    """p_i = ‖x_i‖²/tr(XᵀX)"""
    return design.row_sq_norms / design.trace_xtx


def _responses(design: DesignMatrix, y) -> Vector:
    y = as_vector(y, "Y")
    if y.shape[0] != design.n:
        raise DimensionError(f"Y has length {y.shape[0]}, design matrix has {design.n} rows")
    return y


def least_squares_oracle(x, y) -> StochasticOracle:
    """g(θ) = ‖Xθ − Y‖²/(2n) with H = XᵀX/tr(XᵀX), c = XᵀY/tr(XᵀX)"""
    design = _as_design(x)
    y = _responses(design, y)
    c = design.rmatvec(y) / design.trace_xtx
    oracle = StochasticOracle(
        design=design,
        c=c,
        sampler=alias_build(design.row_sq_norms),
        kind=OracleKind.LEAST_SQUARES,
        lam=0.0,
        lbar=design.lbar,
        scale=design.lbar,
        g_offset=float(y @ y) / (2 * design.n),
        ridge_weight=0.0,
        row_weight=1.0,
        responses=y,
    )
    logger.debug(f"Least-squares oracle: n={design.n}, d={design.d}, L̄={design.lbar:.4g}")
    return oracle


def ridge_oracle(x, y, lam: float) -> StochasticOracle:
    """g(θ) = ‖Xθ − Y‖²/(2n) + λ‖θ‖²/2 with H = (λI + XᵀX/n)/(λ + L̄)"""
    if not lam > 0:
        raise QsvrgError(f"ridge lambda must be positive, got {lam}")
    design = _as_design(x)
    y = _responses(design, y)
    scale = lam + design.lbar
    c = design.rmatvec(y) / (design.n * scale)
    oracle = StochasticOracle(
        design=design,
        c=c,
        sampler=alias_build(design.row_sq_norms),
        kind=OracleKind.RIDGE,
        lam=float(lam),
        lbar=design.lbar,
        scale=scale,
        g_offset=float(y @ y) / (2 * design.n),
        ridge_weight=float(lam),
        row_weight=1.0,
        mu_known=lam / scale,
        responses=y,
    )
    logger.debug(
        f"Ridge oracle: n={design.n}, d={design.d}, lambda={lam:.4g}, mu={lam / scale:.4g}"
    )
    return oracle


def apply_sampled_q(oracle: HessianOracle, rng: RngStream, v) -> Vector:
    """Draw i(k) and return Q_k v in O(d)"""
    if isinstance(oracle, StochasticOracle):
        v = as_vector(v, "v", oracle.d)
        return oracle.apply_q_at(alias_sample(oracle.sampler, rng), v)
    index = int(oracle.sample_indices(rng, 1)[0])
    return oracle.apply_q_at(index, as_vector(v, "v", oracle.d))


def shifted_gradient_anchor(oracle: HessianOracle, theta0) -> Vector:
    return oracle.shifted_gradient_anchor(as_vector(theta0, "theta0", oracle.d))
