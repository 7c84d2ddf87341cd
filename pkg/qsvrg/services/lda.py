# qsvrg/services/lda.py

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from ..core.design import DesignMatrix, Matrix, Vector, as_vector
from ..core.exceptions import DimensionError, QsvrgError, SingularProblemError
from ..core.quadratic import reference_minimizer
from ..core.schemas import OracleKind
from ..utils.alias import alias_build
from .oracles import StochasticOracle

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LdaModel:
    """Class statistics of a labelled sample; classes are labelled 1..K"""

    class_means: Matrix
    class_counts: np.ndarray
    centered_design: DesignMatrix
    trace_sigma: float
    lam: float = 0.0
    discriminant_vectors: Optional[Matrix] = None

    @property
    def n_classes(self) -> int:
        return self.class_means.shape[0]

    @property
    def n(self) -> int:
        return int(self.class_counts.sum())

    @property
    def is_solved(self) -> bool:
        return self.discriminant_vectors is not None


def fit_lda(points: ArrayLike, labels: ArrayLike, lam: float = 0.0) -> LdaModel:
    """Class means, counts and the centered design (rows (n−K)^{-1/2}(x_i − μ̂_{g(i)}))"""
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError(f"points must be a 2-d array, got shape {x.shape}")
    g = np.asarray(labels)
    if g.shape != (x.shape[0],):
        raise DimensionError(f"labels have shape {g.shape}, expected ({x.shape[0]},)")
    if not np.all(np.equal(np.mod(g, 1), 0)) or g.min() < 1:
        raise QsvrgError("labels must be integers in 1..K")
    if lam < 0:
        raise QsvrgError(f"lambda must be non-negative, got {lam}")
    g = g.astype(np.int64)

    n, k = x.shape[0], int(g.max())
    counts = np.bincount(g, minlength=k + 1)[1:]
    empty = [i + 1 for i in range(k) if counts[i] == 0]
    if empty:
        raise QsvrgError(f"classes {empty} have no observations")
    if n <= k:
        raise QsvrgError(f"need more observations than classes, got n={n}, K={k}")

    means = np.zeros((k, x.shape[1]))
    np.add.at(means, g - 1, x)
    means /= counts[:, None]
    centered = (x - means[g - 1]) / math.sqrt(n - k)
    try:
        design = DesignMatrix.from_rows(centered)
    except QsvrgError as e:
        raise SingularProblemError(
            residual=math.inf,
            tolerance=0.0,
            reason="every centered row vanishes, so the within-class covariance is zero",
        ) from e

    logger.debug(f"LDA statistics: n={n}, K={k}, tr(Sigma)={design.trace_xtx:.4g}")
    return LdaModel(
        class_means=means,
        class_counts=counts,
        centered_design=design,
        trace_sigma=design.trace_xtx,
        lam=float(lam),
    )


def class_oracle(model: LdaModel, target_class: int) -> StochasticOracle:
    """Oracle whose minimizer is (Σ̂ + λI)⁻¹μ̂_k, measured in f (scale 1)"""
    if not 1 <= target_class <= model.n_classes:
        raise QsvrgError(f"target class must be in 1..{model.n_classes}, got {target_class}")
    design = model.centered_design
    denom = model.lam + model.trace_sigma
    return StochasticOracle(
        design=design,
        c=model.class_means[target_class - 1] / denom,
        sampler=alias_build(design.row_sq_norms),
        kind=OracleKind.LDA,
        lam=model.lam,
        lbar=design.lbar,
        scale=1.0,
        g_offset=0.0,
        ridge_weight=model.lam / denom,
        row_weight=design.n / denom,
        mu_known=(model.lam / denom) if model.lam > 0 else None,
    )


def lda_oracle(
    points: ArrayLike, labels: ArrayLike, target_class: int, lam: float = 0.0
) -> Tuple[StochasticOracle, LdaModel]:
    """H = tr(Σ̂)⁻¹Σ̂, c = tr(Σ̂)⁻¹μ̂_k; regularized when lam > 0"""
    model = fit_lda(points, labels, lam=lam)
    return class_oracle(model, target_class), model


def solve_discriminants(
    model: LdaModel,
    method: str = "reference",
    passes: float = 50.0,
    seed: int = 0,
) -> LdaModel:
    """Fill Σ̂⁻¹μ̂_k for every class, by reference solve or by Q-SVRG"""
    vectors = np.empty_like(model.class_means)
    for k in range(1, model.n_classes + 1):
        oracle = class_oracle(model, k)
        if method == "reference":
            vectors[k - 1] = reference_minimizer(oracle.problem).theta_star
        elif method == "qsvrg":
            from .solvers.qsvrg import auto_schedule_for_budget, qsvrg_final

            l_epochs, m = auto_schedule_for_budget(passes, oracle.n, oracle.ridge_ratio)
            vectors[k - 1] = qsvrg_final(oracle, alpha=1.0, m=m, l=l_epochs, seed=seed, stream_id=k)
        else:
            raise QsvrgError(f"unknown discriminant solver {method!r}")
    logger.info(f"Solved {model.n_classes} discriminant vectors with {method}")
    return replace(model, discriminant_vectors=vectors)


def discriminant_scores(model: LdaModel, x: ArrayLike) -> Vector:
    """δ_k(x) = (x − ½μ̂_k)ᵀΣ̂⁻¹μ̂_k + log(n_k/n)"""
    if model.discriminant_vectors is None:
        raise QsvrgError("LDA model has no discriminant vectors; call solve_discriminants first")
    x = as_vector(x, "x", model.class_means.shape[1])
    w = model.discriminant_vectors
    shifted = x[None, :] - 0.5 * model.class_means
    return np.einsum("kd,kd->k", shifted, w) + np.log(model.class_counts / model.n)


def lda_classify(model: LdaModel, x: ArrayLike) -> int:
    """argmax_k δ_k(x); ties go to the lowest class"""
    return int(np.argmax(discriminant_scores(model, x))) + 1


def lda_predict(model: LdaModel, points: ArrayLike) -> np.ndarray:
    return np.array([lda_classify(model, row) for row in np.asarray(points, dtype=np.float64)])
