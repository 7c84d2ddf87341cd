# qsvrg/services/verification_service.py

"""
Numerical checks of the convergence theory on small built-in problems.

Each suite returns CheckResult rows (bound, measured value, pass flag). Monte Carlo suites
draw every replicate from fixed seeded streams, so a suite gives the same numbers on every
run.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np
from scipy import stats

from ..core.design import Matrix, Vector
from ..core.exceptions import ConfigurationError
from ..core.quadratic import (
    ReferenceSolution,
    expected_iterate,
    reference_minimizer,
    strong_convexity,
)
from ..core.schemas import CheckResult, OracleKind, VerificationReport, VerifySuite
from ..storage.datasets import synthetic_problem
from ..utils.alias import alias_build, alias_sample_many
from ..utils.random_streams import RngStream
from .lda import lda_oracle
from .oracles import StochasticOracle, least_squares_oracle, ridge_oracle
from .solvers import qsvrg_replicates

logger = logging.getLogger(__name__)

VERIFY_SEED = 0
THEOREM_SCHEDULES = ((200, 1), (500, 1), (200, 2))
BIAS_TOLERANCE = 1e-12
BIAS_MAX_K = 1000
BIAS_CROSS_CHECKS = (1, 10, 100, BIAS_MAX_K)
EXPECTED_ITERATE_TOLERANCE = 1e-9
VARIANCE_MAX_K = 50
UNBIASEDNESS_VECTORS = 5
STANDARD_ERRORS = 5.0
SAMPLER_CATEGORIES = 10
SAMPLER_P_THRESHOLD = 1e-3
SAMPLER_MAX_FAILURES = 1
CONTRACTION_EPOCHS = (2, 5)
CONTRACTION_SLACK = 1.5


@dataclass(frozen=True)
class VerificationProblem:
    oracle: StochasticOracle
    reference: ReferenceSolution
    mu: float


def least_squares_test_problem(n: int = 50, d: int = 5, kappa: float = 20.0, seed: int = 0):
    design, y = synthetic_problem(n, d, kappa, seed)
    oracle = least_squares_oracle(design, y)
    return VerificationProblem(
        oracle=oracle,
        reference=reference_minimizer(oracle.problem),
        mu=strong_convexity(oracle.problem),
    )


def f_gaps(oracle, thetas: Matrix, reference: ReferenceSolution) -> Vector:
    """f(θ) − f* for every row of ``thetas``, clamped at zero"""
    h_thetas = oracle.hessian_apply_many(thetas)
    values = 0.5 * np.einsum("ij,ij->i", thetas, h_thetas) - thetas @ oracle.problem.c
    return np.maximum(values - reference.f_star, 0.0)


class VerificationService:
    """Runs the verification suites; replicate counts can be lowered for quick runs"""

    def __init__(
        self,
        theorem_replicates: int = 1000,
        variance_replicates: int = 10_000,
        unbiasedness_samples: int = 100_000,
        sampler_draws: int = 1_000_000,
        sampler_seeds: int = 20,
        contraction_replicates: int = 100,
    ):
        counts = {
            "theorem_replicates": theorem_replicates,
            "variance_replicates": variance_replicates,
            "unbiasedness_samples": unbiasedness_samples,
            "sampler_draws": sampler_draws,
            "sampler_seeds": sampler_seeds,
            "contraction_replicates": contraction_replicates,
        }
        for name, value in counts.items():
            if value < 2:
                raise ConfigurationError(f"{name} must be at least 2, got {value}")
        self.theorem_replicates = theorem_replicates
        self.variance_replicates = variance_replicates
        self.unbiasedness_samples = unbiasedness_samples
        self.sampler_draws = sampler_draws
        self.sampler_seeds = sampler_seeds
        self.contraction_replicates = contraction_replicates

    def get_suite(self, suite: VerifySuite) -> Callable[[], List[CheckResult]]:
        """Get the check function for a specific suite"""
        suites: Dict[VerifySuite, Callable[[], List[CheckResult]]] = {
            VerifySuite.UNBIASEDNESS: self.check_unbiasedness,
            VerifySuite.THEOREM: self.check_theorem,
            VerifySuite.BIAS: self.check_bias,
            VerifySuite.VARIANCE: self.check_variance,
            VerifySuite.SAMPLER: self.check_sampler,
            VerifySuite.CONTRACTION: self.check_contraction,
        }
        check = suites.get(VerifySuite(suite))
        if check is None:
            raise ConfigurationError(f"Unknown verification suite: {suite}")
        return check

    def run(self, suite: VerifySuite) -> List[VerificationReport]:
        """One report per suite, run sequentially; ``all`` expands to every suite"""
        suite = VerifySuite(suite)
        if suite == VerifySuite.ALL:
            selected = [s for s in VerifySuite if s != VerifySuite.ALL]
        else:
            selected = [suite]
        reports = []
        for name in selected:
            started = time.perf_counter()
            checks = self.get_suite(name)()
            report = VerificationReport(
                suite=name, checks=checks, elapsed_seconds=time.perf_counter() - started
            )
            logger.info(
                f"Suite {name.value}: {len(checks) - len(report.failures)}/{len(checks)} checks "
                f"passed in {report.elapsed_seconds:.2f}s"
            )
            reports.append(report)
        return reports

    # Suites

    def check_unbiasedness(self) -> List[CheckResult]:
        """Sample means of Q·v against H·v, componentwise in standard errors"""
        design, y = synthetic_problem(200, 8, 10.0, VERIFY_SEED)
        labels = np.where(y > 0, 2, 1)
        lam = design.lbar / design.n
        oracles = {
            OracleKind.LEAST_SQUARES: least_squares_oracle(design, y),
            OracleKind.RIDGE: ridge_oracle(design, y, lam),
            OracleKind.LDA: lda_oracle(design.rows, labels, target_class=1)[0],
        }
        samples = self.unbiasedness_samples
        results = []
        for stream, (kind, oracle) in enumerate(oracles.items()):
            rng = RngStream(VERIFY_SEED, stream_id=stream)
            vectors = rng.normal((UNBIASEDNESS_VECTORS, oracle.d))
            for j, v in enumerate(vectors):
                indices = oracle.sample_indices(rng, samples)
                qv = oracle.apply_q_many(indices, np.broadcast_to(v, (samples, oracle.d)))
                mean = qv.mean(axis=0)
                se = qv.std(axis=0, ddof=1) / math.sqrt(samples)
                target = oracle.hessian_apply(v)
                error = np.abs(mean - target)
                # components with a degenerate sample carry only rounding error
                allowed = STANDARD_ERRORS * se + 1e-12 * max(1.0, float(np.max(np.abs(target))))
                worst = int(np.argmax(error / allowed))
                results.append(
                    CheckResult(
                        name=f"unbiasedness/{kind.value}/v{j}",
                        bound=float(allowed[worst]),
                        measured=float(error[worst]),
                        passed=bool(np.all(error <= allowed)),
                        detail=f"worst component {worst}, {samples} samples",
                    )
                )
        return results

    def check_theorem(self) -> List[CheckResult]:
        """Mean f(T^l_m(0)) − f* against (9/(αμm))^l·(f(0) − f*), widened by 3 CV/√R"""
        problem = least_squares_test_problem()
        oracle, reference, mu = problem.oracle, problem.reference, problem.mu
        alpha = 1.0
        initial_gap = -reference.f_star
        replicates = self.theorem_replicates
        results = []
        for stream, (m, l_epochs) in enumerate(THEOREM_SCHEDULES):
            rng = RngStream(VERIFY_SEED, stream_id=stream)
            finals = qsvrg_replicates(oracle, alpha, m, l_epochs, replicates, rng)
            gaps = f_gaps(oracle, finals, reference)
            mean = float(gaps.mean())
            cv = float(gaps.std(ddof=1)) / mean if mean > 0 else 0.0
            rate = 9.0 / (alpha * mu * m)
            bound = rate**l_epochs * initial_gap * (1.0 + 3.0 * cv / math.sqrt(replicates))
            results.append(
                CheckResult(
                    name=f"theorem/m={m},l={l_epochs}",
                    bound=bound,
                    measured=mean,
                    passed=mean <= bound,
                    detail=f"mu={mu:.4g}, rate={rate:.4g}, cv={cv:.3g}, {replicates} replicates",
                )
            )
        return results

    def check_bias(self) -> List[CheckResult]:
        """Closed-form (Eθ̄_k − θ*)ᵀH(Eθ̄_k − θ*)·αk/‖θ*‖² ≤ 1 for k = 1..BIAS_MAX_K"""
        problem = least_squares_test_problem()
        alpha = 1.0
        h = problem.oracle.dense_hessian()
        eigenvalues, eigenvectors = np.linalg.eigh(h)
        theta_star = problem.reference.theta_star
        z = eigenvectors.T @ theta_star
        # Eθ̄_k − θ* = −(1/k)·Σ_{i<k}(I − αH)^i θ*, diagonal in the eigenbasis
        contraction = 1.0 - alpha * eigenvalues
        power = np.ones_like(eigenvalues)
        partial = np.zeros_like(eigenvalues)
        norm_sq = float(theta_star @ theta_star)
        worst_k, worst = 0, -math.inf
        drift = 0.0
        for k in range(1, BIAS_MAX_K + 1):
            partial += power
            power *= contraction
            mean_gap = partial * z / k
            ratio = float(np.sum(eigenvalues * mean_gap**2)) * alpha * k / norm_sq
            if ratio > worst:
                worst_k, worst = k, ratio
            if k in BIAS_CROSS_CHECKS:
                # E(θ_k) from the eigenbasis against the operator recursion
                spectral = theta_star - eigenvectors @ (power * z)
                direct = expected_iterate(problem.oracle.problem, theta_star, alpha, k)
                drift = max(drift, float(np.linalg.norm(spectral - direct)) / math.sqrt(norm_sq))
        bound = 1.0 + BIAS_TOLERANCE
        return [
            CheckResult(
                name="bias/closed-form",
                bound=bound,
                measured=worst,
                passed=worst <= bound and drift <= EXPECTED_ITERATE_TOLERANCE,
                detail=(
                    f"max over k in [1, {BIAS_MAX_K}] attained at k={worst_k}; "
                    f"E(theta_k) cross-check drift {drift:.2e}"
                ),
            )
        ]

    def check_variance(self) -> List[CheckResult]:
        """E‖β_k − θ*‖² ≤ (α/μ)θ*ᵀHθ* along β_{k+1} = β_k − α(Q_kβ_k − c), β₀ = θ*"""
        design, y = synthetic_problem(30, 3, 10.0, VERIFY_SEED)
        oracle = least_squares_oracle(design, y)
        reference = reference_minimizer(oracle.problem)
        mu = strong_convexity(oracle.problem)
        alpha = 1.0
        theta_star = reference.theta_star
        bound = alpha / mu * float(theta_star @ oracle.hessian_apply(theta_star))

        replicates = self.variance_replicates
        rng = RngStream(VERIFY_SEED, stream_id=len(THEOREM_SCHEDULES))
        beta = np.tile(theta_star, (replicates, 1))
        c = oracle.problem.c
        worst_k, worst_margin, worst_mean, worst_limit = 0, math.inf, 0.0, bound
        for k in range(1, VARIANCE_MAX_K + 1):
            indices = oracle.sample_indices(rng, replicates)
            beta = beta - alpha * (oracle.apply_q_many(indices, beta) - c)
            sq = np.sum((beta - theta_star) ** 2, axis=1)
            mean = float(sq.mean())
            limit = bound + STANDARD_ERRORS * float(sq.std(ddof=1)) / math.sqrt(replicates)
            if limit - mean < worst_margin:
                worst_k, worst_margin, worst_mean, worst_limit = k, limit - mean, mean, limit
        return [
            CheckResult(
                name="variance/beta-recursion",
                bound=worst_limit,
                measured=worst_mean,
                passed=worst_margin >= 0,
                detail=f"tightest at k={worst_k}; (alpha/mu)theta*'H theta* = {bound:.4g}",
            )
        ]

    def check_sampler(self) -> List[CheckResult]:
        """Chi-square goodness of fit of the alias sampler, one test per seed"""
        weights = np.arange(1.0, SAMPLER_CATEGORIES + 1.0)
        table = alias_build(weights)
        expected = weights / weights.sum() * self.sampler_draws
        p_values = []
        for seed in range(self.sampler_seeds):
            draws = alias_sample_many(table, RngStream(seed, stream_id=0), self.sampler_draws)
            counts = np.bincount(draws, minlength=SAMPLER_CATEGORIES)
            p_values.append(float(stats.chisquare(counts, f_exp=expected).pvalue))

        failures = sum(p < SAMPLER_P_THRESHOLD for p in p_values)
        listing = ", ".join(f"{seed}:{p:.3g}" for seed, p in enumerate(p_values))
        return [
            CheckResult(
                name="sampler/chi-square",
                bound=float(SAMPLER_MAX_FAILURES),
                measured=float(failures),
                passed=failures <= SAMPLER_MAX_FAILURES,
                detail=f"seeds with p < {SAMPLER_P_THRESHOLD:g}; p-values {listing}",
            )
        ]

    def check_contraction(self) -> List[CheckResult]:
        """Per-epoch contraction of the mean gap over epochs 2-5 against 1.5·9/(αμm)"""
        problem = least_squares_test_problem()
        oracle, reference, mu = problem.oracle, problem.reference, problem.mu
        alpha = 1.0
        m = math.ceil(18.0 / (alpha * mu))
        rate = 9.0 / (alpha * mu * m)
        first, last = CONTRACTION_EPOCHS
        replicates = self.contraction_replicates

        rng = RngStream(VERIFY_SEED, stream_id=len(THEOREM_SCHEDULES) + 1)
        thetas = np.zeros((replicates, oracle.d))
        gaps: List[float] = []
        for _ in range(last):
            thetas = qsvrg_replicates(oracle, alpha, m, 1, replicates, rng, start=thetas)
            gaps.append(float(f_gaps(oracle, thetas, reference).mean()))
        factor = _epoch_factor(gaps, first, last)
        bound = CONTRACTION_SLACK * rate
        return [
            CheckResult(
                name=f"contraction/m={m}",
                bound=bound,
                measured=factor,
                passed=factor <= bound,
                detail=f"epochs {first}-{last}, {replicates} replicates, mu={mu:.4g}",
            )
        ]


def _epoch_factor(gaps: List[float], first: int, last: int) -> float:
    """Geometric mean ratio of successive epoch gaps from epoch ``first − 1`` to ``last``"""
    start, end = gaps[first - 2], gaps[last - 1]
    if start <= 0 or end <= 0:
        return 0.0
    return (end / start) ** (1.0 / (last - first + 1))


def suite_summary(reports: List[VerificationReport]) -> Tuple[int, int]:
    """(passed, total) check counts over several reports"""
    total = sum(len(r.checks) for r in reports)
    failed = sum(len(r.failures) for r in reports)
    return total - failed, total
