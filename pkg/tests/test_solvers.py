# tests/test_solvers.py

import math

import numpy as np
import pytest

from qsvrg.core.exceptions import ConfigurationError, DivergenceError, QsvrgError
from qsvrg.core.quadratic import reference_minimizer
from qsvrg.core.schemas import Method, SolverConfig
from qsvrg.services.oracles import exact_hessian_oracle, least_squares_oracle, ridge_oracle
from qsvrg.services.solver_service import SolverService
from qsvrg.services.solvers import (
    AveragedSGDSolver,
    LSVRGSolver,
    QSVRGSolver,
    SAGSolver,
    SVRGSolver,
    auto_schedule_for_budget,
    effective_passes,
    geometric_checkpoints,
    lsvrg_uniform,
    qsvrg,
    qsvrg_auto_schedule,
    qsvrg_final,
    sag_nonuniform,
    sgd_nonuniform_averaged,
    sgd_uniform_averaged,
    svrg_nonuniform,
    theoretical_schedule,
)
from qsvrg.storage.datasets import synthetic_problem

TREND_SLACK = 0.5


@pytest.fixture(scope="module")
def well_conditioned():
    """Ridge problem with κ = 2 and λ = L̄/n"""
    design, y = synthetic_problem(200, 5, 2.0, seed=1)
    oracle = ridge_oracle(design, y, design.lbar / design.n)
    return oracle, reference_minimizer(oracle.problem)


class TestAccounting:
    """Gradient counts and effective passes"""

    def test_effective_passes(self):
        assert effective_passes(208 + 416, 208) == 3.0
        assert effective_passes(0, 10) == 0.0
        assert effective_passes(4 * (50 + 50), 50) == 8.0

    def test_effective_passes_needs_rows(self):
        with pytest.raises(QsvrgError):
            effective_passes(10, 0)

    def test_qsvrg_gradient_count(self, ridge):
        oracle, ref = ridge
        trace = qsvrg(oracle, alpha=1.0, m=30, l=3, reference=ref)
        assert trace.gradient_count == 3 * (oracle.n + 30)
        assert trace.l == 3
        assert trace.m == 30

    def test_svrg_gradient_count(self, ridge):
        oracle, ref = ridge
        trace = svrg_nonuniform(oracle, epochs=4, reference=ref)
        assert trace.gradient_count == 4 * 3 * oracle.n

    @pytest.mark.parametrize(
        "runner", [sgd_uniform_averaged, sgd_nonuniform_averaged, sag_nonuniform]
    )
    def test_streaming_budget_is_exact(self, ridge, runner):
        oracle, ref = ridge
        trace = runner(oracle, 2.5, reference=ref)
        assert trace.gradient_count == math.ceil(2.5 * oracle.n)

    def test_lsvrg_refreshes_are_counted(self, ridge):
        oracle, ref = ridge
        solver = LSVRGSolver(oracle, 5.0, reference=ref)
        trace = solver.run()
        # every gradient is either a single step or part of an n-sized refresh
        steps = trace.gradient_count - oracle.n * (1 + solver.refreshes)
        assert steps > 0
        assert trace.gradient_count >= 5.0 * oracle.n


class TestQsvrgIterations:
    """Epoch structure of the Q-SVRG recursion"""

    def test_single_inner_step_returns_anchor(self):
        oracle = exact_hessian_oracle(np.eye(2), [3.0, -1.0])
        theta = qsvrg_final(oracle, alpha=1.0, m=1, l=1)
        np.testing.assert_array_equal(theta, [0.0, 0.0])
        # the next epoch is anchored at 0 again
        np.testing.assert_array_equal(qsvrg_final(oracle, alpha=1.0, m=1, l=2), [0.0, 0.0])

    def test_two_inner_steps_average_first_iterate(self):
        oracle = exact_hessian_oracle(np.eye(2), [3.0, -1.0])
        np.testing.assert_array_equal(qsvrg_final(oracle, alpha=1.0, m=2, l=1), [1.5, -0.5])

    @pytest.mark.parametrize("m", [1, 2, 5, 8])
    def test_average_excludes_last_iterate(self, ls_oracle, m):
        log = []
        trace = qsvrg(ls_oracle, alpha=1.0, m=m, l=1, seed=4, iterate_log=log)
        assert len(log) == m
        total = log[0].copy()
        for theta in log[1:]:
            total += theta
        np.testing.assert_array_equal(trace.final_theta, total / m)

    def test_deterministic(self, ridge):
        oracle, ref = ridge
        first = qsvrg(oracle, alpha=1.0, m=40, l=4, seed=9, reference=ref)
        second = qsvrg(oracle, alpha=1.0, m=40, l=4, seed=9, reference=ref)
        assert first.points == second.points
        np.testing.assert_array_equal(first.final_theta, second.final_theta)

    def test_seeds_differ(self, ridge):
        oracle, ref = ridge
        first = qsvrg(oracle, alpha=1.0, m=40, l=2, seed=1, reference=ref)
        second = qsvrg(oracle, alpha=1.0, m=40, l=2, seed=2, reference=ref)
        assert not np.array_equal(first.final_theta, second.final_theta)

    def test_stream_id_changes_draws(self, ridge):
        oracle, ref = ridge
        first = qsvrg(oracle, alpha=1.0, m=40, l=2, seed=1, reference=ref, stream_id=0)
        second = qsvrg(oracle, alpha=1.0, m=40, l=2, seed=1, reference=ref, stream_id=1)
        assert not np.array_equal(first.final_theta, second.final_theta)

    def test_final_matches_traced_run(self, ridge):
        oracle, ref = ridge
        trace = qsvrg(oracle, alpha=0.5, m=25, l=3, seed=6, reference=ref)
        theta = qsvrg_final(oracle, alpha=0.5, m=25, l=3, seed=6)
        np.testing.assert_array_equal(trace.final_theta, theta)

    def test_converges(self, ridge):
        oracle, ref = ridge
        trace = qsvrg(oracle, alpha=1.0, m=1000, l=8, seed=0, reference=ref)
        assert trace.final_suboptimality < 1e-6 * trace.points[0][1]

    @pytest.mark.parametrize("alpha", [0.0, 1.5])
    def test_step_size_range(self, ridge, alpha):
        oracle, ref = ridge
        with pytest.raises(ConfigurationError, match="alpha"):
            QSVRGSolver(oracle, alpha=alpha, m=10, l=1, reference=ref)

    def test_schedule_lengths_positive(self, ridge):
        oracle, ref = ridge
        with pytest.raises(ConfigurationError):
            QSVRGSolver(oracle, alpha=1.0, m=0, l=1, reference=ref)

    def test_divergence_is_reported(self, ridge):
        oracle, ref = ridge
        solver = QSVRGSolver(oracle, alpha=1.0, m=10, l=1, reference=ref)
        with pytest.raises(DivergenceError):
            solver._check_finite(np.array([np.nan, 0.0, 0.0, 0.0]), 2, 7)


class TestTraces:
    """Checkpoint bookkeeping shared by every method"""

    @pytest.mark.parametrize(
        "run",
        [
            lambda o, r: qsvrg(o, alpha=1.0, m=60, l=5, reference=r),
            lambda o, r: sgd_uniform_averaged(o, 10.0, reference=r),
            lambda o, r: sgd_nonuniform_averaged(o, 10.0, reference=r),
            lambda o, r: sag_nonuniform(o, 10.0, reference=r),
            lambda o, r: svrg_nonuniform(o, 3, reference=r),
            lambda o, r: lsvrg_uniform(o, 10.0, reference=r),
        ],
        ids=["qsvrg", "sgd_uniform", "sgd_nonuniform", "sag", "svrg", "lsvrg"],
    )
    def test_points_start_at_zero_and_increase(self, ridge, run):
        oracle, ref = ridge
        trace = run(oracle, ref)
        passes = [p for p, _ in trace.points]
        assert passes[0] == 0.0
        assert all(b > a for a, b in zip(passes, passes[1:]))
        assert passes[-1] == pytest.approx(effective_passes(trace.gradient_count, oracle.n))
        assert all(value >= 0.0 for _, value in trace.points)
        # the first point is g(0) − g*
        assert trace.points[0][1] == pytest.approx(oracle.problem.g_offset - ref.g_star)

    @pytest.mark.parametrize(
        "run",
        [
            lambda o, r: sgd_uniform_averaged(o, 20.0, reference=r),
            lambda o, r: sgd_nonuniform_averaged(o, 20.0, reference=r),
            lambda o, r: sag_nonuniform(o, 20.0, reference=r),
            lambda o, r: svrg_nonuniform(o, 6, reference=r),
            lambda o, r: lsvrg_uniform(o, 20.0, reference=r),
        ],
        ids=["sgd_uniform", "sgd_nonuniform", "sag", "svrg", "lsvrg"],
    )
    def test_baselines_make_progress(self, ridge, run):
        oracle, ref = ridge
        trace = run(oracle, ref)
        assert trace.final_suboptimality < 0.1 * trace.points[0][1]

    @pytest.mark.parametrize("method", list(Method), ids=lambda m: m.value)
    def test_monotone_trend(self, well_conditioned, method):
        oracle, ref = well_conditioned
        trace = SolverService(oracle, ref).run(SolverConfig(method=method, target_passes=30.0))
        values = np.array([s for _, s in trace.points])
        smoothed = np.convolve(values, np.ones(3) / 3.0, mode="valid")
        floor = 1e-13 * values[0]
        assert np.all(smoothed[1:] <= smoothed[:-1] * (1.0 + TREND_SLACK) + floor), smoothed

    def test_geometric_checkpoints(self):
        assert geometric_checkpoints(10.0, 1.0, 2.0) == [1.0, 2.0, 4.0, 8.0, 10.0]

    def test_geometric_checkpoints_from_config(self, fresh_config):
        grid = geometric_checkpoints(3.0)
        assert grid[0] == fresh_config.checkpoint_start
        assert grid[-1] == 3.0

    def test_custom_checkpoints(self, ridge):
        oracle, ref = ridge
        trace = sgd_uniform_averaged(oracle, 4.0, reference=ref, checkpoints=[2.0, 4.0])
        assert [p for p, _ in trace.points] == [0.0, 2.0, 4.0]


class TestBaselineSteps:
    """Step-size constants of the reference methods"""

    def test_sgd_uniform_step(self, ridge):
        oracle, ref = ridge
        solver = AveragedSGDSolver(oracle, 1.0, sampling="uniform", reference=ref)
        assert solver.step_size * (oracle.lam + oracle.design.max_sq_norm) == pytest.approx(0.25)
        assert solver.method == Method.SGD_UNIFORM

    def test_sgd_nonuniform_step(self, ridge):
        oracle, ref = ridge
        solver = AveragedSGDSolver(oracle, 1.0, sampling="nonuniform", reference=ref)
        assert solver.step_size * (oracle.lam + oracle.lbar) == pytest.approx(1.0)
        assert solver.method == Method.SGD_NONUNIFORM

    def test_sgd_unknown_sampling(self, ridge):
        oracle, ref = ridge
        with pytest.raises(QsvrgError, match="sampling"):
            AveragedSGDSolver(oracle, 1.0, sampling="cyclic", reference=ref)

    def test_sag_step(self, ridge):
        oracle, ref = ridge
        assert SAGSolver(oracle, 1.0, reference=ref).step_size * oracle.scale == pytest.approx(1.0)

    def test_svrg_step_and_epoch_length(self, ridge):
        oracle, ref = ridge
        solver = SVRGSolver(oracle, 2, reference=ref)
        assert solver.step_size * (oracle.lam + oracle.lbar) == pytest.approx(0.1)
        assert solver.m == 2 * oracle.n
        assert solver.budget_passes() == pytest.approx(6.0)

    def test_svrg_anchored_at_solution(self, ridge):
        oracle, ref = ridge
        theta_star = ref.theta_star
        tolerance = 1e-6 * (1.0 + np.linalg.norm(theta_star))
        finals = []
        for seed in range(20):
            trace = svrg_nonuniform(oracle, 2, seed=seed, reference=ref, anchor=theta_star)
            assert np.linalg.norm(trace.final_theta - theta_star) <= tolerance
            finals.append(trace.final_theta)
        np.testing.assert_allclose(np.mean(finals, axis=0), theta_star, atol=tolerance)

    def test_lsvrg_step_and_refresh(self, ridge):
        oracle, ref = ridge
        solver = LSVRGSolver(oracle, 1.0, reference=ref)
        assert solver.step_size * 6 * (oracle.lam + oracle.design.max_sq_norm) == pytest.approx(1.0)
        assert solver.refresh_probability == 1.0 / oracle.n

    def test_lsvrg_single_row_refreshes_every_step(self):
        oracle = least_squares_oracle([[1.0]], [1.0])
        solver = LSVRGSolver(oracle, 5.0)
        solver.run()
        assert solver.refreshes == solver.gradient_count // 2

    def test_sgd_one_dimensional_hand_recursion(self):
        oracle = least_squares_oracle([[1.0]], [1.0])
        trace = sgd_uniform_averaged(oracle, 1.0)
        # θ₁ = ¼, reported average (θ₀ + θ₁)/2
        np.testing.assert_array_equal(trace.final_theta, [0.125])
        assert trace.gradient_count == 1

    def test_sgd_zero_data_stays_at_zero(self):
        oracle = ridge_oracle([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0], 0.5)
        trace = sgd_uniform_averaged(oracle, 5.0)
        np.testing.assert_array_equal(trace.final_theta, 0.0)

    def test_sag_memory_sum(self, ridge):
        oracle, ref = ridge
        solver = SAGSolver(oracle, 3.0, reference=ref)
        solver.run()
        expected = (solver.memory[:, None] * oracle.design.rows).sum(axis=0)
        np.testing.assert_allclose(solver.memory_sum, expected, rtol=1e-10, atol=1e-12)

    def test_sag_converges(self):
        design, y = synthetic_problem(100, 5, 2.0, seed=1)
        oracle = ridge_oracle(design, y, design.lbar / design.n)
        trace = sag_nonuniform(oracle, 200.0, reference=reference_minimizer(oracle.problem))
        assert trace.final_suboptimality < 1e-8 * trace.points[0][1]


class TestSchedules:
    """Automatic and theoretical (l, m) choices"""

    def test_auto_schedule(self):
        assert qsvrg_auto_schedule(1000, 100, 0.01, 1.0) == (10, 100)
        assert qsvrg_auto_schedule(400, 10**6, 1e-9, 1.0) == (4, 100)
        assert qsvrg_auto_schedule(1000, 1000, 1.0, 1.0) == (4, 250)

    def test_auto_schedule_without_ridge(self):
        assert qsvrg_auto_schedule(1000, 100, 0.0, 2.0) == (4, 250)

    def test_auto_schedule_minimum(self):
        with pytest.raises(ConfigurationError):
            qsvrg_auto_schedule(3, 100, 0.01, 1.0)

    def test_budgeted_schedule(self):
        assert auto_schedule_for_budget(8.0, 100, 0.0) == (4, 100)
        # λ = L̄/n on n = 208 rows
        assert auto_schedule_for_budget(50.0, 208, 1.0 / 208) == (25, 208)

    @pytest.mark.parametrize(
        "passes,n,ratio", [(50.0, 208, 1 / 208), (13.7, 91, 0.002), (100.0, 500, 0.0)]
    )
    def test_budgeted_schedule_fits(self, passes, n, ratio):
        l_epochs, m = auto_schedule_for_budget(passes, n, ratio)
        assert l_epochs >= 4
        assert l_epochs * (n + m) <= math.floor(passes * n)

    def test_budget_too_small(self):
        with pytest.raises(ConfigurationError, match="too small"):
            auto_schedule_for_budget(1.0, 100, 0.0)

    def test_theoretical_schedule(self):
        l_epochs, m, total = theoretical_schedule(10.0, 10**4, 1e-8, 1.0)
        assert (l_epochs, m) == (3, 90000)
        assert total == 3 * (10**4 + 90000)
        assert theoretical_schedule(1.0, 2, 0.5, 1.0)[:2] == (1, 25)

    def test_theoretical_schedule_already_converged(self):
        assert theoretical_schedule(5.0, 100, 2.0, 1.0) == (0, 900, 0)

    def test_theoretical_schedule_validation(self):
        with pytest.raises(QsvrgError):
            theoretical_schedule(0.5, 100, 1e-3, 1.0)


class TestSolverService:
    """Benchmark defaults filled in from a SolverConfig"""

    def test_runs_every_method(self, ridge):
        oracle, ref = ridge
        service = SolverService(oracle, ref)
        for method in Method:
            trace = service.run(SolverConfig(method=method, target_passes=12.0))
            assert trace.method == method
            # an L-SVRG refresh on the last step can overshoot by one pass
            assert trace.points[-1][0] == pytest.approx(12.0, abs=1.0 + 1e-9)

    def test_qsvrg_defaults_to_budgeted_schedule(self, ridge):
        oracle, ref = ridge
        service = SolverService(oracle, ref)
        config = SolverConfig(method=Method.QSVRG, target_passes=20.0)
        assert service.schedule(config) == auto_schedule_for_budget(
            20.0, oracle.n, oracle.ridge_ratio
        )
        trace = service.run(config)
        assert trace.alpha == 1.0

    def test_explicit_schedule_wins(self, ridge):
        oracle, ref = ridge
        service = SolverService(oracle, ref)
        config = SolverConfig(method=Method.QSVRG, l=2, m=17, alpha=0.5)
        assert service.schedule(config) == (2, 17)
        trace = service.run(config)
        assert trace.gradient_count == 2 * (oracle.n + 17)
        assert trace.alpha == 0.5

    def test_svrg_epochs_from_budget(self, ridge):
        oracle, ref = ridge
        service = SolverService(oracle, ref)
        by_budget = SolverConfig(method=Method.SVRG_NONUNIFORM, target_passes=50)
        assert service.svrg_epochs(by_budget) == 16
        assert service.svrg_epochs(SolverConfig(method=Method.SVRG_NONUNIFORM, epochs=2)) == 2

    def test_rejects_large_qsvrg_step(self):
        with pytest.raises(ValueError):
            SolverConfig(method=Method.QSVRG, alpha=1.5)


@pytest.fixture(scope="module")
def ill_conditioned():
    """Ridge problem with κ = 1000 and λ = L̄/n, where the baselines stay above the floor"""
    design, y = synthetic_problem(500, 20, 1000.0, seed=2)
    oracle = ridge_oracle(design, y, design.lbar / design.n)
    service = SolverService(oracle, reference_minimizer(oracle.problem))
    medians = {}

    def median_gap(method):
        if method in medians:
            return medians[method]
        gaps = [
            service.run(
                SolverConfig(method=method, target_passes=50.0, seed=seed)
            ).final_suboptimality
            for seed in range(10)
        ]
        medians[method] = float(np.median(gaps))
        return medians[method]

    return median_gap


@pytest.mark.slow
class TestMethodOrdering:
    """Q-SVRG against every baseline at 50 passes"""

    @pytest.mark.parametrize(
        "baseline", [m for m in Method if m != Method.QSVRG], ids=lambda m: m.value
    )
    def test_qsvrg_beats_baseline(self, ill_conditioned, baseline):
        assert ill_conditioned(Method.QSVRG) < ill_conditioned(baseline)
