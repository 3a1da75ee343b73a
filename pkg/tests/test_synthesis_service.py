"""
Unit tests for tau search and controller synthesis.
"""
import math
import unittest
from unittest.mock import patch

import numpy as np
import pytest

from src.models.interfaces import ControllerKind
from src.models.privacy_models import KlRadius
from src.services.riccati_service import solve_riccati
from src.services.synthesis_service import (
    TAU_START,
    IndexOutOfRange,
    NoFeasibleTau,
    build_dr_controller,
    control_step,
    find_feasible_tau,
    golden_section,
    optimize_tau,
    synthesize_dr,
    synthesize_lqg,
)
from tests.problem_fixtures import BENCHMARK_TAU_STAR, benchmark_problem, scalar_problem


class TestFeasibleTau(unittest.TestCase):
    """Test cases for the feasibility boundary search."""

    def setUp(self):
        self.plant, self.weights, self.sigma2_lo, self.eta = benchmark_problem()

    def test_benchmark_boundary(self):
        boundary = find_feasible_tau(self.plant, self.weights, self.sigma2_lo)
        self.assertTrue(20.5 < boundary < 21.5)
        self.assertTrue(solve_riccati(self.plant, self.weights, self.sigma2_lo, boundary).feasible)
        below = boundary * (1.0 - 2e-3)
        self.assertFalse(solve_riccati(self.plant, self.weights, self.sigma2_lo, below).feasible)

    def test_scalar_boundary_above_information_limit(self):
        plant, weights = scalar_problem()
        self.assertGreater(find_feasible_tau(plant, weights, 1.0), 0.5)

    def test_zero_weights_are_feasible_everywhere(self):
        plant, weights = scalar_problem(Q=0.0, Q_N=0.0)
        self.assertEqual(find_feasible_tau(plant, weights, 1.0), TAU_START)

    def test_no_feasible_tau(self):
        with patch('src.services.synthesis_service._is_feasible', return_value=False):
            with self.assertRaises(NoFeasibleTau):
                find_feasible_tau(self.plant, self.weights, self.sigma2_lo)


class TestGoldenSection(unittest.TestCase):
    """Test cases for the one-dimensional refinement."""

    def test_quadratic_minimum(self):
        x, fx = golden_section(lambda t: (t - 2.0) ** 2 + 1.0, 0.0, 5.0)
        self.assertAlmostEqual(x, 2.0, delta=1e-6)
        self.assertAlmostEqual(fx, 1.0, places=10)

    def test_infinite_values_push_search_away(self):
        x, _ = golden_section(lambda t: math.inf if t < 1.0 else t, 0.0, 3.0)
        self.assertAlmostEqual(x, 1.0, delta=1e-6)


class TestOptimizeTau(unittest.TestCase):
    """Test cases for the outer minimization."""

    def setUp(self):
        self.plant, self.weights, self.sigma2_lo, self.eta = benchmark_problem()

    def test_benchmark_minimum(self):
        report = optimize_tau(self.eta, self.plant, self.weights, self.sigma2_lo)
        self.assertAlmostEqual(report.tau_star, 28.1926, delta=0.3)
        self.assertAlmostEqual(report.objective_star, 119.4249, delta=0.01)
        low, high = report.feasible_interval_estimate
        self.assertTrue(low <= report.tau_star <= high)
        recorded = [value for _, value in report.evaluations if value is not None]
        self.assertLessEqual(report.objective_star, min(recorded))

    def test_larger_radius_costs_more(self):
        base = optimize_tau(self.eta, self.plant, self.weights, self.sigma2_lo, grid_size=32)
        doubled = KlRadius(2.0 * self.eta.eta, 2.0 * self.eta.eta1, 2.0 * self.eta.eta2)
        wider = optimize_tau(doubled, self.plant, self.weights, self.sigma2_lo, grid_size=32)
        self.assertGreater(wider.objective_star, base.objective_star)

    def test_single_point_grid(self):
        report = optimize_tau(self.eta, self.plant, self.weights, self.sigma2_lo,
                              tau_grid=[BENCHMARK_TAU_STAR])
        self.assertEqual(report.tau_star, BENCHMARK_TAU_STAR)
        self.assertEqual(len(report.evaluations), 1)

    def test_infeasible_grid(self):
        with self.assertRaises(NoFeasibleTau):
            optimize_tau(self.eta, self.plant, self.weights, self.sigma2_lo, tau_grid=[1.0, 2.0])

    def test_small_grid_rejected(self):
        with self.assertRaises(ValueError):
            optimize_tau(self.eta, self.plant, self.weights, self.sigma2_lo, grid_size=8)


class TestControllers(unittest.TestCase):
    """Test cases for controller construction and stepping."""

    def setUp(self):
        self.plant, self.weights, self.sigma2_lo, self.eta = benchmark_problem()

    def test_pinned_tau(self):
        ctrl = synthesize_dr(self.eta, self.plant, self.weights, self.sigma2_lo, tau=BENCHMARK_TAU_STAR)
        self.assertEqual(ctrl.kind, ControllerKind.DISTRIBUTIONALLY_ROBUST)
        self.assertEqual(ctrl.tau, BENCHMARK_TAU_STAR)
        self.assertEqual(len(ctrl.feedback_gains), self.plant.N)
        self.assertEqual(len(ctrl.correction_matrices), self.plant.N)

    def test_infeasible_tau_rejected(self):
        with self.assertRaises(NoFeasibleTau):
            build_dr_controller(self.plant, self.weights, self.sigma2_lo, 1.0)

    def test_risk_neutral_limit_matches_lqg(self):
        robust = build_dr_controller(self.plant, self.weights, self.sigma2_lo, 1e9)
        baseline = synthesize_lqg(self.plant, self.weights, self.sigma2_lo)
        for k in range(self.plant.N):
            np.testing.assert_allclose(robust.feedback_gains[k], baseline.feedback_gains[k],
                                       rtol=1e-6, atol=1e-9)
            np.testing.assert_allclose(robust.predictor_gains[k], baseline.predictor_gains[k],
                                       rtol=1e-6, atol=1e-9)
            np.testing.assert_allclose(robust.correction_matrices[k], np.zeros((2, 2)), atol=1e-6)

    def test_zero_state_weight_has_no_correction(self):
        plant, weights = scalar_problem(Q=0.0)
        ctrl = build_dr_controller(plant, weights, 1.0, 50.0)
        np.testing.assert_array_equal(ctrl.correction_matrices[0], np.zeros((1, 1)))

    def test_blind_sensor_gives_zero_estimator_gains(self):
        plant, weights = scalar_problem(C=0.0)
        robust = build_dr_controller(plant, weights, 1.0, 50.0)
        baseline = synthesize_lqg(plant, weights, 1.0)
        np.testing.assert_array_equal(robust.estimator_gains[0], np.zeros((1, 1)))
        np.testing.assert_array_equal(baseline.estimator_gains[0], np.zeros((1, 1)))

    def test_control_step(self):
        ctrl = build_dr_controller(self.plant, self.weights, self.sigma2_lo, BENCHMARK_TAU_STAR)
        u, state = control_step(ctrl, 0, np.zeros(1), np.zeros(2))
        np.testing.assert_array_equal(u, np.zeros(1))
        np.testing.assert_array_equal(state, np.zeros(2))
        with self.assertRaises(IndexOutOfRange):
            control_step(ctrl, self.plant.N, np.zeros(1), np.zeros(2))
        with self.assertRaises(IndexOutOfRange):
            control_step(ctrl, -1, np.zeros(1), np.zeros(2))

    def test_robust_step_regression(self):
        ctrl = build_dr_controller(self.plant, self.weights, self.sigma2_lo, BENCHMARK_TAU_STAR)
        np.testing.assert_allclose(ctrl.feedback_gains[0], [[1.57302772621, -0.911843348139]], rtol=1e-8)
        np.testing.assert_allclose(ctrl.estimator_gains[0], [[0.167423555381], [0.0732478054793]],
                                   rtol=1e-8)
        cases = [
            (0, [0.7], [1.0, -1.0], [-2.48487107435], [-1.3944692846, -2.28556446582]),
            (19, [-0.4], [0.3, 0.2], [-0.314516392999], [-0.123726812811, -0.337171430396]),
        ]
        for k, y_tilde, state, expected_u, expected_next in cases:
            u, nxt = control_step(ctrl, k, np.array(y_tilde), np.array(state))
            np.testing.assert_allclose(u, expected_u, rtol=1e-8)
            np.testing.assert_allclose(nxt, expected_next, rtol=1e-8)

    def test_baseline_step_regression(self):
        ctrl = synthesize_lqg(self.plant, self.weights, self.sigma2_lo)
        np.testing.assert_allclose(ctrl.feedback_gains[-1], [[0.741935483871, 0.403225806452]], rtol=1e-10)
        cases = [
            (0, [0.7], [1.0, -1.0], [-1.60674698806], [-0.52345900825, -1.83881000286]),
            (19, [-0.4], [0.3, 0.2], [-0.0859235233336], [0.0460809752378, -0.0406078364755]),
        ]
        for k, y_tilde, state, expected_u, expected_next in cases:
            u, nxt = control_step(ctrl, k, np.array(y_tilde), np.array(state))
            np.testing.assert_allclose(u, expected_u, rtol=1e-8)
            np.testing.assert_allclose(nxt, expected_next, rtol=1e-8)

    def test_batched_step_matches_single(self):
        ctrl = synthesize_lqg(self.plant, self.weights, self.sigma2_lo)
        rng = np.random.default_rng(0)
        states = rng.normal(size=(4, 2))
        outputs = rng.normal(size=(4, 1))
        u_batch, next_batch = ctrl.step(3, outputs, states)
        for i in range(4):
            u, nxt = ctrl.step(3, outputs[i], states[i])
            np.testing.assert_allclose(u_batch[i], u, rtol=1e-12)
            np.testing.assert_allclose(next_batch[i], nxt, rtol=1e-12)

    @pytest.mark.slow
    def test_synthesis_is_deterministic(self):
        first = synthesize_dr(self.eta, self.plant, self.weights, self.sigma2_lo, grid_size=32)
        second = synthesize_dr(self.eta, self.plant, self.weights, self.sigma2_lo, grid_size=32)
        self.assertEqual(first.tau, second.tau)
        for a, b in zip(first.feedback_gains, second.feedback_gains):
            np.testing.assert_array_equal(a, b)


if __name__ == '__main__':
    unittest.main()
