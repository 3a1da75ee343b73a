"""
Unit tests for the coupled Riccati recursions and the optimal value.
"""
import unittest

import numpy as np
import pytest

from src.models.interfaces import FeasibilityCondition
from src.models.problem_models import CostWeights
from src.services.riccati_service import (
    backward_riccati,
    forward_riccati,
    objective,
    solve_riccati,
    tau_curve,
    w_tau,
)
from tests.problem_fixtures import BENCHMARK_TAU_STAR, benchmark_problem, scalar_problem


class TestForwardPass(unittest.TestCase):
    """Test cases for the estimator recursion."""

    def setUp(self):
        self.plant, self.weights, self.sigma2_lo, self.eta = benchmark_problem()

    def test_rejects_nonpositive_tau(self):
        with self.assertRaises(ValueError):
            forward_riccati(self.plant, self.weights, self.sigma2_lo, 0.0)

    def test_scalar_information_failure(self):
        plant, weights = scalar_problem()
        # P_0 = 1 + 1 - 1/0.5 = 0
        forward = forward_riccati(plant, weights, 1.0, 0.5)
        self.assertFalse(forward.feasible)
        self.assertEqual(forward.first_failure, (0, FeasibilityCondition.P_K))
        solution = solve_riccati(plant, weights, 1.0, 0.5)
        self.assertIsNone(solution.backward)
        self.assertIsNone(solution.w_tau)
        self.assertEqual(solution.failure, forward.first_failure)

    def test_residuals(self):
        forward = forward_riccati(self.plant, self.weights, self.sigma2_lo, BENCHMARK_TAU_STAR)
        self.assertTrue(forward.feasible)
        A, C = self.plant.A, self.plant.C
        self.assertEqual(len(forward.Sigma), self.plant.N + 1)
        for k in range(self.plant.N):
            expected_P = (np.linalg.inv(forward.Sigma[k]) + C.T @ C / self.sigma2_lo
                          - self.weights.Q / BENCHMARK_TAU_STAR)
            np.testing.assert_allclose(forward.P[k], expected_P, rtol=1e-9, atol=1e-9)
            expected_Sigma = self.plant.Sigma_w + A @ np.linalg.inv(forward.P[k]) @ A.T
            np.testing.assert_allclose(forward.Sigma[k + 1], expected_Sigma, rtol=1e-9, atol=1e-12)
            np.testing.assert_array_equal(forward.Sigma[k], forward.Sigma[k].T)

    def test_risk_neutral_limit_is_kalman_predictor(self):
        forward = forward_riccati(self.plant, self.weights, self.sigma2_lo, 1e9)
        A, C = self.plant.A, self.plant.C
        prior = self.plant.Sigma_ini
        for k in range(self.plant.N):
            posterior = np.linalg.inv(np.linalg.inv(prior) + C.T @ C / self.sigma2_lo)
            prior = self.plant.Sigma_w + A @ posterior @ A.T
            np.testing.assert_allclose(forward.Sigma[k + 1], prior, rtol=1e-6, atol=1e-9)


class TestBackwardPass(unittest.TestCase):
    """Test cases for the feedback recursion."""

    def setUp(self):
        self.plant, self.weights, self.sigma2_lo, self.eta = benchmark_problem()

    def test_requires_feasible_forward_pass(self):
        plant, weights = scalar_problem()
        forward = forward_riccati(plant, weights, 1.0, 0.5)
        with self.assertRaises(ValueError):
            backward_riccati(plant, weights, 0.5, forward)

    def test_terminal_weight_violation(self):
        plant, weights = scalar_problem(Q=0.0, Q_N=2.0)
        forward = forward_riccati(plant, weights, 1.0, 0.4)
        self.assertTrue(forward.feasible)
        backward = backward_riccati(plant, weights, 0.4, forward)
        self.assertFalse(backward.feasible)
        self.assertEqual(backward.first_failure,
                         (0, FeasibilityCondition.PI_NEXT_MINUS_SIGMA_W))

    def test_residuals(self):
        tau = BENCHMARK_TAU_STAR
        solution = solve_riccati(self.plant, self.weights, self.sigma2_lo, tau)
        self.assertTrue(solution.feasible)
        A, B = self.plant.A, self.plant.B
        G = B @ np.linalg.inv(self.weights.R) @ B.T - self.plant.Sigma_w / tau
        Pi, L_inv = solution.backward.Pi, solution.backward.L_inv
        self.assertEqual(len(Pi), self.plant.N + 1)
        np.testing.assert_array_equal(Pi[-1], self.weights.Q_N)
        for k in range(self.plant.N):
            L = np.linalg.inv(Pi[k + 1]) + G
            np.testing.assert_allclose(L_inv[k] @ L, np.eye(2), atol=1e-9)
            np.testing.assert_allclose(Pi[k], self.weights.Q + A.T @ np.linalg.inv(L) @ A,
                                       rtol=1e-9, atol=1e-9)
            np.testing.assert_array_equal(Pi[k], Pi[k].T)

    def test_risk_neutral_limit_is_lqr(self):
        solution = solve_riccati(self.plant, self.weights, self.sigma2_lo, 1e9)
        A, B, R = self.plant.A, self.plant.B, self.weights.R
        S = self.weights.Q_N
        for k in range(self.plant.N - 1, -1, -1):
            gain = np.linalg.solve(R + B.T @ S @ B, B.T @ S @ A)
            np.testing.assert_allclose(solution.backward.F[k], gain, rtol=1e-6, atol=1e-9)
            S = self.weights.Q + A.T @ S @ (A - B @ gain)
            np.testing.assert_allclose(solution.backward.Pi[k], S, rtol=1e-6)

    def test_singular_terminal_weight(self):
        weights = CostWeights(Q=self.weights.Q, Q_N=np.zeros((2, 2)), R=self.weights.R)
        solution = solve_riccati(self.plant, weights, self.sigma2_lo, 1000.0)
        self.assertTrue(solution.feasible)
        np.testing.assert_array_equal(solution.backward.L_inv[-1], np.zeros((2, 2)))
        np.testing.assert_allclose(solution.backward.Pi[-2], self.weights.Q)
        self.assertTrue(np.isfinite(solution.w_tau))


class TestOptimalValue(unittest.TestCase):
    """Test cases for W_tau and the tau objective."""

    def setUp(self):
        self.plant, self.weights, self.sigma2_lo, self.eta = benchmark_problem()

    def test_scalar_value_from_zero_state(self):
        plant, weights = scalar_problem(x_ini=0.0)
        self.assertAlmostEqual(w_tau(plant, weights, 1.0, 50.0), 0.030725, delta=1e-5)

    def test_scalar_value_with_initial_state(self):
        plant, weights = scalar_problem(x_ini=1.0)
        self.assertAlmostEqual(w_tau(plant, weights, 1.0, 50.0), 0.046243, delta=1e-5)

    def test_infeasible_tau_gives_none(self):
        self.assertIsNone(w_tau(self.plant, self.weights, self.sigma2_lo, 1.0))
        self.assertIsNone(objective(self.eta, self.plant, self.weights, self.sigma2_lo, 1.0))

    def test_benchmark_objective(self):
        self.assertAlmostEqual(
            objective(self.eta, self.plant, self.weights, self.sigma2_lo, 100.0), 228.7738, delta=0.01)
        self.assertAlmostEqual(
            objective(self.eta, self.plant, self.weights, self.sigma2_lo, BENCHMARK_TAU_STAR),
            119.4253, delta=0.01)

    def test_benchmark_value_keeps_gain_coupling(self):
        # dropping the K-coupled log-determinant would give about 2.2599 here
        self.assertAlmostEqual(
            w_tau(self.plant, self.weights, self.sigma2_lo, BENCHMARK_TAU_STAR), 2.427047, delta=1e-5)
        self.assertAlmostEqual(w_tau(self.plant, self.weights, self.sigma2_lo, 100.0), 0.470695, delta=1e-5)

    def test_tau_curve_skips_infeasible_points(self):
        curve = tau_curve(self.eta, self.plant, self.weights, self.sigma2_lo,
                          [1.0, BENCHMARK_TAU_STAR, 100.0])
        self.assertEqual([tau for tau, _ in curve], [BENCHMARK_TAU_STAR, 100.0])

    @pytest.mark.slow
    def test_feasibility_is_monotone(self):
        taus = np.geomspace(5.0, 500.0, 60)
        feasible = [solve_riccati(self.plant, self.weights, self.sigma2_lo, t).feasible
                    for t in taus]
        first = feasible.index(True)
        self.assertTrue(all(feasible[first:]))
        self.assertFalse(any(feasible[:first]))


if __name__ == '__main__':
    unittest.main()
