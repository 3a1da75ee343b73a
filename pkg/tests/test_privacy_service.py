"""
Unit tests for privacy calibration and noise sampling.
"""
import math
import unittest

import numpy as np
import pytest

from src.models.interfaces import Mechanism
from src.models.privacy_models import InvalidBudget, NoiseDistribution, PrivacySpec
from src.services.privacy_service import (
    calibrate,
    gaussian_epsilon_for_variance,
    gaussian_sigma_lower,
    induced_norms,
    laplace_b_lower,
    laplace_epsilon_for_scale,
    laplace_privacy_loss,
    sample_noise,
)

C_BENCHMARK = np.array([[1.0, 0.5]])


def _gaussian(epsilon=math.log(2.0), delta=0.5, gamma=0.5):
    return PrivacySpec(epsilon=epsilon, delta=delta, gamma=gamma, mechanism=Mechanism.GAUSSIAN)


def _laplace(epsilon=math.log(2.0), gamma=0.5):
    return PrivacySpec(epsilon=epsilon, delta=0.0, gamma=gamma, mechanism=Mechanism.LAPLACE)


class TestCalibration(unittest.TestCase):
    """Test cases for noise lower bounds."""

    def test_induced_norms(self):
        norm1, norm2 = induced_norms(C_BENCHMARK)
        self.assertAlmostEqual(norm1, 1.0)
        self.assertAlmostEqual(norm2, math.sqrt(1.25))

    def test_induced_norms_rejects_empty(self):
        with self.assertRaises(ValueError):
            induced_norms(np.zeros((0, 2)))

    def test_gaussian_lower_bound(self):
        self.assertAlmostEqual(gaussian_sigma_lower(_gaussian(), C_BENCHMARK), 1.19196, delta=1e-5)

    def test_laplace_lower_bound(self):
        self.assertAlmostEqual(laplace_b_lower(_laplace(), C_BENCHMARK), 0.721348, delta=1e-6)

    def test_calibrate_dispatches(self):
        self.assertEqual(calibrate(_gaussian(), C_BENCHMARK), gaussian_sigma_lower(_gaussian(), C_BENCHMARK))
        self.assertEqual(calibrate(_laplace(), C_BENCHMARK), laplace_b_lower(_laplace(), C_BENCHMARK))

    def test_wrong_mechanism_rejected(self):
        with self.assertRaises(InvalidBudget):
            gaussian_sigma_lower(_laplace(), C_BENCHMARK)
        with self.assertRaises(InvalidBudget):
            laplace_b_lower(_gaussian(), C_BENCHMARK)

    def test_zero_sensitivity_needs_no_noise(self):
        self.assertEqual(gaussian_sigma_lower(_gaussian(gamma=0.0), C_BENCHMARK), 0.0)
        self.assertEqual(laplace_b_lower(_laplace(gamma=0.0), C_BENCHMARK), 0.0)
        self.assertEqual(gaussian_sigma_lower(_gaussian(), np.zeros((1, 2))), 0.0)

    def test_bounds_decrease_with_budget(self):
        epsilons = [0.2, 0.4, 0.6, 0.8]
        gaussian = [gaussian_sigma_lower(_gaussian(epsilon=e), C_BENCHMARK) for e in epsilons]
        laplace = [laplace_b_lower(_laplace(epsilon=e), C_BENCHMARK) for e in epsilons]
        self.assertTrue(all(a > b for a, b in zip(gaussian, gaussian[1:])))
        self.assertTrue(all(a > b for a, b in zip(laplace, laplace[1:])))
        deltas = [0.1, 0.3, 0.5, 0.7]
        by_delta = [gaussian_sigma_lower(_gaussian(delta=d), C_BENCHMARK) for d in deltas]
        self.assertTrue(all(a > b for a, b in zip(by_delta, by_delta[1:])))

    def test_budget_scaling(self):
        gaussian = [gaussian_sigma_lower(_gaussian(epsilon=e), C_BENCHMARK) * e ** 2
                    for e in (0.2, 0.5, 0.9)]
        laplace = [laplace_b_lower(_laplace(epsilon=e), C_BENCHMARK) * e for e in (0.2, 0.5, 3.0)]
        self.assertAlmostEqual(max(gaussian), min(gaussian), places=12)
        self.assertAlmostEqual(max(laplace), min(laplace), places=12)

    def test_inverse_calibration(self):
        spec = _gaussian()
        sigma2 = gaussian_sigma_lower(spec, C_BENCHMARK)
        self.assertAlmostEqual(
            gaussian_epsilon_for_variance(sigma2, spec.delta, spec.gamma, C_BENCHMARK),
            spec.epsilon, places=12)
        b = laplace_b_lower(_laplace(), C_BENCHMARK)
        self.assertAlmostEqual(laplace_epsilon_for_scale(b, 0.5, C_BENCHMARK), math.log(2.0),
                               places=12)

    def test_inverse_calibration_rejects_bad_input(self):
        with self.assertRaises(InvalidBudget):
            gaussian_epsilon_for_variance(0.0, 0.5, 0.5, C_BENCHMARK)
        with self.assertRaises(InvalidBudget):
            gaussian_epsilon_for_variance(1.0, 1.0, 0.5, C_BENCHMARK)
        with self.assertRaises(InvalidBudget):
            laplace_epsilon_for_scale(-1.0, 0.5, C_BENCHMARK)


class TestLaplacePrivacyLoss(unittest.TestCase):
    """Test cases for the Laplace density-ratio bound."""

    def test_single_shift(self):
        self.assertAlmostEqual(laplace_privacy_loss(C_BENCHMARK, [[2.0, 2.0]], 0.5), 6.0)

    def test_adjacent_trajectories_within_budget(self):
        spec = _laplace()
        b = laplace_b_lower(spec, C_BENCHMARK)
        rng = np.random.default_rng(3)
        for _ in range(200):
            delta = rng.normal(size=(21, 2))
            delta *= spec.gamma / np.sum(np.abs(delta))
            self.assertLessEqual(laplace_privacy_loss(C_BENCHMARK, delta, b), spec.epsilon + 1e-12)

    def test_rejects_nonpositive_scale(self):
        with self.assertRaises(InvalidBudget):
            laplace_privacy_loss(C_BENCHMARK, [[1.0, 0.0]], 0.0)


class TestNoiseSampling(unittest.TestCase):
    """Test cases for seeded noise draws."""

    def test_same_seed_same_noise(self):
        dist = NoiseDistribution.laplace(0.8, 21)
        np.testing.assert_array_equal(sample_noise(dist, 11), sample_noise(dist, 11))
        self.assertFalse(np.array_equal(sample_noise(dist, 11), sample_noise(dist, 12)))

    def test_shapes(self):
        dist = NoiseDistribution.gaussian(1.0, 21)
        self.assertEqual(sample_noise(dist, 0).shape, (21,))
        self.assertEqual(sample_noise(dist, 0, size=5).shape, (5, 21))

    @pytest.mark.slow
    def test_gaussian_variance(self):
        samples = sample_noise(NoiseDistribution.gaussian(4.0, 21), 5, size=10000)
        self.assertTrue(3.9 <= float(np.var(samples)) <= 4.1)
        self.assertLess(abs(float(np.mean(samples))), 0.05)

    @pytest.mark.slow
    def test_laplace_variance(self):
        samples = sample_noise(NoiseDistribution.laplace(1.0, 21), 5, size=10000)
        self.assertTrue(1.93 <= float(np.var(samples)) <= 2.07)
        self.assertTrue(np.all(np.isfinite(samples)))


if __name__ == '__main__':
    unittest.main()
