"""
Privacy calibration service for the Gaussian and Laplace output mechanisms.

The privatized output is y~(k) = C x(k) + v(k). Two state trajectories are
adjacent when their l1 distance is at most gamma. All logarithms are natural.
"""
import math
from typing import Tuple, Union

import numpy as np

from ..models.interfaces import Mechanism
from ..models.privacy_models import InvalidBudget, NoiseDistribution, PrivacySpec

SeedLike = Union[int, np.random.SeedSequence]

# Largest |2u| fed to the inverse CDF; keeps log1p(-|2u|) finite.
_UNIFORM_CAP = np.nextafter(1.0, 0.0)


def induced_norms(C: np.ndarray) -> Tuple[float, float]:
    """Return (max absolute column sum, largest singular value) of C."""
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if C.shape[0] < 1 or C.shape[1] < 1:
        raise ValueError(f"C must have nonzero dimensions, got shape {C.shape}")
    return float(np.linalg.norm(C, 1)), float(np.linalg.norm(C, 2))


def _require(spec: PrivacySpec, mechanism: Mechanism) -> None:
    if spec.mechanism != mechanism:
        raise InvalidBudget(
            f"expected a {mechanism.value} budget, got {spec.mechanism.value}"
        )


def gaussian_sigma_lower(spec: PrivacySpec, C: np.ndarray) -> float:
    """Smallest variance making the Gaussian mechanism (epsilon, delta)-DP."""
    _require(spec, Mechanism.GAUSSIAN)
    _, norm2 = induced_norms(C)
    return 2.0 * math.log(1.25 / spec.delta) * (norm2 * spec.gamma) ** 2 / spec.epsilon ** 2


def laplace_b_lower(spec: PrivacySpec, C: np.ndarray) -> float:
    """Smallest scale making the Laplace mechanism epsilon-DP."""
    _require(spec, Mechanism.LAPLACE)
    norm1, _ = induced_norms(C)
    return norm1 * spec.gamma / spec.epsilon


def calibrate(spec: PrivacySpec, C: np.ndarray) -> float:
    """Lower bound of the noise parameter for the spec's mechanism."""
    if spec.mechanism == Mechanism.GAUSSIAN:
        return gaussian_sigma_lower(spec, C)
    return laplace_b_lower(spec, C)


def gaussian_epsilon_for_variance(sigma2: float, delta: float, gamma: float,
                                  C: np.ndarray) -> float:
    """Privacy level reached by a Gaussian mechanism of variance sigma2."""
    if not sigma2 > 0:
        raise InvalidBudget(f"variance must be positive, got {sigma2}")
    if not 0 < delta < 1:
        raise InvalidBudget(f"delta must lie in (0, 1), got {delta}")
    _, norm2 = induced_norms(C)
    return math.sqrt(2.0 * math.log(1.25 / delta) / sigma2) * norm2 * gamma


def laplace_epsilon_for_scale(b: float, gamma: float, C: np.ndarray) -> float:
    """Privacy level reached by a Laplace mechanism of scale b."""
    if not b > 0:
        raise InvalidBudget(f"scale must be positive, got {b}")
    norm1, _ = induced_norms(C)
    return norm1 * gamma / b


def laplace_privacy_loss(C: np.ndarray, delta_traj: np.ndarray, b: float) -> float:
    """
    Worst-case log density ratio of the stacked Laplace mechanism.

    ``delta_traj`` is the difference of two state trajectories, shape
    (N+1, n) or (n,). The supremum over outputs of
    log pi(y - C dx) / pi(y) equals ||C dx||_1 / b.
    """
    if not b > 0:
        raise InvalidBudget(f"scale must be positive, got {b}")
    shifts = np.atleast_2d(np.asarray(delta_traj, dtype=float)) @ np.asarray(C, dtype=float).T
    return float(np.sum(np.abs(shifts))) / b


def draw_noise(dist: NoiseDistribution, rng: np.random.Generator,
               shape: Tuple[int, ...]) -> np.ndarray:
    """Draw i.i.d. entries of the given distribution from an existing generator."""
    if dist.mechanism == Mechanism.GAUSSIAN:
        return rng.normal(0.0, math.sqrt(dist.parameter), size=shape)

    u = rng.uniform(-0.5, 0.5, size=shape)
    magnitude = np.minimum(2.0 * np.abs(u), _UNIFORM_CAP)
    return -dist.parameter * np.sign(u) * np.log1p(-magnitude)


def sample_noise(dist: NoiseDistribution, seed: SeedLike, size: int = 0) -> np.ndarray:
    """
    Stacked noise vector v(0..N) of length L, or ``size`` such vectors.

    Each call owns a private generator, so equal (dist, seed) pairs give
    bit-identical output.
    """
    rng = np.random.default_rng(seed)
    shape = (size, dist.L) if size else (dist.L,)
    return draw_noise(dist, rng, shape)
