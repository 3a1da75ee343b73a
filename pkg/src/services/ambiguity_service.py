"""
KL divergences of admissible noise laws from the nominal Gaussian N(0, sigma2_lo I)
and the radius of the KL ball containing the ambiguity set.
"""
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate, special

from ..models.interfaces import Mechanism
from ..models.privacy_models import AmbiguityBounds, KlRadius, NoiseDistribution

LOG_PI = math.log(math.pi)
QUADRATURE_TARGET = 1e-9
QUADRATURE_SPAN = 40.0


class DomainError(ValueError):
    """Raised when a divergence is requested outside its domain."""
    pass


class QuadratureFailure(RuntimeError):
    """Raised when numerical integration misses its error target."""
    pass


def _positive(name: str, value: float) -> float:
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value}")
    return float(value)


def g(x: float, sigma2_lo: float) -> float:
    """log(sigma2_lo / x) + x / sigma2_lo, minimized at x = sigma2_lo with value 1."""
    x = _positive("x", x)
    sigma2_lo = _positive("sigma2_lo", sigma2_lo)
    ratio = x / sigma2_lo
    return ratio - math.log(ratio)


def kl_gaussian_gaussian(sigma2: float, sigma2_lo: float, L: int) -> float:
    """D(N(0, sigma2 I_L) || N(0, sigma2_lo I_L))."""
    return 0.5 * L * (g(sigma2, sigma2_lo) - 1.0)


def kl_laplace_gaussian(b: float, sigma2_lo: float, L: int) -> float:
    """D(Lap(b)^L || N(0, sigma2_lo I_L))."""
    b = _positive("b", b)
    return 0.5 * L * (g(2.0 * b * b, sigma2_lo) - 2.0 + LOG_PI)


def kl_divergence(dist: NoiseDistribution, sigma2_lo: float) -> float:
    if dist.mechanism == Mechanism.GAUSSIAN:
        return kl_gaussian_gaussian(dist.parameter, sigma2_lo, dist.L)
    return kl_laplace_gaussian(dist.parameter, sigma2_lo, dist.L)


def radius_eta(bounds: AmbiguityBounds) -> KlRadius:
    """
    Radius of the smallest KL ball (around the nominal) found to contain both families.

    The Gaussian branch is increasing on [sigma2_lo, inf) so its supremum
    sits at sigma2_hi; the Laplace branch is convex in 2b^2 so its supremum
    sits at one of the interval ends.
    """
    eta1 = g(bounds.sigma2_hi, bounds.sigma2_lo) - 1.0
    eta2 = max(g(2.0 * bounds.b_lo ** 2, bounds.sigma2_lo),
               g(2.0 * bounds.b_hi ** 2, bounds.sigma2_lo)) - 2.0 + LOG_PI
    return KlRadius(eta=0.5 * bounds.L * max(eta1, eta2), eta1=eta1, eta2=eta2)


def kl_quadrature_oracle(b: float, sigma2: float) -> float:
    """One-dimensional D(Lap(b) || N(0, sigma2)) by adaptive quadrature."""
    b = _positive("b", b)
    sigma2 = _positive("sigma2", sigma2)
    log_norm_lap = -math.log(2.0 * b)
    log_norm_gauss = -0.5 * math.log(2.0 * math.pi * sigma2)

    def integrand(x: float) -> float:
        log_lap = log_norm_lap - x / b
        log_gauss = log_norm_gauss - x * x / (2.0 * sigma2)
        return math.exp(log_lap) * (log_lap - log_gauss)

    # Symmetric integrand: integrate the right half and double.
    result = integrate.quad(integrand, 0.0, QUADRATURE_SPAN * b,
                            epsabs=1e-10, epsrel=1e-12, limit=200, full_output=1)
    value, error = 2.0 * result[0], 2.0 * result[1]
    if not error <= QUADRATURE_TARGET:
        raise QuadratureFailure(
            f"quadrature error {error:.3g} exceeds {QUADRATURE_TARGET:g} for b={b}, sigma2={sigma2}"
        )
    return value


def admissible_grid(bounds: AmbiguityBounds, mechanism: Mechanism,
                    points: int = 12) -> List[NoiseDistribution]:
    """Uniform grid of true noise laws over one family's parameter interval."""
    if points < 1:
        raise ValueError(f"grid needs at least one point, got {points}")
    if mechanism == Mechanism.GAUSSIAN:
        values = np.linspace(bounds.sigma2_lo, bounds.sigma2_hi, points)
        return [NoiseDistribution.gaussian(v, bounds.L) for v in values]
    values = np.linspace(bounds.b_lo, bounds.b_hi, points)
    return [NoiseDistribution.laplace(v, bounds.L) for v in values]


def sample_admissible(bounds: AmbiguityBounds, rng: np.random.Generator) -> NoiseDistribution:
    """Random member of the ambiguity set: family by coin flip, parameter uniform."""
    if rng.random() < 0.5:
        return NoiseDistribution.gaussian(rng.uniform(bounds.sigma2_lo, bounds.sigma2_hi), bounds.L)
    return NoiseDistribution.laplace(rng.uniform(bounds.b_lo, bounds.b_hi), bounds.L)


# Donsker-Varadhan helpers on finite supports


def _distribution(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size < 1:
        raise DomainError("distribution must be a non-empty vector")
    if np.any(q < 0) or not math.isclose(float(np.sum(q)), 1.0, abs_tol=1e-9):
        raise DomainError("distribution must be non-negative and sum to one")
    return q


def kl_discrete(p: np.ndarray, q: np.ndarray) -> float:
    """D(p || q) with 0 log 0 = 0; infinite when p puts mass where q has none."""
    p, q = _distribution(p), _distribution(q)
    return float(np.sum(special.rel_entr(p, q)))


def log_mgf(q: np.ndarray, f: np.ndarray) -> float:
    """log E_q[exp f]."""
    q = _distribution(q)
    return float(special.logsumexp(np.asarray(f, dtype=float), b=q))


def tilted_supremum(q: np.ndarray, f: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Maximize E_p[f] - D(p || q) over the simplex.

    The maximizer is p* proportional to q exp(f); the returned value is
    evaluated at p* rather than read off the log-partition function.
    """
    q = _distribution(q)
    f = np.asarray(f, dtype=float)
    support = q > 0
    log_weights = np.full(q.shape, -np.inf)
    log_weights[support] = np.log(q[support]) + f[support]
    p_star = np.exp(log_weights - special.logsumexp(log_weights))
    value = float(np.dot(p_star, f) - np.sum(special.rel_entr(p_star, q)))
    return value, p_star


def dv_supremum_by_ascent(q: np.ndarray, f: np.ndarray, iters: int = 200,
                          step: float = 0.5,
                          p0: Optional[np.ndarray] = None) -> Tuple[float, np.ndarray]:
    """
    Same supremum as tilted_supremum, found by projected gradient ascent in the
    entropic geometry (mirror ascent).

    Iterates log p <- log p + step * (f - log(p / q)); the renormalization that
    follows is the KL projection back onto the simplex. Starts from q unless
    ``p0`` is given.
    """
    if not 0 < step <= 1:
        raise DomainError(f"step must lie in (0, 1], got {step}")
    q = _distribution(q)
    f = np.asarray(f, dtype=float)
    support = q > 0
    log_q = np.log(q[support])
    if p0 is None:
        log_p = log_q.copy()
    else:
        log_p = np.log(np.maximum(_distribution(p0)[support], 1e-300))
        log_p -= special.logsumexp(log_p)

    for _ in range(iters):
        log_p = log_p + step * (f[support] - (log_p - log_q))
        log_p -= special.logsumexp(log_p)

    p = np.zeros(q.shape)
    p[support] = np.exp(log_p)
    value = float(np.dot(p, f) - np.sum(special.rel_entr(p, q)))
    return value, p
