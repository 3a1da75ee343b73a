"""
Data models for privacy budgets, noise distributions and the KL ambiguity set.
"""
from dataclasses import dataclass
from typing import Dict, Any

from .interfaces import Mechanism


class InvalidBudget(ValueError):
    """Raised when a privacy budget is outside the range a mechanism supports."""
    pass


@dataclass(frozen=True)
class PrivacySpec:
    """(epsilon, delta) budget, adjacency radius gamma and mechanism family."""
    epsilon: float
    delta: float
    gamma: float
    mechanism: Mechanism

    def __post_init__(self):
        self.validate()

    def validate(self) -> bool:
        errors = []
        if not isinstance(self.mechanism, Mechanism):
            errors.append("mechanism must be a Mechanism enum value")
        if not self.epsilon > 0:
            errors.append(f"epsilon must be positive, got {self.epsilon}")
        if not 0 <= self.delta < 1:
            errors.append(f"delta must lie in [0, 1), got {self.delta}")
        if self.gamma < 0:
            errors.append(f"gamma must be non-negative, got {self.gamma}")
        if self.mechanism == Mechanism.GAUSSIAN:
            if self.epsilon >= 1:
                errors.append(f"Gaussian mechanism requires epsilon < 1, got {self.epsilon}")
            if self.delta <= 0:
                errors.append("Gaussian mechanism requires delta > 0")

        if errors:
            raise InvalidBudget(f"PrivacySpec validation failed: {'; '.join(errors)}")
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "gamma": self.gamma,
            "mechanism": self.mechanism.value,
        }


@dataclass(frozen=True)
class NoiseDistribution:
    """
    I.i.d. zero-mean noise over the stacked vector v(0..N) of length L.

    ``parameter`` is the variance sigma^2 for the Gaussian family and the
    scale b for the Laplace family.
    """
    mechanism: Mechanism
    parameter: float
    L: int

    def __post_init__(self):
        if not self.parameter > 0:
            raise ValueError(f"noise parameter must be positive, got {self.parameter}")
        if self.L < 1:
            raise ValueError(f"stacked dimension L must be >= 1, got {self.L}")

    @classmethod
    def gaussian(cls, sigma2: float, L: int) -> 'NoiseDistribution':
        return cls(Mechanism.GAUSSIAN, float(sigma2), int(L))

    @classmethod
    def laplace(cls, b: float, L: int) -> 'NoiseDistribution':
        return cls(Mechanism.LAPLACE, float(b), int(L))

    @property
    def variance(self) -> float:
        """Per-entry variance (2 b^2 for Laplace)."""
        if self.mechanism == Mechanism.GAUSSIAN:
            return self.parameter
        return 2.0 * self.parameter ** 2

    @property
    def label(self) -> str:
        return f"{self.mechanism.value}:{self.parameter!r}"


@dataclass(frozen=True)
class AmbiguityBounds:
    """Parameter intervals of the admissible Gaussian and Laplace families."""
    sigma2_lo: float
    sigma2_hi: float
    b_lo: float
    b_hi: float
    L: int

    def __post_init__(self):
        self.validate()

    def validate(self) -> bool:
        errors = []
        if not self.sigma2_lo > 0:
            errors.append("sigma2_lo must be positive")
        if not self.sigma2_hi >= self.sigma2_lo:
            errors.append("sigma2_hi must be >= sigma2_lo")
        if not self.b_lo > 0:
            errors.append("b_lo must be positive")
        if not self.b_hi >= self.b_lo:
            errors.append("b_hi must be >= b_lo")
        if self.L < 1:
            errors.append("L must be >= 1")
        if errors:
            raise ValueError(f"AmbiguityBounds validation failed: {'; '.join(errors)}")
        return True

    @classmethod
    def from_ratios(cls, sigma2_lo: float, b_lo: float, sigma2_ratio: float,
                    b_ratio: float, L: int) -> 'AmbiguityBounds':
        return cls(sigma2_lo, sigma2_ratio * sigma2_lo, b_lo, b_ratio * b_lo, L)

    def contains(self, dist: NoiseDistribution, rel_tol: float = 1e-12) -> bool:
        if dist.mechanism == Mechanism.GAUSSIAN:
            lo, hi = self.sigma2_lo, self.sigma2_hi
        else:
            lo, hi = self.b_lo, self.b_hi
        return lo * (1 - rel_tol) <= dist.parameter <= hi * (1 + rel_tol)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sigma2_lo": self.sigma2_lo,
            "sigma2_hi": self.sigma2_hi,
            "b_lo": self.b_lo,
            "b_hi": self.b_hi,
            "L": self.L,
        }


@dataclass(frozen=True)
class KlRadius:
    """Radius eta = (L/2) max(eta1, eta2) of the KL ball around the nominal Gaussian."""
    eta: float
    eta1: float
    eta2: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"KL radius must be positive, got {self.eta}")

    @property
    def active_branch(self) -> Mechanism:
        return Mechanism.GAUSSIAN if self.eta1 >= self.eta2 else Mechanism.LAPLACE
