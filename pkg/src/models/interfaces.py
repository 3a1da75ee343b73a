"""
Base interfaces and enumerations shared across the control toolkit.
"""
from abc import ABC, abstractmethod
from enum import Enum
from typing import Tuple

import numpy as np


class Mechanism(Enum):
    """Differential-privacy mechanism families."""
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"


class ControllerKind(Enum):
    """Controller families produced by synthesis."""
    DISTRIBUTIONALLY_ROBUST = "proposed"
    LQG_BASELINE = "lqg"


class ViolationKind(Enum):
    """Kinds of problem-data invariant violations."""
    DIMENSION_MISMATCH = "DimensionMismatch"
    NOT_SYMMETRIC = "NotSymmetric"
    NOT_POSITIVE_DEFINITE = "NotPositiveDefinite"
    NOT_POSITIVE_SEMIDEFINITE = "NotPositiveSemidefinite"


class FeasibilityCondition(Enum):
    """Positive-definiteness conditions of the coupled Riccati recursions."""
    SIGMA_K = "Sigma_k > 0"
    P_K = "P_k > 0"
    PI_NEXT_MINUS_SIGMA_W = "Pi_{k+1}^-1 - Sigma_w/tau > 0"
    PI_K_MINUS_SIGMA_K = "Pi_k^-1 - Sigma_k/tau > 0"
    TERMINAL = "Sigma_N^-1 - Q_N/tau > 0"
    INFORMATION_GAP = "P_k - C'C/sigma2 > 0"
    VALUE_LOGDET = "value log-det argument > 0"


class ControlPolicy(ABC):
    """Causal output-feedback policy driven by an internal estimator state."""

    @property
    @abstractmethod
    def horizon(self) -> int:
        """Number of control steps."""
        pass

    @abstractmethod
    def initial_state(self) -> np.ndarray:
        """Estimator state before the first output arrives."""
        pass

    @abstractmethod
    def step(self, k: int, y_tilde: np.ndarray,
             state: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Map (k, privatized output, estimator state) to (input, next state)."""
        pass
