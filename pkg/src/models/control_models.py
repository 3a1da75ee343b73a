"""
Data models for Riccati solutions, synthesized controllers and experiment results.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Dict, Any, Tuple

import numpy as np

from .interfaces import ControlPolicy, ControllerKind, FeasibilityCondition, Mechanism
from .privacy_models import AmbiguityBounds, NoiseDistribution
from .problem_models import CostWeights, PlantModel

Failure = Tuple[int, FeasibilityCondition]


@dataclass(frozen=True)
class ForwardPass:
    """
    Estimator-side recursion at a fixed tau.

    Sigma holds k = 0..N, P, P_inv and K hold k = 0..N-1. When the pass is
    infeasible the sequences stop at the first failed step.
    """
    Sigma: Tuple[np.ndarray, ...]
    P: Tuple[np.ndarray, ...]
    P_inv: Tuple[np.ndarray, ...]
    K: Tuple[np.ndarray, ...]
    feasible: bool
    first_failure: Optional[Failure] = None


@dataclass(frozen=True)
class BackwardPass:
    """
    Feedback-side recursion at a fixed tau.

    Pi holds k = 0..N. L_inv[k] is L_{k+1}^-1 and F[k] the feedback gain for
    k = 0..N-1. L_{k+1} itself is never formed so that singular terminal
    weights are handled; Pi_k = Q + A' L_inv[k] A. An infeasible pass keeps
    only the steps after the failure.
    """
    Pi: Tuple[np.ndarray, ...]
    L_inv: Tuple[np.ndarray, ...]
    F: Tuple[np.ndarray, ...]
    feasible: bool
    first_failure: Optional[Failure] = None


@dataclass(frozen=True)
class RiccatiSolution:
    """Both passes at one tau, plus the optimal risk-sensitive value when it exists."""
    tau: float
    forward: ForwardPass
    backward: Optional[BackwardPass]
    w_tau: Optional[float] = None
    failure: Optional[Failure] = None

    @property
    def feasible(self) -> bool:
        return self.w_tau is not None


@dataclass(frozen=True)
class Controller(ControlPolicy):
    """
    Executable output-feedback policy.

    Robust controllers propagate the risk-sensitive estimate
        x(k+1) = A x + B u + K_k (y~ - C x) + (A P_k^-1 Q / tau) x,  u = -F_k x.
    The baseline runs a Kalman measurement update with filter gain K_k, applies
    u = -F_k x_f on the filtered estimate, then predicts.
    """
    kind: ControllerKind
    plant: PlantModel
    estimator_gains: Tuple[np.ndarray, ...]
    feedback_gains: Tuple[np.ndarray, ...]
    sigma2_nom: float
    xhat0: np.ndarray
    tau: Optional[float] = None
    correction_matrices: Tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        self.validate()

    def validate(self) -> bool:
        errors = []
        N = self.plant.N
        if len(self.estimator_gains) != N:
            errors.append(f"expected {N} estimator gains, got {len(self.estimator_gains)}")
        if len(self.feedback_gains) != N:
            errors.append(f"expected {N} feedback gains, got {len(self.feedback_gains)}")
        if self.kind == ControllerKind.DISTRIBUTIONALLY_ROBUST:
            if self.tau is None or not self.tau > 0:
                errors.append("robust controller requires a positive tau")
            if len(self.correction_matrices) != N:
                errors.append(f"expected {N} correction matrices, got {len(self.correction_matrices)}")
        matrices = self.estimator_gains + self.feedback_gains + self.correction_matrices
        if not all(np.all(np.isfinite(g)) for g in matrices):
            errors.append("gains must have finite entries")
        if errors:
            raise ValueError(f"Controller validation failed: {'; '.join(errors)}")
        return True

    @property
    def horizon(self) -> int:
        return self.plant.N

    @property
    def label(self) -> str:
        return self.kind.value

    @property
    def predictor_gains(self) -> Tuple[np.ndarray, ...]:
        """Gains acting on the one-step prediction error, comparable across kinds."""
        if self.kind == ControllerKind.DISTRIBUTIONALLY_ROBUST:
            return self.estimator_gains
        return tuple(self.plant.A @ gain for gain in self.estimator_gains)

    def initial_state(self) -> np.ndarray:
        return np.array(self.xhat0, dtype=float)

    def step(self, k: int, y_tilde: np.ndarray,
             state: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """One control step; works on a single state or a (batch, n) array."""
        A, B, C = self.plant.A, self.plant.B, self.plant.C
        gain = self.estimator_gains[k]
        feedback = self.feedback_gains[k]
        innovation = y_tilde - state @ C.T

        if self.kind == ControllerKind.DISTRIBUTIONALLY_ROBUST:
            u = -(state @ feedback.T)
            next_state = (state @ A.T + u @ B.T + innovation @ gain.T
                          + state @ self.correction_matrices[k].T)
            return u, next_state

        filtered = state + innovation @ gain.T
        u = -(filtered @ feedback.T)
        return u, filtered @ A.T + u @ B.T

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "tau": self.tau,
            "sigma2_nom": self.sigma2_nom,
            "xhat0": np.asarray(self.xhat0).tolist(),
            "estimator_gains": [g.tolist() for g in self.estimator_gains],
            "feedback_gains": [g.tolist() for g in self.feedback_gains],
            "correction_matrices": [g.tolist() for g in self.correction_matrices],
        }


@dataclass(frozen=True)
class TauSearchReport:
    """Outcome of the outer minimization of tau (eta + W_tau)."""
    tau_star: float
    objective_star: float
    feasible_interval_estimate: Tuple[float, float]
    evaluations: List[Tuple[float, Optional[float]]] = field(default_factory=list)

    def __post_init__(self):
        feasible = [value for _, value in self.evaluations if value is not None]
        if feasible and self.objective_star > min(feasible):
            raise ValueError("objective_star must not exceed any recorded feasible evaluation")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tau_star": self.tau_star,
            "objective_star": self.objective_star,
            "feasible_interval_estimate": list(self.feasible_interval_estimate),
            "evaluations": len(self.evaluations),
        }


@dataclass(frozen=True)
class ExperimentSpec:
    """Controllers x true noise distributions x trials, with a master seed."""
    plant: PlantModel
    weights: CostWeights
    controllers: List[Controller]
    true_distributions: List[NoiseDistribution]
    trials: int
    master_seed: int
    bounds: Optional[AmbiguityBounds] = None

    def __post_init__(self):
        errors = []
        if self.trials < 1:
            errors.append("trials must be >= 1")
        if self.master_seed < 0:
            errors.append("master_seed must be non-negative")
        if any(c.horizon != self.plant.N for c in self.controllers):
            errors.append("controller horizon must match the plant")
        if any(d.L != self.plant.L for d in self.true_distributions):
            errors.append("noise dimension must equal p(N+1)")
        if errors:
            raise ValueError(f"ExperimentSpec validation failed: {'; '.join(errors)}")

    def out_of_bounds(self) -> List[NoiseDistribution]:
        """Distributions outside the declared ambiguity set (stress tests)."""
        if self.bounds is None:
            return []
        return [d for d in self.true_distributions if not self.bounds.contains(d)]


@dataclass(frozen=True)
class CostStats:
    """Cost statistics of one (controller, distribution) pair."""
    controller_id: str
    mechanism: Mechanism
    param: float
    mean: float
    p95: float
    worst: float
    minimum: float
    trials: int
    seed: int

    def __post_init__(self):
        slack = 1e-9 * max(abs(self.worst), 1.0)
        if self.p95 > self.worst:
            raise ValueError("p95 must not exceed the worst cost")
        if not self.minimum - slack <= self.mean <= self.worst + slack:
            raise ValueError("mean must lie between the minimum and worst cost")

    def to_row(self) -> Dict[str, Any]:
        return {
            "mechanism": self.mechanism.value,
            "param": self.param,
            "controller": self.controller_id,
            "mean": self.mean,
            "p95": self.p95,
            "worst": self.worst,
            "trials": self.trials,
            "seed": self.seed,
        }
