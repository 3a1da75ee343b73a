"""
Data models for the plant, cost weights and closed-loop trajectories.
"""
from dataclasses import dataclass, field, replace
from typing import List, Optional, Dict, Any, Tuple

import numpy as np

from .interfaces import Mechanism, ViolationKind
from .privacy_models import PrivacySpec
from ..utils.linalg import (
    is_positive_semidefinite,
    relative_asymmetry,
    spd_cholesky,
    symmetrize,
)

SYMMETRY_TOLERANCE = 1e-12
PIVOT_TOLERANCE = 1e-12


def _frozen_array(value: Any, ndim: int) -> np.ndarray:
    array = np.array(value, dtype=float)
    if ndim == 2 and array.ndim == 1:
        array = array.reshape(-1, 1) if array.size else array.reshape(0, 0)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Violation:
    """One violated problem-data invariant."""
    kind: ViolationKind
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind.value}({self.field}): {self.message}"


class ModelValidationError(ValueError):
    """Raised when plant or cost data violate their invariants."""

    def __init__(self, violations: List[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))

    @property
    def fields(self) -> List[str]:
        return [v.field for v in self.violations]


@dataclass(frozen=True)
class PlantModel:
    """Linear plant x(k+1) = A x(k) + B u(k) + w(k) observed through C."""
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Sigma_w: np.ndarray
    x_ini: np.ndarray
    Sigma_ini: np.ndarray
    N: int

    def __post_init__(self):
        for name in ("A", "B", "C", "Sigma_w", "Sigma_ini"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), 2))
        object.__setattr__(self, "x_ini", _frozen_array(self.x_ini, 1).reshape(-1))
        object.__setattr__(self, "N", int(self.N))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def L(self) -> int:
        """Length of the stacked measurement-noise vector v(0..N)."""
        return self.p * (self.N + 1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "Sigma_w": self.Sigma_w.tolist(),
            "x_ini": self.x_ini.tolist(),
            "Sigma_ini": self.Sigma_ini.tolist(),
            "N": self.N,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PlantModel':
        if not isinstance(data, dict):
            raise ValueError("Data must be a dictionary")
        return cls(**data)


@dataclass(frozen=True)
class CostWeights:
    """Quadratic stage and terminal weights."""
    Q: np.ndarray
    Q_N: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        for name in ("Q", "Q_N", "R"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), 2))

    def to_dict(self) -> Dict[str, Any]:
        return {"Q": self.Q.tolist(), "Q_N": self.Q_N.tolist(), "R": self.R.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CostWeights':
        if not isinstance(data, dict):
            raise ValueError("Data must be a dictionary")
        return cls(**data)


@dataclass(frozen=True)
class Trajectory:
    """States x(0..N), inputs u(0..N-1) and privatized outputs y~(0..N)."""
    states: np.ndarray
    inputs: np.ndarray
    outputs_privatized: np.ndarray

    def __post_init__(self):
        for name in ("states", "inputs", "outputs_privatized"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), 2))

    @property
    def N(self) -> int:
        return self.inputs.shape[0]

    def check_lengths(self) -> List[Violation]:
        violations = []
        if self.states.shape[0] != self.N + 1:
            violations.append(Violation(
                ViolationKind.DIMENSION_MISMATCH, "states",
                f"expected {self.N + 1} states for {self.N} inputs, got {self.states.shape[0]}"
            ))
        if self.outputs_privatized.size and self.outputs_privatized.shape[0] != self.N + 1:
            violations.append(Violation(
                ViolationKind.DIMENSION_MISMATCH, "outputs_privatized",
                f"expected {self.N + 1} outputs, got {self.outputs_privatized.shape[0]}"
            ))
        return violations


def _check_shape(violations: List[Violation], name: str, array: np.ndarray,
                 shape: Tuple[int, ...]) -> bool:
    if array.shape != shape:
        violations.append(Violation(
            ViolationKind.DIMENSION_MISMATCH, name,
            f"expected shape {shape}, got {array.shape}"
        ))
        return False
    return True


def _check_symmetric(violations: List[Violation], name: str,
                     matrix: np.ndarray) -> Optional[np.ndarray]:
    """Symmetrize tiny asymmetries, report larger ones."""
    asymmetry = relative_asymmetry(matrix)
    if asymmetry > SYMMETRY_TOLERANCE:
        violations.append(Violation(
            ViolationKind.NOT_SYMMETRIC, name,
            f"relative asymmetry {asymmetry:.3g} exceeds {SYMMETRY_TOLERANCE:g}"
        ))
        return None
    if asymmetry == 0.0:
        return matrix
    return _frozen_array(symmetrize(matrix), 2)


def _check_definite(violations: List[Violation], name: str, matrix: np.ndarray,
                    semidefinite: bool = False) -> None:
    if semidefinite:
        if not is_positive_semidefinite(matrix, PIVOT_TOLERANCE):
            violations.append(Violation(
                ViolationKind.NOT_POSITIVE_SEMIDEFINITE, name,
                "matrix has a negative eigenvalue"
            ))
        return
    scale = float(np.max(np.diag(matrix))) if matrix.size else 0.0
    if spd_cholesky(matrix, PIVOT_TOLERANCE, scale=scale) is None:
        violations.append(Violation(
            ViolationKind.NOT_POSITIVE_DEFINITE, name,
            "symmetric factorization failed"
        ))


def collect_violations(plant: PlantModel,
                       weights: CostWeights) -> Tuple[List[Violation], Dict[str, np.ndarray]]:
    """Check every invariant; also return symmetrized replacements."""
    violations: List[Violation] = []
    replacements: Dict[str, np.ndarray] = {}

    if plant.A.ndim != 2 or plant.A.shape[0] != plant.A.shape[1] or plant.A.shape[0] < 1:
        violations.append(Violation(
            ViolationKind.DIMENSION_MISMATCH, "A",
            f"A must be a non-empty square matrix, got shape {plant.A.shape}"
        ))
        return violations, replacements

    n = plant.n
    m = plant.B.shape[1] if plant.B.ndim == 2 else 0
    p = plant.C.shape[0] if plant.C.ndim == 2 else 0

    if m < 1:
        violations.append(Violation(ViolationKind.DIMENSION_MISMATCH, "B",
                                    "B must have at least one column"))
    else:
        _check_shape(violations, "B", plant.B, (n, m))
    if p < 1:
        violations.append(Violation(ViolationKind.DIMENSION_MISMATCH, "C",
                                    "C must have at least one row"))
    else:
        _check_shape(violations, "C", plant.C, (p, n))
    _check_shape(violations, "x_ini", plant.x_ini, (n,))
    if plant.N < 1:
        violations.append(Violation(ViolationKind.DIMENSION_MISMATCH, "N",
                                    f"horizon must be positive, got {plant.N}"))

    square_fields = [
        ("Sigma_w", plant.Sigma_w, n, False),
        ("Sigma_ini", plant.Sigma_ini, n, False),
        ("Q", weights.Q, n, True),
        ("Q_N", weights.Q_N, n, True),
        ("R", weights.R, m, False),
    ]
    for name, matrix, size, semidefinite in square_fields:
        if size < 1 or not _check_shape(violations, name, matrix, (size, size)):
            continue
        checked = _check_symmetric(violations, name, matrix)
        if checked is None:
            continue
        if checked is not matrix:
            replacements[name] = checked
        _check_definite(violations, name, checked, semidefinite)

    return violations, replacements


def validate_model(plant: PlantModel,
                   weights: CostWeights) -> Tuple[PlantModel, CostWeights]:
    """
    Validate problem data.

    Returns the (plant, weights) pair, with round-off asymmetries removed.
    Raises ModelValidationError listing every violated invariant.
    """
    violations, replacements = collect_violations(plant, weights)
    if violations:
        raise ModelValidationError(violations)

    plant_fields = {k: v for k, v in replacements.items() if k in ("Sigma_w", "Sigma_ini")}
    weight_fields = {k: v for k, v in replacements.items() if k in ("Q", "Q_N", "R")}
    if plant_fields:
        plant = replace(plant, **plant_fields)
    if weight_fields:
        weights = replace(weights, **weight_fields)
    return plant, weights


def quadratic_cost(states: np.ndarray, inputs: np.ndarray,
                   weights: CostWeights) -> np.ndarray:
    """
    Finite-horizon cost for one trajectory or a batch.

    ``states`` has shape (..., N+1, n) and ``inputs`` (..., N, m).
    """
    running_states = states[..., :-1, :]
    terminal = states[..., -1, :]
    state_terms = np.einsum('...ki,ij,...kj->...', running_states, weights.Q, running_states)
    input_terms = np.einsum('...ki,ij,...kj->...', inputs, weights.R, inputs)
    terminal_term = np.einsum('...i,ij,...j->...', terminal, weights.Q_N, terminal)
    return 0.5 * terminal_term + 0.5 * (state_terms + input_terms)


def stage_cost(trajectory: Trajectory, weights: CostWeights) -> float:
    """J = x_N' Q_N x_N / 2 + sum_k (x_k' Q x_k + u_k' R u_k) / 2."""
    violations = trajectory.check_lengths()
    n = weights.Q.shape[0]
    m = weights.R.shape[0]
    if trajectory.states.shape[1:] != (n,):
        violations.append(Violation(ViolationKind.DIMENSION_MISMATCH, "states",
                                    f"state dimension must be {n}"))
    if trajectory.N and trajectory.inputs.shape[1:] != (m,):
        violations.append(Violation(ViolationKind.DIMENSION_MISMATCH, "inputs",
                                    f"input dimension must be {m}"))
    if violations:
        raise ModelValidationError(violations)

    inputs = trajectory.inputs if trajectory.N else np.zeros((0, m))
    return float(quadratic_cost(trajectory.states, inputs, weights))


@dataclass(frozen=True)
class ProblemSetup:
    """Problem data and experiment settings built from a configuration."""
    plant: PlantModel
    weights: CostWeights
    epsilon: float
    delta: float
    gamma: float
    sigma2_ratio: float
    b_ratio: float
    experiment: Dict[str, Any] = field(default_factory=dict)

    def privacy_spec(self, mechanism: Mechanism,
                     epsilon: Optional[float] = None,
                     delta: Optional[float] = None) -> PrivacySpec:
        return PrivacySpec(
            epsilon=self.epsilon if epsilon is None else epsilon,
            delta=self.delta if delta is None else delta,
            gamma=self.gamma,
            mechanism=mechanism,
        )

    @classmethod
    def from_config(cls, data: Dict[str, Any],
                    experiment_defaults: Optional[Dict[str, Any]] = None) -> 'ProblemSetup':
        """Build validated domain objects from a configuration dictionary."""
        plant = PlantModel.from_dict(dict(data["plant"]))
        weights = CostWeights.from_dict(dict(data["cost"]))
        plant, weights = validate_model(plant, weights)

        experiment = dict(experiment_defaults or {})
        experiment.update(data.get("experiment", {}) or {})
        return cls(
            plant=plant,
            weights=weights,
            epsilon=float(data["privacy"]["epsilon"]),
            delta=float(data["privacy"]["delta"]),
            gamma=float(data["privacy"]["gamma"]),
            sigma2_ratio=float(data["ambiguity"]["sigma2_ratio"]),
            b_ratio=float(data["ambiguity"]["b_ratio"]),
            experiment=experiment,
        )
