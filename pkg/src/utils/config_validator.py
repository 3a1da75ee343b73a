"""
Configuration validation utilities.
Validates the structure of problem/experiment configuration files and the
consistency of the problem data they describe.
"""
from typing import Dict, Any, List, Tuple

import jsonschema
import numpy as np

from .config import ConfigManager


class ConfigValidationError(Exception):
    """Exception raised when configuration validation fails."""
    pass


_MATRIX = {
    "type": "array",
    "minItems": 1,
    "items": {"type": "array", "minItems": 1, "items": {"type": "number"}},
}
_VECTOR = {"type": "array", "minItems": 1, "items": {"type": "number"}}

CONFIG_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["plant", "cost", "privacy", "ambiguity"],
    "properties": {
        "plant": {
            "type": "object",
            "additionalProperties": False,
            "required": ["A", "B", "C", "Sigma_w", "x_ini", "Sigma_ini", "N"],
            "properties": {
                "A": _MATRIX,
                "B": _MATRIX,
                "C": _MATRIX,
                "Sigma_w": _MATRIX,
                "x_ini": _VECTOR,
                "Sigma_ini": _MATRIX,
                "N": {"type": "integer", "minimum": 1},
            },
        },
        "cost": {
            "type": "object",
            "additionalProperties": False,
            "required": ["Q", "Q_N", "R"],
            "properties": {"Q": _MATRIX, "Q_N": _MATRIX, "R": _MATRIX},
        },
        "privacy": {
            "type": "object",
            "additionalProperties": False,
            "required": ["epsilon", "delta", "gamma"],
            "properties": {
                "epsilon": {"type": "number"},
                "delta": {"type": "number"},
                "gamma": {"type": "number"},
            },
        },
        "ambiguity": {
            "type": "object",
            "additionalProperties": False,
            "required": ["sigma2_ratio", "b_ratio"],
            "properties": {
                "sigma2_ratio": {"type": "number"},
                "b_ratio": {"type": "number"},
            },
        },
        "experiment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "trials": {"type": "integer"},
                "master_seed": {"type": "integer", "minimum": 0},
                "grid_points": {"type": "integer"},
                "tau_grid_size": {"type": "integer"},
                "refine_iters": {"type": "integer"},
                "tau_curve_min": {"type": "number"},
                "tau_curve_max": {"type": "number"},
                "tau_curve_points": {"type": "integer"},
                "sweep_epsilons": _VECTOR,
                "sweep_deltas": _VECTOR,
                "workers": {"type": "integer"},
            },
        },
        "logging": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "level": {"type": "string"},
                "file": {"type": ["string", "null"]},
                "format": {"type": "string"},
            },
        },
    },
}


class ConfigValidator:
    """Validates configuration files before problem data is built from them."""

    def __init__(self, config_manager: ConfigManager):
        self.config = config_manager
        self.validation_errors: List[str] = []
        self.validation_warnings: List[str] = []

    def validate_all(self) -> Tuple[bool, List[str], List[str]]:
        """
        Validate all configuration aspects.

        Returns:
            Tuple of (is_valid, errors, warnings)
        """
        self.validation_errors.clear()
        self.validation_warnings.clear()

        self._validate_schema()
        if self.validation_errors:
            # Semantic checks assume the structure is sound.
            return False, self.validation_errors, self.validation_warnings

        self._validate_plant_config()
        self._validate_privacy_config()
        self._validate_ambiguity_config()
        self._validate_experiment_config()
        self._validate_logging_config()

        return len(self.validation_errors) == 0, self.validation_errors, self.validation_warnings

    def raise_for_errors(self) -> None:
        """Validate and raise ConfigValidationError listing every problem."""
        is_valid, errors, _ = self.validate_all()
        if not is_valid:
            raise ConfigValidationError("; ".join(errors))

    def _validate_schema(self) -> None:
        validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
        for error in sorted(validator.iter_errors(self.config.config_data), key=str):
            location = ".".join(str(p) for p in error.absolute_path) or "<root>"
            self.validation_errors.append(f"{location}: {error.message}")

    def _validate_plant_config(self) -> None:
        """Check matrix shapes; definiteness is checked by validate_model."""
        for section, names in (("plant", ("A", "B", "C", "Sigma_w", "Sigma_ini")),
                               ("cost", ("Q", "Q_N", "R"))):
            for name in names:
                rows = self.config.get(f"{section}.{name}")
                if len({len(row) for row in rows}) != 1:
                    self.validation_errors.append(
                        f"{section}.{name} has rows of unequal length"
                    )

        n = len(self.config.get("plant.A"))
        x_ini = self.config.get("plant.x_ini")
        if len(x_ini) != n:
            self.validation_errors.append(
                f"plant.x_ini has length {len(x_ini)}, expected {n}"
            )

        values = [self.config.get(f"plant.{k}") for k in ("A", "B", "C")]
        if not all(np.all(np.isfinite(np.asarray(v, dtype=float))) for v in values if v):
            self.validation_errors.append("plant matrices must have finite entries")

    def _validate_privacy_config(self) -> None:
        epsilon = self.config.get("privacy.epsilon")
        delta = self.config.get("privacy.delta")
        gamma = self.config.get("privacy.gamma")

        if epsilon <= 0:
            self.validation_errors.append("privacy.epsilon must be positive")
        elif epsilon >= 1:
            self.validation_warnings.append(
                "privacy.epsilon >= 1: the Gaussian mechanism cannot be calibrated"
            )
        if not 0 <= delta < 1:
            self.validation_errors.append("privacy.delta must lie in [0, 1)")
        elif delta == 0:
            self.validation_warnings.append(
                "privacy.delta = 0: the Gaussian mechanism cannot be calibrated"
            )
        if gamma <= 0:
            self.validation_errors.append("privacy.gamma must be positive")

    def _validate_ambiguity_config(self) -> None:
        for key in ("sigma2_ratio", "b_ratio"):
            ratio = self.config.get(f"ambiguity.{key}")
            if ratio < 1:
                self.validation_errors.append(f"ambiguity.{key} must be >= 1")

    def _validate_experiment_config(self) -> None:
        experiment = self.config.get_experiment_config()

        if experiment["trials"] < 1:
            self.validation_errors.append("experiment.trials must be a positive integer")
        if experiment["grid_points"] < 1:
            self.validation_errors.append("experiment.grid_points must be a positive integer")
        if experiment["tau_grid_size"] < 16:
            self.validation_errors.append("experiment.tau_grid_size must be >= 16")
        if experiment["refine_iters"] < 0:
            self.validation_errors.append("experiment.refine_iters must be non-negative")
        if experiment["workers"] < 1:
            self.validation_errors.append("experiment.workers must be a positive integer")
        if not 0 < experiment["tau_curve_min"] < experiment["tau_curve_max"]:
            self.validation_errors.append(
                "experiment.tau_curve_min must be positive and below tau_curve_max"
            )
        if experiment["tau_curve_points"] < 2:
            self.validation_errors.append("experiment.tau_curve_points must be >= 2")
        if any(e <= 0 for e in experiment["sweep_epsilons"]):
            self.validation_errors.append("experiment.sweep_epsilons must be positive")
        if any(not 0 < d < 1 for d in experiment["sweep_deltas"]):
            self.validation_errors.append("experiment.sweep_deltas must lie in (0, 1)")
        if experiment["trials"] < 100:
            self.validation_warnings.append(
                f"experiment.trials = {experiment['trials']}: percentiles will be noisy"
            )

    def _validate_logging_config(self) -> None:
        """Validate logging configuration."""
        log_level = self.config.get('logging.level', 'INFO')
        valid_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if log_level.upper() not in valid_levels:
            self.validation_errors.append(f"Invalid log level: {log_level}. Must be one of {valid_levels}")
