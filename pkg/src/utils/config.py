"""
Configuration management for problem data and experiment settings.
"""
import copy
import json
import math
from typing import Dict, Any, Optional, Iterable
from pathlib import Path


# Plant, weights and privacy budget of the two-state benchmark.
BENCHMARK_CONFIG: Dict[str, Any] = {
    "plant": {
        "A": [[1.15, 0.1], [0.0, 1.05]],
        "B": [[1.0], [0.5]],
        "C": [[1.0, 0.5]],
        "Sigma_w": [[0.05, 0.0], [0.0, 0.05]],
        "x_ini": [1.0, -1.0],
        "Sigma_ini": [[0.2, 0.0], [0.0, 0.2]],
        "N": 20,
    },
    "cost": {
        "Q": [[1.0, 0.0], [0.0, 1.0]],
        "Q_N": [[1.0, 0.0], [0.0, 1.0]],
        "R": [[0.3]],
    },
    "privacy": {
        "epsilon": math.log(2.0),
        "delta": 0.5,
        "gamma": 0.5,
    },
    "ambiguity": {
        "sigma2_ratio": 1.2,
        "b_ratio": 1.2,
    },
    "experiment": {
        "trials": 10000,
        "master_seed": 0,
        "grid_points": 12,
        "tau_grid_size": 64,
        "refine_iters": 60,
        "tau_curve_min": 15.0,
        "tau_curve_max": 100.0,
        "tau_curve_points": 200,
        "sweep_epsilons": [math.log(1.5), math.log(2.0), math.log(3.0)],
        "sweep_deltas": [0.3, 0.5],
        "workers": 1,
    },
}


class ConfigManager:
    """Manages the problem configuration and command-line overrides."""

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = Path(config_file) if config_file else None
        self.config_data: Dict[str, Any] = {}
        self.load_config()

    def load_config(self) -> None:
        """Load configuration from file, or the embedded benchmark defaults."""
        if self.config_file is None:
            self.config_data = copy.deepcopy(BENCHMARK_CONFIG)
            return

        if not self.config_file.exists():
            raise FileNotFoundError(f"Config file not found: {self.config_file}")

        # Imported here to avoid a cycle with the validator module.
        from .config_validator import ConfigValidationError

        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                self.config_data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigValidationError(
                f"Could not parse config file {self.config_file}: {e}"
            ) from e

        if not isinstance(self.config_data, dict):
            raise ConfigValidationError(
                f"Config file {self.config_file} must contain a JSON object"
            )

    def _set_nested_value(self, key_path: str, value: Any) -> None:
        """Set a nested configuration value using dot notation."""
        keys = key_path.split('.')
        current = self.config_data

        for key in keys[:-1]:
            if key not in current:
                current[key] = {}
            current = current[key]

        current[keys[-1]] = value

    def has(self, key_path: str) -> bool:
        """Check whether a dot-notation key exists."""
        current: Any = self.config_data
        for key in key_path.split('.'):
            if not isinstance(current, dict) or key not in current:
                return False
            current = current[key]
        return True

    def get(self, key_path: str, default: Any = None) -> Any:
        """Get configuration value using dot notation."""
        keys = key_path.split('.')
        current = self.config_data

        try:
            for key in keys:
                current = current[key]
            return current
        except (KeyError, TypeError):
            return default

    def set(self, key_path: str, value: Any) -> None:
        """Set configuration value using dot notation."""
        self._set_nested_value(key_path, value)

    def apply_overrides(self, overrides: Iterable[str]) -> None:
        """Apply ``key=value`` overrides; keys must already exist."""
        from .config_validator import ConfigValidationError

        for item in overrides:
            if '=' not in item:
                raise ConfigValidationError(
                    f"Override '{item}' must have the form key=value"
                )
            key_path, raw_value = item.split('=', 1)
            key_path = key_path.strip()
            if not self.has(key_path):
                raise ConfigValidationError(
                    f"Override references unknown config key: {key_path}"
                )
            self.set(key_path, self._parse_value(raw_value.strip()))

    @staticmethod
    def _parse_value(raw_value: str) -> Any:
        try:
            return json.loads(raw_value)
        except json.JSONDecodeError:
            return raw_value

    def to_dict(self) -> Dict[str, Any]:
        """Deep copy of the resolved configuration."""
        return copy.deepcopy(self.config_data)

    def get_experiment_config(self) -> Dict[str, Any]:
        """Get experiment settings merged over the defaults."""
        merged = copy.deepcopy(BENCHMARK_CONFIG['experiment'])
        merged.update(self.get('experiment', {}) or {})
        return merged

    def get_logging_config(self) -> Dict[str, Any]:
        """Get logging settings."""
        return {
            'level': self.get('logging.level', 'INFO'),
            'file': self.get('logging.file', None),
            'format': self.get(
                'logging.format',
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            ),
        }


# Global configuration instance
config = ConfigManager()
