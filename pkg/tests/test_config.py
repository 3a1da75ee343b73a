"""
Unit tests for configuration loading, overrides, validation and logging.
"""
import json
import os
import shutil
import tempfile
import unittest

from src.utils.config import BENCHMARK_CONFIG, ConfigManager
from src.utils.config_validator import ConfigValidationError, ConfigValidator
from src.utils.logging_config import logger


class TestConfigManager(unittest.TestCase):
    """Test cases for ConfigManager."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def _write(self, name, content):
        path = os.path.join(self.temp_dir, name)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(content)
        return path

    def test_defaults_are_benchmark(self):
        manager = ConfigManager()
        self.assertEqual(manager.get("plant.N"), 20)
        self.assertEqual(manager.get("cost.R"), [[0.3]])
        self.assertEqual(manager.get("missing.key", "fallback"), "fallback")

    def test_defaults_are_copied(self):
        manager = ConfigManager()
        manager.set("plant.N", 5)
        self.assertEqual(BENCHMARK_CONFIG["plant"]["N"], 20)

    def test_load_from_file(self):
        path = self._write("c.json", json.dumps(BENCHMARK_CONFIG))
        manager = ConfigManager(path)
        self.assertEqual(manager.get("privacy.delta"), 0.5)

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            ConfigManager(os.path.join(self.temp_dir, "absent.json"))

    def test_malformed_file(self):
        path = self._write("bad.json", "{not json")
        with self.assertRaises(ConfigValidationError):
            ConfigManager(path)

    def test_overrides_parse_json_values(self):
        manager = ConfigManager()
        manager.apply_overrides(["experiment.trials=250", "plant.x_ini=[0.0, 0.5]"])
        self.assertEqual(manager.get("experiment.trials"), 250)
        self.assertEqual(manager.get("plant.x_ini"), [0.0, 0.5])

    def test_override_errors(self):
        manager = ConfigManager()
        with self.assertRaises(ConfigValidationError):
            manager.apply_overrides(["experiment.trials"])
        with self.assertRaises(ConfigValidationError):
            manager.apply_overrides(["experiment.nonsense=3"])

    def test_experiment_defaults_merge(self):
        path = self._write("partial.json", json.dumps({
            k: v for k, v in BENCHMARK_CONFIG.items() if k != "experiment"
        }))
        experiment = ConfigManager(path).get_experiment_config()
        self.assertEqual(experiment["trials"], 10000)
        self.assertEqual(experiment["grid_points"], 12)


class TestConfigValidator(unittest.TestCase):
    """Test cases for ConfigValidator."""

    def test_default_config_is_valid(self):
        is_valid, errors, warnings = ConfigValidator(ConfigManager()).validate_all()
        self.assertTrue(is_valid)
        self.assertEqual(errors, [])
        self.assertEqual(warnings, [])

    def test_schema_violation(self):
        manager = ConfigManager()
        manager.set("plant.N", "twenty")
        is_valid, errors, _ = ConfigValidator(manager).validate_all()
        self.assertFalse(is_valid)
        self.assertTrue(any(e.startswith("plant.N") for e in errors))

    def test_unknown_section_rejected(self):
        manager = ConfigManager()
        manager.set("network.port", 8080)
        with self.assertRaises(ConfigValidationError):
            ConfigValidator(manager).raise_for_errors()

    def test_large_epsilon_warns(self):
        manager = ConfigManager()
        manager.set("privacy.epsilon", 1.5)
        is_valid, _, warnings = ConfigValidator(manager).validate_all()
        self.assertTrue(is_valid)
        self.assertTrue(any("epsilon" in w for w in warnings))

    def test_sweep_budget_above_one_is_valid(self):
        manager = ConfigManager()
        manager.set("experiment.sweep_epsilons", [0.5, 1.5])
        is_valid, errors, warnings = ConfigValidator(manager).validate_all()
        self.assertTrue(is_valid)
        self.assertEqual(errors, [])
        self.assertEqual(warnings, [])

    def test_nonpositive_sensitivity_rejected(self):
        manager = ConfigManager()
        manager.set("privacy.gamma", 0.0)
        is_valid, errors, _ = ConfigValidator(manager).validate_all()
        self.assertFalse(is_valid)
        self.assertIn("privacy.gamma must be positive", errors)

    def test_initial_state_length(self):
        manager = ConfigManager()
        manager.set("plant.x_ini", [1.0, 2.0, 3.0])
        _, errors, _ = ConfigValidator(manager).validate_all()
        self.assertIn("plant.x_ini has length 3, expected 2", errors)

    def test_experiment_checks(self):
        manager = ConfigManager()
        manager.set("experiment.trials", 10)
        manager.set("experiment.tau_grid_size", 8)
        is_valid, errors, warnings = ConfigValidator(manager).validate_all()
        self.assertFalse(is_valid)
        self.assertIn("experiment.tau_grid_size must be >= 16", errors)
        self.assertTrue(any("trials" in w for w in warnings))


class TestExperimentLogger(unittest.TestCase):
    """Test cases for context-carrying log records."""

    def test_context_block(self):
        with self.assertLogs("dpcontrol", level="INFO") as captured:
            logger.info("Tau search finished", {"tau_star": 28.1})
        message = captured.records[0].getMessage()
        text, context = message.split(" | Context: ")
        self.assertEqual(text, "Tau search finished")
        payload = json.loads(context)
        self.assertEqual(payload["tau_star"], 28.1)
        self.assertEqual(payload["logger_name"], "dpcontrol")

    def test_infeasible_is_debug(self):
        with self.assertLogs("dpcontrol", level="DEBUG") as captured:
            logger.log_infeasible(1.0, 3, "P_k > 0")
        self.assertEqual(captured.records[0].levelname, "DEBUG")
        self.assertIn("k=3", captured.records[0].getMessage())

    def test_performance_timer_records_duration(self):
        with self.assertLogs("dpcontrol", level="DEBUG") as captured:
            with logger.performance_timer("monte_carlo"):
                pass
        payload = json.loads(captured.records[-1].getMessage().split(" | Context: ")[1])
        self.assertEqual(payload["metric_name"], "monte_carlo_duration")
        self.assertGreaterEqual(payload["metric_value"], 0.0)

    def test_performance_timer_reraises(self):
        with self.assertLogs("dpcontrol", level="DEBUG") as captured:
            with self.assertRaises(ValueError):
                with logger.performance_timer("monte_carlo"):
                    raise ValueError("boom")
        self.assertEqual(captured.records[-1].levelname, "ERROR")
        self.assertIn("Failed operation: monte_carlo", captured.records[-1].getMessage())


if __name__ == '__main__':
    unittest.main()
