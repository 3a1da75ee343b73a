"""
Logging utilities for synthesis and simulation runs.
Provides context-carrying log records and exception logging.
"""
import logging
import logging.handlers
import sys
import functools
import json
import time
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Dict, Any, Optional, Callable, Iterator

from .config import config


class ExperimentLogger:
    """Logger that appends a JSON context block to every message."""

    def __init__(self, name: str = "dpcontrol"):
        self.name = name
        self.logger = logging.getLogger(name)
        self._setup_logger()

    def _setup_logger(self) -> None:
        """Setup logger with configuration from config file."""
        self.logger.handlers.clear()
        self.logger.propagate = False

        logging_config = config.get_logging_config()
        log_level = str(logging_config['level']).upper()
        formatter = logging.Formatter(logging_config['format'])

        self.logger.setLevel(getattr(logging, log_level, logging.INFO))

        # Diagnostics go to stderr; stdout carries command results.
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        log_file = logging_config['file']
        if log_file:
            log_path = Path(log_file)
            log_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                log_path, maxBytes=10 * 1024 * 1024, backupCount=3
            )
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

    def set_level(self, level: str) -> None:
        """Change the level of the logger and its handlers."""
        numeric = getattr(logging, level.upper(), logging.INFO)
        self.logger.setLevel(numeric)

    def info(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        self._log_with_context(logging.INFO, message, extra)

    def debug(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        self._log_with_context(logging.DEBUG, message, extra)

    def warning(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        self._log_with_context(logging.WARNING, message, extra)

    def error(self, message: str, extra: Optional[Dict[str, Any]] = None,
              exc_info: bool = False) -> None:
        self._log_with_context(logging.ERROR, message, extra, exc_info=exc_info)

    def _log_with_context(self, level: int, message: str,
                          extra: Optional[Dict[str, Any]] = None,
                          exc_info: bool = False) -> None:
        """Log message with additional context information."""
        if not self.logger.isEnabledFor(level):
            return

        context = {
            'timestamp': datetime.now().isoformat(),
            'logger_name': self.name
        }
        if extra:
            context.update(extra)

        context_str = json.dumps(context, default=str)
        self.logger.log(level, f"{message} | Context: {context_str}", exc_info=exc_info)

    def log_stage_start(self, stage: str) -> None:
        """Log the start of a pipeline stage."""
        self.info(f"Stage started: {stage}", {'stage': stage, 'event_type': 'stage_start'})

    def log_stage_complete(self, stage: str, duration: float) -> None:
        """Log the completion of a pipeline stage."""
        self.info(f"Stage completed: {stage} (took {duration:.2f}s)", {
            'stage': stage,
            'duration_seconds': duration,
            'event_type': 'stage_complete'
        })

    def log_tau_evaluation(self, tau: float, value: Optional[float]) -> None:
        """Log one evaluation of the outer objective."""
        self.debug(f"tau={tau:.6g} objective={value}", {
            'tau': tau,
            'objective': value,
            'event_type': 'tau_evaluation'
        })

    def log_infeasible(self, tau: float, step: int, condition: str) -> None:
        """Log the first violated Riccati condition at a given tau."""
        self.debug(f"tau={tau:.6g} infeasible at k={step}: {condition}", {
            'tau': tau,
            'step': step,
            'condition': condition,
            'event_type': 'infeasible'
        })

    def log_performance_metric(self, metric_name: str, value: float,
                               unit: str = "seconds") -> None:
        """Log performance metric."""
        self.debug(f"Performance metric: {metric_name} = {value} {unit}", {
            'metric_name': metric_name,
            'metric_value': value,
            'metric_unit': unit,
            'event_type': 'performance_metric'
        })

    @contextmanager
    def performance_timer(self, operation_name: str) -> Iterator[None]:
        """Context manager for timing operations."""
        start_time = time.perf_counter()
        self.debug(f"Starting operation: {operation_name}")

        try:
            yield
            duration = time.perf_counter() - start_time
            self.log_performance_metric(f"{operation_name}_duration", duration)
        except Exception as e:
            duration = time.perf_counter() - start_time
            self.error(f"Failed operation: {operation_name} after {duration:.2f}s - {str(e)}")
            raise


def log_exceptions(func: Callable) -> Callable:
    """Decorator to automatically log exceptions."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except Exception as e:
            func_name = f"{func.__module__}.{func.__name__}"
            logger.debug(f"Exception in {func_name}: {str(e)}",
                         {'function': func_name, 'exception_type': type(e).__name__})
            raise

    return wrapper


def setup_logging() -> ExperimentLogger:
    """Setup and return the main logger."""
    return ExperimentLogger("dpcontrol")


# Global logger instance
logger = setup_logging()
