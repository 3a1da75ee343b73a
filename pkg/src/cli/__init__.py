# CLI module for the experiment runner

from .base_cli import BaseCLI
from .experiment_cli import ExperimentCLI, main

__all__ = ['BaseCLI', 'ExperimentCLI', 'main']
