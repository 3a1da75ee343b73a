"""
dpcontrol

Distributionally robust, risk-sensitive LQG control of linear systems whose
outputs are released through differential-privacy mechanisms.
"""

__version__ = "0.1.0"
__description__ = "Distributionally robust control of differentially private linear systems"

# Import main components for easy access
from .models import ControllerKind, CostWeights, Mechanism, PlantModel, PrivacySpec
from .services.synthesis_service import synthesize_dr, synthesize_lqg
from .services.simulation_service import monte_carlo
from .cli.experiment_cli import main as cli_main

__all__ = [
    "ControllerKind",
    "CostWeights",
    "Mechanism",
    "PlantModel",
    "PrivacySpec",
    "synthesize_dr",
    "synthesize_lqg",
    "monte_carlo",
    "cli_main",
    "__version__",
]
