# Services: calibration, divergences, Riccati recursions, synthesis and simulation

from .ambiguity_service import DomainError, QuadratureFailure, radius_eta
from .experiment_store import ExperimentStore
from .privacy_service import gaussian_sigma_lower, laplace_b_lower, sample_noise
from .riccati_service import objective, solve_riccati, w_tau
from .simulation_service import monte_carlo, privacy_sweep, run_trial
from .synthesis_service import (
    IndexOutOfRange,
    NoFeasibleTau,
    control_step,
    optimize_tau,
    synthesize_dr,
    synthesize_lqg,
)

__all__ = [
    'DomainError',
    'ExperimentStore',
    'IndexOutOfRange',
    'NoFeasibleTau',
    'QuadratureFailure',
    'control_step',
    'gaussian_sigma_lower',
    'laplace_b_lower',
    'monte_carlo',
    'objective',
    'optimize_tau',
    'privacy_sweep',
    'radius_eta',
    'run_trial',
    'sample_noise',
    'solve_riccati',
    'synthesize_dr',
    'synthesize_lqg',
    'w_tau',
]
