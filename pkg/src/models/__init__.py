"""Data models and interfaces."""
from .interfaces import ControllerKind, FeasibilityCondition, Mechanism, ViolationKind
from .privacy_models import AmbiguityBounds, InvalidBudget, KlRadius, NoiseDistribution, PrivacySpec
from .problem_models import (
    CostWeights,
    ModelValidationError,
    PlantModel,
    ProblemSetup,
    Trajectory,
    stage_cost,
    validate_model,
)
from .control_models import (
    BackwardPass,
    Controller,
    CostStats,
    ExperimentSpec,
    ForwardPass,
    RiccatiSolution,
    TauSearchReport,
)

__all__ = [
    "AmbiguityBounds",
    "BackwardPass",
    "Controller",
    "ControllerKind",
    "CostStats",
    "CostWeights",
    "ExperimentSpec",
    "FeasibilityCondition",
    "ForwardPass",
    "InvalidBudget",
    "KlRadius",
    "Mechanism",
    "ModelValidationError",
    "NoiseDistribution",
    "PlantModel",
    "PrivacySpec",
    "ProblemSetup",
    "RiccatiSolution",
    "TauSearchReport",
    "Trajectory",
    "ViolationKind",
    "stage_cost",
    "validate_model",
]
