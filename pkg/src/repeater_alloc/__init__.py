"""Minimum-cost quantum repeater allocation on fiber networks via integer programming."""

from .errors import (
    AuditError,
    InfeasibleError,
    NetworkError,
    PlanFailure,
    RequirementError,
    SolverLimitError,
)
from .network import FiberNetwork, build_candidate_links, build_pair_set, load_network
from .planner import DeploymentPlan, PlanOptions, audit, plan
from .requirements import Bounds, ChainRequirements, HardwareConstants, derive_bounds, load_requirements

__all__ = [
    "AuditError",
    "Bounds",
    "ChainRequirements",
    "DeploymentPlan",
    "FiberNetwork",
    "HardwareConstants",
    "InfeasibleError",
    "NetworkError",
    "PlanFailure",
    "PlanOptions",
    "RequirementError",
    "SolverLimitError",
    "audit",
    "build_candidate_links",
    "build_pair_set",
    "derive_bounds",
    "load_network",
    "load_requirements",
    "plan",
]

__version__ = "0.1.0"
