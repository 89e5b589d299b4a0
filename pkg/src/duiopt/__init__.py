"""Optimal assignment of UI elements to devices in multi-user sessions."""

__version__ = "0.1.0"

from .model import (
    DeviceSpec,
    ElementSpec,
    Pin,
    ProblemInstance,
    Solution,
    UserSpec,
    load_scenario,
    save_scenario,
    validate,
)
from .formulation import (
    DerivedCoefficients,
    InfeasiblePinError,
    Milp,
    build,
    compatibility,
    mean_importance,
    preprocess,
    write_lp,
)
from .solver import BnbNode, SolveOptions, check_feasible, solve, solve_lp
from .oracle import (
    InstanceTooLarge,
    OracleResult,
    constraint_violations,
    enumerate_assignments,
)
from .session import (
    AssignmentDiff,
    EventRejected,
    LiveSession,
    Session,
    SessionError,
    SessionEvent,
)
from .generator import SweepSpec, random_instance, realistic_instance, run_sweep

__all__ = [
    "AssignmentDiff",
    "BnbNode",
    "DerivedCoefficients",
    "DeviceSpec",
    "ElementSpec",
    "EventRejected",
    "InfeasiblePinError",
    "InstanceTooLarge",
    "LiveSession",
    "Milp",
    "OracleResult",
    "Pin",
    "ProblemInstance",
    "Session",
    "SessionError",
    "SessionEvent",
    "Solution",
    "SolveOptions",
    "SweepSpec",
    "UserSpec",
    "build",
    "check_feasible",
    "compatibility",
    "constraint_violations",
    "enumerate_assignments",
    "load_scenario",
    "mean_importance",
    "preprocess",
    "random_instance",
    "realistic_instance",
    "run_sweep",
    "save_scenario",
    "solve",
    "solve_lp",
    "validate",
    "write_lp",
]
