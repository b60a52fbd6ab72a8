"""Ground states of -u'' - (n-1)/r u' = -omega*u + u**p - u**q.

Exact power-sum algebra for the reaction term, closed-form existence
and uniqueness thresholds, machine-checked condition reports, and a
shooting solver for the positive radial profile.
"""

from .power_algebra import (
    DomainError,
    ExponentMinusOne,
    IndeterminateSign,
    PowerSum,
    PowerTerm,
    SignVerdict,
    Verdict,
    add,
    analyze_sign,
    antiderivative,
    differentiate,
    evaluate,
    make_power_sum,
    multiply,
    scale,
    tilde,
)
from .nonlinearity import (
    F_of,
    Ftilde_of,
    InvalidParams,
    Params,
    Thresholds,
    f_of,
    fprime_of,
    ftilde_of,
    make_params,
    positive_zeros_F,
    positive_zeros_f,
    thresholds,
)
from .shooting import (
    BracketNotFound,
    Controls,
    GroundState,
    InsufficientTail,
    NoExistence,
    NonFiniteState,
    OrbitClass,
    RadialState,
    StepSizeUnderflow,
    TerminalReason,
    Trajectory,
    TrajectoryStats,
    classify_orbit,
    count_ground_states,
    decay_rate,
    energy,
    find_ground_state,
    integrate_radial,
    ode_residual,
    profile_csv,
)
from .conditions import (
    ConditionId,
    ConditionReport,
    CorollaryCheck,
    EquivalenceViolation,
    IndeterminateNearThreshold,
    Method,
    PhaseRow,
    PhaseTable,
    TheoremCheck,
    check_existence,
    check_f_positive,
    check_Ftilde,
    check_uniqueness,
    sample_lemma_instances,
    sweep,
    verify_corollary,
    verify_theorem,
)

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "ExponentMinusOne",
    "IndeterminateSign",
    "PowerSum",
    "PowerTerm",
    "SignVerdict",
    "Verdict",
    "add",
    "analyze_sign",
    "antiderivative",
    "differentiate",
    "evaluate",
    "make_power_sum",
    "multiply",
    "scale",
    "tilde",
    "F_of",
    "Ftilde_of",
    "InvalidParams",
    "Params",
    "Thresholds",
    "f_of",
    "fprime_of",
    "ftilde_of",
    "make_params",
    "positive_zeros_F",
    "positive_zeros_f",
    "thresholds",
    "BracketNotFound",
    "Controls",
    "GroundState",
    "InsufficientTail",
    "NoExistence",
    "NonFiniteState",
    "OrbitClass",
    "RadialState",
    "StepSizeUnderflow",
    "TerminalReason",
    "Trajectory",
    "TrajectoryStats",
    "classify_orbit",
    "count_ground_states",
    "decay_rate",
    "energy",
    "find_ground_state",
    "integrate_radial",
    "ode_residual",
    "profile_csv",
    "ConditionId",
    "ConditionReport",
    "CorollaryCheck",
    "EquivalenceViolation",
    "IndeterminateNearThreshold",
    "Method",
    "PhaseRow",
    "PhaseTable",
    "TheoremCheck",
    "check_existence",
    "check_f_positive",
    "check_Ftilde",
    "check_uniqueness",
    "sample_lemma_instances",
    "sweep",
    "verify_corollary",
    "verify_theorem",
    "__version__",
]
