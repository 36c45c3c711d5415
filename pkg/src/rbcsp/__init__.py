"""rbcsp: a laboratory for model RB random constraint satisfaction.

Generate seeded instances, evaluate the exact finite-n thresholds, moments and
scaling-window endpoints, decide and count with a complete backtracking
solver, and probe the phase transition empirically with Monte Carlo sweeps.
"""

from .core import (
    Assignment,
    Constraint,
    DerivedSizes,
    Instance,
    RBParams,
    decode_instance,
    derive,
    encode_instance,
    satisfies,
)
from .errors import (
    BracketError,
    CapacityError,
    ConfigError,
    DegenerateError,
    FormatError,
    InvariantError,
    RangeError,
    RBError,
)
from .experiment import (
    EmpiricalWindow,
    GridPointResult,
    ScalingFit,
    SweepConfig,
    empirical_window,
    isotonic_decreasing,
    load_results,
    parse_config,
    scaling_fit,
    sweep,
    wilson_interval,
    write_results,
)
from .gen import SeedPolicy, generate, generate_batch, write_batch
from .solve import Budget, CountOutcome, SolveOutcome, brute_force, count, solve
from .theory import (
    MomentReport,
    OverlapCurve,
    ThresholdReport,
    WindowReport,
    log_expected_solutions,
    log_second_moment,
    markov_upper_p,
    markov_upper_r,
    overlap_curve,
    pair_term,
    second_moment_lower_p,
    second_moment_lower_r,
    thresholds,
    window,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BracketError",
    "Budget",
    "CapacityError",
    "ConfigError",
    "Constraint",
    "CountOutcome",
    "DegenerateError",
    "DerivedSizes",
    "EmpiricalWindow",
    "FormatError",
    "GridPointResult",
    "Instance",
    "InvariantError",
    "MomentReport",
    "OverlapCurve",
    "RangeError",
    "RBError",
    "RBParams",
    "ScalingFit",
    "SeedPolicy",
    "SolveOutcome",
    "SweepConfig",
    "ThresholdReport",
    "WindowReport",
    "brute_force",
    "count",
    "decode_instance",
    "derive",
    "empirical_window",
    "encode_instance",
    "generate",
    "generate_batch",
    "isotonic_decreasing",
    "load_results",
    "log_expected_solutions",
    "log_second_moment",
    "markov_upper_p",
    "markov_upper_r",
    "overlap_curve",
    "pair_term",
    "parse_config",
    "satisfies",
    "scaling_fit",
    "second_moment_lower_p",
    "second_moment_lower_r",
    "solve",
    "sweep",
    "thresholds",
    "wilson_interval",
    "window",
    "write_batch",
    "write_results",
]
