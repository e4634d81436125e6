"""Synchronous dispersion process on the line and the grid.

Every particle on a site holding two or more particles jumps to a uniformly
random neighbour; the process stops once every site holds at most one.

Usage:
    from process import Topology, run_trial

    record = run_trial(1000, Topology.LINE, seed=42)
    print(record.T, record.span)
"""

from .errors import (
    ConsistencyError,
    DispersionError,
    InfeasibleParametersError,
    InvalidArgumentError,
    NoEstimateError,
    SupportTooLargeError,
)
from .lattice import (
    Configuration,
    Site,
    Topology,
    closest_distance,
    closest_stack,
    init_point_mass,
    is_settled,
    span,
)
from .moves import MoveDraw, apply_moves, sample_moves, step
from .rng import StepStream, StepStreams, binomial_half

# The trial runner depends on the coupling package, which itself imports
# process submodules, so it is loaded on first access.
_TRIAL_EXPORTS = {
    "Instrumentation",
    "TrialDiagnostics",
    "TrialOutcome",
    "TrialRecord",
    "default_max_steps",
    "run_instrumented_trial",
    "run_trial",
}


def __getattr__(name):
    if name in _TRIAL_EXPORTS:
        from . import trial
        return getattr(trial, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "DispersionError",
    "InvalidArgumentError",
    "ConsistencyError",
    "InfeasibleParametersError",
    "SupportTooLargeError",
    "NoEstimateError",
    "Configuration",
    "Site",
    "Topology",
    "init_point_mass",
    "is_settled",
    "span",
    "closest_distance",
    "closest_stack",
    "MoveDraw",
    "sample_moves",
    "apply_moves",
    "step",
    "StepStream",
    "StepStreams",
    "binomial_half",
    "Instrumentation",
    "TrialRecord",
    "TrialDiagnostics",
    "TrialOutcome",
    "default_max_steps",
    "run_instrumented_trial",
    "run_trial",
]
