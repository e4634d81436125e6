"""Seeded Monte Carlo experiments over the dispersion process."""

from .checks import (
    DriftReport,
    ScalingReport,
    drift_check,
    fit_scaling,
    gap_tail_check,
    stopping_time_trend,
)
from .experiment import ExperimentResult, run_experiment
from .output import to_jsonable
from .plan import ExperimentPlan, trial_seed
from .summary import CSV_COLUMNS, GRID_COLUMNS, NSummary, Summary, describe

__all__ = [
    "ExperimentPlan",
    "trial_seed",
    "Summary",
    "NSummary",
    "describe",
    "CSV_COLUMNS",
    "GRID_COLUMNS",
    "ExperimentResult",
    "run_experiment",
    "to_jsonable",
    "DriftReport",
    "ScalingReport",
    "drift_check",
    "fit_scaling",
    "gap_tail_check",
    "stopping_time_trend",
]
