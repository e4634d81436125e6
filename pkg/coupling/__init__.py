"""Ordered view of the line process and the dominating gap coupling.

- ordered: sorted positions, gaps, stacks and the active set I_t
- domination: delta_hat table, g_hat updates, domination checks
- diagnostics: rho fit, delta_hat case statistics, independence diagnostics
"""

from .diagnostics import (
    CaseStats,
    CorrelationTally,
    DeltaHatTally,
    RhoEstimate,
    delta_hat_stats,
    estimate_rho,
    lagged_correlation,
    stack_distance_pairs,
    zi_bound_report,
)
from .domination import (
    CouplingState,
    check_domination,
    delta_hat,
    delta_hat_all,
    detect_e_event,
    residue_class_sums,
    residue_count,
    update_coupling,
)
from .ordered import OrderedView, ordered_view

__all__ = [
    "OrderedView",
    "ordered_view",
    "CouplingState",
    "residue_count",
    "delta_hat",
    "delta_hat_all",
    "update_coupling",
    "check_domination",
    "detect_e_event",
    "residue_class_sums",
    "DeltaHatTally",
    "CaseStats",
    "delta_hat_stats",
    "RhoEstimate",
    "estimate_rho",
    "stack_distance_pairs",
    "CorrelationTally",
    "lagged_correlation",
    "zi_bound_report",
]
