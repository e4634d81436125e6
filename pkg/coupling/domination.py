"""Dominating gap process driven by the realized binomials.

For every gap j the coupling keeps an upper bound g_hat[j] >= g[j]. When j is
in I_t (gap >= 2) the bound moves by delta_hat, read off the same draw that
advances the configuration, and is floored at 3; otherwise it resets to 3.

delta_hat table (j in I_t; b = particles moving right at the stack's site):

    s_j >= 2, s_j+1 >= 2:  +2 if b_j = 0 and b_j+1 = s_j+1
                           -2 if b_j > 0 and b_j+1 < s_j+1
                            0 otherwise
    s_j >= 2, s_j+1 = 1:   +1 if b_j = 0 else -1
    s_j = 1,  s_j+1 >= 2:  +1 if b_j+1 = s_j+1 else -1
    both singletons:        0
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from process.errors import ConsistencyError, InvalidArgumentError
from process.moves import MoveDraw

from .ordered import OrderedView

BARRIER = 3

# Cases of the delta_hat table, keyed by which stacks hold >= 2 particles
CASE_SINGLETONS = 0
CASE_BOTH_STACKED = 1
CASE_LEFT_STACKED = 2
CASE_RIGHT_STACKED = 3


def residue_count(n: int) -> int:
    """L = ceil((ln n)^2), at least 1."""
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    return max(1, math.ceil(math.log(n) ** 2))


@dataclass
class CouplingState:
    """Bounds g_hat plus the diagnostics collected while advancing them."""
    g_hat: np.ndarray
    L: int
    t: int = 0
    e_event_count: int = 0
    z_sums: np.ndarray | None = None
    z_peak: float = 0.0
    tail_histogram: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))

    @classmethod
    def initial(cls, n: int) -> "CouplingState":
        """g_hat_{j,0} = 3 for every gap."""
        g_hat = np.full(max(n - 1, 0), BARRIER, dtype=np.int64)
        L = residue_count(n)
        state = cls(g_hat=g_hat, L=L)
        state.z_sums = residue_class_sums(state, L)
        return state


# =============================================================================
# delta_hat
# =============================================================================

def delta_case(s_left: int, s_right: int) -> int:
    if s_left >= 2 and s_right >= 2:
        return CASE_BOTH_STACKED
    if s_left >= 2:
        return CASE_LEFT_STACKED
    if s_right >= 2:
        return CASE_RIGHT_STACKED
    return CASE_SINGLETONS


def delta_hat(view: OrderedView, draw: MoveDraw, j: int) -> int:
    """Table value of delta_hat for gap j (0-based, 0 <= j <= n-2)."""
    if not 0 <= j < view.g.size:
        raise InvalidArgumentError(f"gap index {j} outside [0, {view.g.size})")
    if view.g[j] < 2:
        return 0

    s_left, s_right = int(view.s[j]), int(view.s[j + 1])
    b_left = draw.draws.get(int(view.X[j]))
    b_right = draw.draws.get(int(view.X[j + 1]))
    if (s_left >= 2 and b_left is None) or (s_right >= 2 and b_right is None):
        raise ConsistencyError(f"missing draw for a stacked neighbour of gap {j}")

    case = delta_case(s_left, s_right)
    if case == CASE_BOTH_STACKED:
        if b_left == 0 and b_right == s_right:
            return 2
        if b_left > 0 and b_right < s_right:
            return -2
        return 0
    if case == CASE_LEFT_STACKED:
        return 1 if b_left == 0 else -1
    if case == CASE_RIGHT_STACKED:
        return 1 if b_right == s_right else -1
    return 0


def stack_rights(view: OrderedView, draw: MoveDraw) -> np.ndarray:
    """b per stack rank; -1 where the stack has no draw."""
    rights = np.full(view.m, -1, dtype=np.int64)
    if draw.draws:
        sites = np.fromiter(draw.draws.keys(), dtype=np.int64, count=len(draw.draws))
        values = np.fromiter(draw.draws.values(), dtype=np.int64, count=len(draw.draws))
        ranks = view.stack_index(sites)
        if np.any(ranks >= view.m) or np.any(view.stack_sites[np.minimum(ranks, view.m - 1)] != sites):
            raise ConsistencyError("draw refers to sites outside the ordered view")
        rights[ranks] = values
    return rights


def delta_hat_all(view: OrderedView, draw: MoveDraw) -> np.ndarray:
    """delta_hat for every gap at once; zero off I_t."""
    deltas = np.zeros(view.g.size, dtype=np.int64)
    I = view.I
    if I.size == 0:
        return deltas

    rights = stack_rights(view, draw)
    s_left, s_right = view.s[I], view.s[I + 1]
    b_left, b_right = rights[view.P[I]], rights[view.P[I + 1]]
    if np.any((s_left >= 2) & (b_left < 0)) or np.any((s_right >= 2) & (b_right < 0)):
        raise ConsistencyError("missing draw for a stacked neighbour of an active gap")

    left_stacked, right_stacked = s_left >= 2, s_right >= 2
    all_left = b_left == 0
    all_right = b_right == s_right
    deltas[I] = np.select(
        [
            left_stacked & right_stacked & all_left & all_right,
            left_stacked & right_stacked & ~all_left & ~all_right,
            left_stacked & right_stacked,
            left_stacked,
            right_stacked,
        ],
        [2, -2, 0, np.where(all_left, 1, -1), np.where(all_right, 1, -1)],
        default=0,
    )
    return deltas


# =============================================================================
# Coupling updates
# =============================================================================

def update_coupling(
    state: CouplingState,
    view: OrderedView,
    draw: MoveDraw,
    deltas: np.ndarray | None = None,
) -> CouplingState:
    """Advance g_hat from time t to t+1 and refresh the diagnostics."""
    if deltas is None:
        deltas = delta_hat_all(view, draw)

    g_hat = np.full(state.g_hat.size, BARRIER, dtype=np.int64)
    I = view.I
    g_hat[I] = np.maximum(BARRIER, state.g_hat[I] + deltas[I])

    excess = np.bincount(g_hat - BARRIER) if g_hat.size else np.zeros(1, dtype=np.int64)
    histogram = _add_padded(state.tail_histogram, excess)

    advanced = replace(
        state,
        g_hat=g_hat,
        t=state.t + 1,
        e_event_count=state.e_event_count + int(detect_e_event(view, draw, state.L)),
        tail_histogram=histogram,
    )
    advanced.z_sums = residue_class_sums(advanced, state.L)
    advanced.z_peak = max(state.z_peak, _z_peak(advanced))
    return advanced


def check_domination(view_next: OrderedView, state: CouplingState) -> int:
    """Number of gaps with g_{j,t+1} > g_hat_{j,t+1}; must be 0."""
    return int(np.count_nonzero(view_next.g > state.g_hat))


def detect_e_event(view: OrderedView, draw: MoveDraw, L: int) -> bool:
    """True iff some stack of size >= L/2 moves monolithically."""
    large = np.flatnonzero(2 * view.stack_counts >= L)
    for rank in large.tolist():
        site, size = int(view.stack_sites[rank]), int(view.stack_counts[rank])
        b = draw.draws.get(site)
        if b is not None and (b == 0 or b == size):
            return True
    return False


def residue_class_sums(state: CouplingState, L: int) -> np.ndarray:
    """Z_i = sum of g_hat_j over j = i (mod L), with 1-based gap labels j."""
    labels = np.arange(1, state.g_hat.size + 1) % L
    return np.bincount(labels, weights=state.g_hat, minlength=L)


def class_sizes(gaps: int, L: int) -> np.ndarray:
    """|A_i| for gap labels 1..gaps."""
    return np.bincount(np.arange(1, gaps + 1) % L, minlength=L)


def _z_peak(state: CouplingState) -> float:
    sizes = class_sizes(state.g_hat.size, state.L)
    occupied = sizes > 0
    if not occupied.any():
        return 0.0
    return float(np.max(state.z_sums[occupied] / sizes[occupied]))


def _add_padded(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    size = max(a.size, b.size)
    out = np.zeros(size, dtype=np.int64)
    out[: a.size] += a
    out[: b.size] += b
    return out


__all__ = [
    "BARRIER",
    "CASE_SINGLETONS",
    "CASE_BOTH_STACKED",
    "CASE_LEFT_STACKED",
    "CASE_RIGHT_STACKED",
    "CouplingState",
    "residue_count",
    "delta_case",
    "delta_hat",
    "delta_hat_all",
    "stack_rights",
    "update_coupling",
    "check_domination",
    "detect_e_event",
    "residue_class_sums",
    "class_sizes",
]
