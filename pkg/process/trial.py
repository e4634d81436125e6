"""Drive one dispersion trial from the point mass to its stopping time.

Instrumentation levels:
    none      - the process only (extremes, T, closest distance on the line)
    stats     - plus drift tallies of d_t for the closest-particle analysis
    coupling  - plus the ordered view and the dominating coupling, checked
                every step

Identical (n, topology, seed, max_steps) give a bit-identical TrialRecord.

Usage:
    record = run_trial(200, Topology.LINE, seed=7, instrument=Instrumentation.COUPLING)
    assert record.domination_violations == 0
"""

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from coupling.diagnostics import CorrelationTally, DeltaHatTally, stack_distance_pairs
from coupling.domination import (
    CouplingState,
    check_domination,
    delta_hat_all,
    update_coupling,
)
from coupling.ordered import ordered_view
from observability import tracer

from .errors import InvalidArgumentError
from .lattice import (
    Configuration,
    Topology,
    chebyshev_radius,
    closest_stack,
    init_point_mass,
    is_settled,
)
from .moves import apply_in_place, sample_moves
from .rng import StepStreams

# Gaps move by at most this much per step (order statistics are 1-Lipschitz)
MAX_GAP_CHANGE = 2


class Instrumentation(str, Enum):
    NONE = "none"
    STATS = "stats"
    COUPLING = "coupling"

    @property
    def level(self) -> int:
        return ("none", "stats", "coupling").index(self.value)

    def __ge__(self, other: "Instrumentation") -> bool:
        return self.level >= Instrumentation(other).level


def default_max_steps(n: int) -> int:
    """max(10^6, 50 n^2): well above the O(n^2 log n) stopping time."""
    return max(10 ** 6, 50 * n * n)


# =============================================================================
# Records
# =============================================================================

@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one trial. Line extremes are coordinates; grid extremes are
    Chebyshev radii and ``span``/``max_d`` are None."""
    seed: int
    n: int
    topology: str
    T: int
    min_pos: int
    max_pos: int
    span: int | None
    max_d: int | None
    max_gap: int | None
    e_events: int
    domination_violations: int
    lipschitz_violations: int
    conserved: bool
    capped: bool

    @property
    def settled(self) -> bool:
        return not self.capped

    @property
    def density(self) -> float | None:
        """(n - 1) / span for settled line trials."""
        if self.capped or not self.span:
            return None
        return (self.n - 1) / self.span

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class DriftTally:
    """Steps with d_t != 0, bucketed by the closest stack size Lambda_t."""
    stacked: dict[int, list[int]] = field(default_factory=dict)
    singleton_steps: int = 0
    singleton_changes: int = 0

    def record(self, d: int, lam: int, d_next: int):
        if d == 0:
            return
        if lam == 1:
            self.singleton_steps += 1
            self.singleton_changes += int(d_next != d)
            return
        bucket = self.stacked.setdefault(lam, [0, 0])
        bucket[0] += 1
        bucket[1] += int(d_next < d)

    def merge(self, other: "DriftTally") -> "DriftTally":
        stacked = {lam: list(bucket) for lam, bucket in self.stacked.items()}
        for lam, (steps, decreases) in other.stacked.items():
            bucket = stacked.setdefault(lam, [0, 0])
            bucket[0] += steps
            bucket[1] += decreases
        return DriftTally(
            stacked=stacked,
            singleton_steps=self.singleton_steps + other.singleton_steps,
            singleton_changes=self.singleton_changes + other.singleton_changes,
        )


@dataclass
class TrialDiagnostics:
    """Mergeable per-trial statistics that do not go into the JSONL record."""
    drift: DriftTally = field(default_factory=DriftTally)
    deltas: DeltaHatTally = field(default_factory=DeltaHatTally)
    correlation: CorrelationTally = field(default_factory=CorrelationTally)
    tail_histogram: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    z_peak: float = 0.0
    close_pairs: int = 0

    def merge(self, other: "TrialDiagnostics") -> "TrialDiagnostics":
        size = max(self.tail_histogram.size, other.tail_histogram.size)
        histogram = np.zeros(size, dtype=np.int64)
        histogram[: self.tail_histogram.size] += self.tail_histogram
        histogram[: other.tail_histogram.size] += other.tail_histogram
        return TrialDiagnostics(
            drift=self.drift.merge(other.drift),
            deltas=self.deltas.merge(other.deltas),
            correlation=self.correlation.merge(other.correlation),
            tail_histogram=histogram,
            z_peak=max(self.z_peak, other.z_peak),
            close_pairs=self.close_pairs + other.close_pairs,
        )


LINE_TRACE_COLUMNS = ("t", "span", "d", "lambda", "max_gap", "active")
GRID_TRACE_COLUMNS = ("t", "r_inf", "occupied", "active")


@dataclass
class TrialOutcome:
    record: TrialRecord
    diagnostics: TrialDiagnostics
    trace: list[tuple] | None = None
    final: Configuration | None = None


def _trace_row(config: Configuration, t: int, d: int | None, lam: int | None) -> tuple:
    if config.topology is Topology.LINE:
        sites = np.array(config.sites(), dtype=np.int64)
        max_gap = int(np.diff(sites).max()) if sites.size > 1 else 0
        return (t, int(sites[-1] - sites[0]), d, lam, max_gap, len(config._active))
    r_inf = max(chebyshev_radius(site) for site in config.occupancy)
    return (t, r_inf, len(config.occupancy), len(config._active))


# =============================================================================
# Trial loop
# =============================================================================

def run_instrumented_trial(
    n: int,
    topology: Topology = Topology.LINE,
    seed: int = 0,
    max_steps: int | None = None,
    instrument: Instrumentation = Instrumentation.NONE,
    trace: bool = False,
    keep_final: bool = False,
) -> TrialOutcome:
    """Run one trial and return its record plus diagnostics (and optionally
    the per-step trace and final configuration)."""
    topology = Topology(topology)
    instrument = Instrumentation(instrument)
    cap = default_max_steps(n) if max_steps is None else max_steps
    if cap < 1:
        raise InvalidArgumentError(f"max_steps must be >= 1, got {cap}")
    if instrument >= Instrumentation.STATS and topology is not Topology.LINE:
        raise InvalidArgumentError("stats and coupling instrumentation are defined on the line")

    config = init_point_mass(n, topology)
    streams = StepStreams(seed)
    diagnostics = TrialDiagnostics()
    on_line = topology is Topology.LINE
    coupled = instrument >= Instrumentation.COUPLING
    with_stats = instrument >= Instrumentation.STATS

    d, lam = closest_stack(config) if on_line else (None, None)
    max_d = d
    rows = [_trace_row(config, 0, d, lam)] if trace else None

    view = state = None
    max_gap = None
    domination = lipschitz = 0
    conserved = True
    if coupled:
        view = ordered_view(config)
        state = CouplingState.initial(n)
        max_gap = view.max_gap

    with tracer.start_as_current_span("run_trial") as span:
        span.set_attribute("n", n)
        span.set_attribute("seed", str(seed))
        span.set_attribute("topology", topology.value)
        span.set_attribute("instrument", instrument.value)

        t = 0
        while not is_settled(config) and t < cap:
            draw = sample_moves(config, streams.for_step(t))

            if coupled:
                deltas = delta_hat_all(view, draw)
                diagnostics.deltas.record(view, deltas)
                diagnostics.correlation.record(view, deltas)
                diagnostics.close_pairs += stack_distance_pairs(view, state.L)
                state = update_coupling(state, view, draw, deltas)

            apply_in_place(config, draw)
            t += 1

            if with_stats and config.total() != n:
                conserved = False

            if on_line:
                d_next, lam_next = closest_stack(config)
                if with_stats:
                    diagnostics.drift.record(d, lam, d_next)
                d, lam = d_next, lam_next
                max_d = max(max_d, d)

            if coupled:
                view_next = ordered_view(config)
                domination += check_domination(view_next, state)
                lipschitz += int(np.count_nonzero(np.abs(view_next.g - view.g) > MAX_GAP_CHANGE))
                max_gap = max(max_gap, view_next.max_gap)
                view = view_next

            if trace:
                rows.append(_trace_row(config, t, d, lam))

        conserved = conserved and config.total() == n

        if on_line:
            min_pos, max_pos = min(config.occupancy), max(config.occupancy)
            trial_span = max_pos - min_pos
        else:
            radii = [chebyshev_radius(site) for site in config.occupancy]
            min_pos, max_pos = min(radii), max(radii)
            trial_span = None

        if coupled:
            diagnostics.tail_histogram = state.tail_histogram
            diagnostics.z_peak = state.z_peak

        record = TrialRecord(
            seed=seed,
            n=n,
            topology=topology.value,
            T=t,
            min_pos=min_pos,
            max_pos=max_pos,
            span=trial_span,
            max_d=max_d,
            max_gap=max_gap,
            e_events=state.e_event_count if coupled else 0,
            domination_violations=domination,
            lipschitz_violations=lipschitz,
            conserved=conserved,
            capped=not is_settled(config),
        )
        span.set_attribute("T", t)
        span.set_attribute("capped", record.capped)
        span.set_attribute("violations", domination + lipschitz)
        if trial_span is not None:
            span.set_attribute("span", trial_span)

    return TrialOutcome(
        record=record,
        diagnostics=diagnostics,
        trace=rows,
        final=config if keep_final else None,
    )


def run_trial(
    n: int,
    topology: Topology = Topology.LINE,
    seed: int = 0,
    max_steps: int | None = None,
    instrument: Instrumentation = Instrumentation.NONE,
) -> TrialRecord:
    """Iterate steps until settled or ``max_steps``; return the TrialRecord."""
    return run_instrumented_trial(n, topology, seed, max_steps, instrument).record


def log_squared(n: int) -> float:
    """(ln n)^2, the gap scale of the tail bound."""
    return math.log(n) ** 2


__all__ = [
    "Instrumentation",
    "TrialRecord",
    "TrialDiagnostics",
    "TrialOutcome",
    "DriftTally",
    "LINE_TRACE_COLUMNS",
    "GRID_TRACE_COLUMNS",
    "default_max_steps",
    "run_instrumented_trial",
    "run_trial",
    "log_squared",
]
