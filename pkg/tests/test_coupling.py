"""Tests for the ordered view and the dominating gap coupling.

Usage:
    pytest tests/test_coupling.py -v
    pytest tests/test_coupling.py -v --runslow   # include n=200/500 acceptance runs
"""

import dataclasses
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coupling import (
    CouplingState,
    DeltaHatTally,
    check_domination,
    delta_hat,
    delta_hat_all,
    delta_hat_stats,
    detect_e_event,
    estimate_rho,
    lagged_correlation,
    ordered_view,
    residue_class_sums,
    residue_count,
    stack_distance_pairs,
    update_coupling,
    zi_bound_report,
)
from coupling.domination import (
    CASE_BOTH_STACKED,
    CASE_LEFT_STACKED,
    CASE_RIGHT_STACKED,
    delta_case,
)
from process import Configuration, ConsistencyError, NoEstimateError, Topology
from process.moves import MoveDraw
from process.trial import Instrumentation, TrialDiagnostics, run_instrumented_trial


def line(occupancy: dict) -> Configuration:
    return Configuration.from_sites(occupancy, Topology.LINE)


def draw_for(config: Configuration, rights: dict) -> MoveDraw:
    counts = {site: config.occupancy[site] for site in rights}
    return MoveDraw(0, "manual", Topology.LINE, counts, dict(rights))


def table_value(s_left: int, s_right: int, b_left: int | None, b_right: int | None) -> int:
    """delta_hat written out case by case."""
    if s_left >= 2 and s_right >= 2:
        if b_left == 0 and b_right == s_right:
            return 2
        if b_left > 0 and b_right < s_right:
            return -2
        return 0
    if s_left >= 2:
        return 1 if b_left == 0 else -1
    if s_right >= 2:
        return 1 if b_right == s_right else -1
    return 0


def coupled_outcomes(n: int, seeds) -> list:
    return [run_instrumented_trial(n, seed=s, instrument=Instrumentation.COUPLING) for s in seeds]


# =============================================================================
# Ordered view
# =============================================================================

class TestOrderedView:
    """ordered_view unfolding."""

    def test_point_mass(self):
        """{0: 3} -> X=(0,0,0), g=(0,0), s=(3,3,3), one stack, I empty."""
        view = ordered_view(line({0: 3}))
        assert view.X.tolist() == [0, 0, 0]
        assert view.g.tolist() == [0, 0]
        assert view.s.tolist() == [3, 3, 3]
        assert view.m == 1
        assert view.I.size == 0

    def test_two_stacks(self):
        """{-1: 2, 3: 1} -> g=(0,4), I={1}, P=(0,0,1)."""
        view = ordered_view(line({-1: 2, 3: 1}))
        assert view.X.tolist() == [-1, -1, 3]
        assert view.g.tolist() == [0, 4]
        assert view.s.tolist() == [2, 2, 1]
        assert view.I.tolist() == [1]
        assert view.P.tolist() == [0, 0, 1]
        assert view.m == 2

    def test_unit_gap_not_active(self):
        """A gap of 1 is not in I."""
        view = ordered_view(line({0: 1, 1: 1}))
        assert view.g.tolist() == [1]
        assert view.I.size == 0

    @given(st.dictionaries(st.integers(-40, 40), st.integers(1, 6), min_size=1, max_size=12))
    @settings(max_examples=100, deadline=None)
    def test_invariants(self, occupancy):
        """Sorted X, stack sizes sum to n, I members are top of stack."""
        view = ordered_view(line(occupancy))
        assert np.all(np.diff(view.X) >= 0)
        assert view.stack_counts.sum() == view.n
        assert np.all(np.diff(view.P) >= 0)
        assert view.m <= view.n
        for j in view.I.tolist():
            assert view.g[j] >= 2
            assert view.P[j + 1] == view.P[j] + 1


# =============================================================================
# delta_hat
# =============================================================================

class TestDeltaHat:
    """Table values of delta_hat."""

    def test_both_stacked_all_out(self):
        """s=(2,2), b_j=0, b_j+1=2 -> +2."""
        config = line({0: 2, 2: 2})
        view = ordered_view(config)
        assert delta_hat(view, draw_for(config, {0: 0, 2: 2}), 1) == 2

    def test_both_stacked_otherwise(self):
        """s=(2,2), b_j=0, b_j+1=1 -> 0."""
        config = line({0: 2, 2: 2})
        view = ordered_view(config)
        assert delta_hat(view, draw_for(config, {0: 0, 2: 1}), 1) == 0

    def test_left_stacked_moves_in(self):
        """s=(2,1), g=3, b_j=1 -> -1."""
        config = line({0: 2, 3: 1})
        view = ordered_view(config)
        assert delta_hat(view, draw_for(config, {0: 1}), 1) == -1

    def test_outside_active_set(self):
        """g=1 -> 0 whatever the draws."""
        config = line({0: 2, 1: 2})
        view = ordered_view(config)
        for b0, b1 in itertools.product(range(3), repeat=2):
            assert delta_hat(view, draw_for(config, {0: b0, 1: b1}), 1) == 0

    def test_missing_draw(self):
        """A stacked neighbour without a draw is a consistency error."""
        config = line({0: 2, 3: 1})
        view = ordered_view(config)
        with pytest.raises(ConsistencyError):
            delta_hat(view, draw_for(config, {}), 1)

    def test_table_totality(self):
        """Every (s_j, s_j+1) in {1,2,3}^2 and every draw gives the table value."""
        for s_left, s_right in itertools.product((1, 2, 3), repeat=2):
            config = line({0: s_left, 5: s_right})
            view = ordered_view(config)
            j = s_left - 1
            left_values = range(s_left + 1) if s_left >= 2 else [None]
            right_values = range(s_right + 1) if s_right >= 2 else [None]
            for b_left, b_right in itertools.product(left_values, right_values):
                rights = {}
                if b_left is not None:
                    rights[0] = b_left
                if b_right is not None:
                    rights[5] = b_right
                draw = draw_for(config, rights)
                value = delta_hat(view, draw, j)
                assert value == table_value(s_left, s_right, b_left, b_right)
                assert value == delta_hat_all(view, draw)[j]
                assert value in (-2, -1, 0, 1, 2)

    def test_cases(self):
        """Case labels follow which neighbour is stacked."""
        assert delta_case(2, 2) == CASE_BOTH_STACKED
        assert delta_case(3, 1) == CASE_LEFT_STACKED
        assert delta_case(1, 2) == CASE_RIGHT_STACKED


# =============================================================================
# Coupling updates
# =============================================================================

class TestUpdateCoupling:
    """g_hat updates and domination."""

    def test_barrier(self):
        """g_hat=3 with delta_hat=-2 stays at 3."""
        config = line({0: 2, 2: 2})
        view = ordered_view(config)
        state = CouplingState(g_hat=np.array([3, 3, 3]), L=residue_count(4))
        advanced = update_coupling(state, view, draw_for(config, {0: 1, 2: 0}))
        assert advanced.g_hat[1] == 3

    def test_additive_and_reset(self):
        """g_hat 5 -> 7 on +2 inside I; 10 -> 3 outside I."""
        config = line({0: 2, 2: 2})
        view = ordered_view(config)
        state = CouplingState(g_hat=np.array([10, 5, 3]), L=residue_count(4))
        advanced = update_coupling(state, view, draw_for(config, {0: 0, 2: 2}))
        assert advanced.g_hat.tolist() == [3, 7, 3]
        assert advanced.t == 1
        assert state.g_hat.tolist() == [10, 5, 3]

    def test_initial_domination(self):
        """At t=0 every gap is 0 <= 3."""
        view = ordered_view(line({0: 50}))
        assert check_domination(view, CouplingState.initial(50)) == 0

    def test_state_fields(self):
        """The state carries bounds and collected diagnostics only."""
        names = {f.name for f in dataclasses.fields(CouplingState)}
        assert names == {"g_hat", "L", "t", "e_event_count", "z_sums", "z_peak", "tail_histogram"}

    def test_forced_violation_detected(self):
        """A bound of 0 under a positive gap is counted."""
        view = ordered_view(line({0: 1, 3: 1}))
        state = CouplingState(g_hat=np.array([0]), L=1)
        assert check_domination(view, state) == 1

    def test_no_violations_in_runs(self):
        """Every step of coupled runs keeps g <= g_hat and |delta g| <= 2."""
        for outcome in coupled_outcomes(40, range(5)):
            assert outcome.record.domination_violations == 0
            assert outcome.record.lipschitz_violations == 0
            assert outcome.record.settled

    def test_tail_histogram_collected(self):
        """The pooled g_hat - 3 histogram counts every gap at every step."""
        outcome = coupled_outcomes(30, [3])[0]
        assert outcome.diagnostics.tail_histogram.sum() == outcome.record.T * 29


class TestEEvent:
    """Monolithic moves of large stacks."""

    def test_large_stack_all_left(self):
        """L=16, stack 10, b=0 -> event."""
        config = line({0: 10})
        assert detect_e_event(ordered_view(config), draw_for(config, {0: 0}), 16)

    def test_large_stack_split(self):
        """L=16, stack 10, b=3 -> no event."""
        config = line({0: 10})
        assert not detect_e_event(ordered_view(config), draw_for(config, {0: 3}), 16)

    def test_small_stack(self):
        """L=16, stack 4, b=4 -> too small."""
        config = line({0: 4})
        assert not detect_e_event(ordered_view(config), draw_for(config, {0: 4}), 16)


class TestResidueClasses:
    """Z_i sums over residue classes of gap labels."""

    def test_uniform(self):
        """100 gaps of 3 with L=10 -> every Z_i is 30."""
        state = CouplingState(g_hat=np.full(100, 3), L=10)
        assert residue_class_sums(state, 10).tolist() == [30] * 10

    @given(
        st.lists(st.integers(3, 40), min_size=1, max_size=200),
        st.integers(1, 30),
    )
    @settings(max_examples=100, deadline=None)
    def test_partition_identity(self, values, L):
        """sum_i Z_i = sum_j g_hat_j."""
        state = CouplingState(g_hat=np.array(values), L=L)
        assert residue_class_sums(state, L).sum() == sum(values)

    def test_residue_count(self):
        """L = ceil((ln n)^2), at least 1."""
        assert residue_count(1) == 1
        assert residue_count(1000) == math.ceil(math.log(1000) ** 2)

    def test_zi_bound(self):
        """The bound is 3 + 2/(1 - rho)."""
        report = zi_bound_report(3.5, 0.5)
        assert report["bound"] == 7
        assert report["holds"]


# =============================================================================
# Diagnostics
# =============================================================================

class TestEstimateRho:
    """Geometric tail fit."""

    def test_exact_geometric(self):
        """Geometric(1/2) counts give rho = 0.50 +- 0.02."""
        counts = np.array([round(1_000_000 * 0.5 ** (k + 1)) for k in range(30)])
        estimate = estimate_rho(counts)
        assert abs(estimate.rho - 0.5) <= 0.02
        assert estimate.r_squared >= 0.98

    def test_all_mass_at_zero(self):
        """A single point cannot be fitted."""
        with pytest.raises(NoEstimateError):
            estimate_rho(np.array([1000]))

    def test_empty(self):
        """No samples, no estimate."""
        with pytest.raises(NoEstimateError):
            estimate_rho(np.zeros(5, dtype=np.int64))


class TestDeltaHatStats:
    """Pooled delta_hat case statistics."""

    def test_runs_match_exact_laws(self):
        """|delta_hat| <= 2, means <= -1/2 and dyadic frequencies within 3 se."""
        diagnostics = TrialDiagnostics()
        for outcome in coupled_outcomes(60, range(4)):
            diagnostics = diagnostics.merge(outcome.diagnostics)
        report = delta_hat_stats(diagnostics.deltas)
        assert report
        for case, stats in report.items():
            assert stats.bounded
            if stats.count < 200:
                continue
            assert stats.mean_ok, (case, stats.mean, stats.stderr)
            assert stats.frequency_ok, (case, stats.positive_freq, stats.expected_positive)

    def test_left_stacked_pair_law(self):
        """s=(2,1) cells have exact mean -1/2 and positive rate 1/4."""
        tally = DeltaHatTally({(CASE_LEFT_STACKED, 2, 1): [400, -200, 400, 100, 1]})
        stats = delta_hat_stats(tally, min_samples=100)[CASE_LEFT_STACKED]
        assert stats.mean == -0.5
        assert stats.expected_positive == 0.25
        assert stats.frequency_ok
        assert stats.sufficient

    def test_merge_and_roundtrip(self):
        """Merged tallies add cell by cell; to_dict/from_dict preserves them."""
        a = DeltaHatTally({(1, 2, 2): [10, -10, 30, 1, 2]})
        b = DeltaHatTally({(1, 2, 2): [5, -4, 12, 0, 2], (2, 3, 1): [3, -1, 3, 1, 1]})
        merged = a.merge(b)
        assert merged.cells[(1, 2, 2)] == [15, -14, 42, 1, 2]
        assert DeltaHatTally.from_dict(merged.to_dict()).cells == merged.cells


class TestIndependenceDiagnostics:
    """Report-only diagnostics."""

    def test_stack_distance_pairs(self):
        """Evenly spaced singletons: close pairs depend on the residue classes."""
        view = ordered_view(line({0: 1, 2: 1, 4: 1, 6: 1}))
        assert stack_distance_pairs(view, 1) == 3
        assert stack_distance_pairs(view, 2) == 1

    def test_lagged_correlation_report(self):
        """Correlation of delta_hat at lag 3 is reported with its band."""
        diagnostics = TrialDiagnostics()
        for outcome in coupled_outcomes(60, range(2)):
            diagnostics = diagnostics.merge(outcome.diagnostics)
        report = lagged_correlation(diagnostics.correlation)
        assert report["lag"] == 3
        assert report["lag_unit"] == "I_t entries"
        assert report["pairs"] > 0
        if report["correlation"] is not None:
            assert -1 <= report["correlation"] <= 1


# =============================================================================
# Acceptance (slow)
# =============================================================================

@pytest.mark.slow
class TestCouplingAcceptance:
    """Full-size coupled runs."""

    def test_domination_n200(self):
        """n=200 over 10 seeds: no domination or Lipschitz violations and no E events."""
        for outcome in coupled_outcomes(200, range(10)):
            assert outcome.record.domination_violations == 0
            assert outcome.record.lipschitz_violations == 0
            assert outcome.record.e_events == 0

    def test_delta_hat_exactness(self):
        """>= 10^3 samples per case, all exact-law checks pass."""
        diagnostics = TrialDiagnostics()
        for outcome in coupled_outcomes(200, range(10)):
            diagnostics = diagnostics.merge(outcome.diagnostics)
        report = delta_hat_stats(diagnostics.deltas)
        for case in (CASE_BOTH_STACKED, CASE_LEFT_STACKED, CASE_RIGHT_STACKED):
            assert report[case].sufficient
            assert report[case].passed

    def test_geometric_tail_n500(self):
        """Pooled g_hat survival at n=500 fits rho <= 0.95 with R^2 >= 0.98."""
        diagnostics = TrialDiagnostics()
        for outcome in coupled_outcomes(500, range(3)):
            diagnostics = diagnostics.merge(outcome.diagnostics)
        estimate = estimate_rho(diagnostics.tail_histogram)
        assert estimate.rho <= 0.95
        assert estimate.r_squared >= 0.98
