"""Tests for experiment plans, aggregation, checks and result files.

Usage:
    pytest tests/test_harness.py -v
"""

import csv
import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from harness import (
    CSV_COLUMNS,
    ExperimentPlan,
    Summary,
    drift_check,
    fit_scaling,
    gap_tail_check,
    run_experiment,
    stopping_time_trend,
    trial_seed,
)
from process import InvalidArgumentError, NoEstimateError, Topology
from process.trial import Instrumentation, TrialRecord, run_instrumented_trial


def record(n: int, max_gap: int | None, seed: int = 0) -> TrialRecord:
    return TrialRecord(
        seed=seed, n=n, topology="line", T=1, min_pos=0, max_pos=n, span=n, max_d=0,
        max_gap=max_gap, e_events=0, domination_violations=0, lipschitz_violations=0,
        conserved=True, capped=False,
    )


def data_lines(path) -> list[str]:
    return [line for line in path.read_text().splitlines() if not line.startswith("#")]


# =============================================================================
# Plans
# =============================================================================

class TestExperimentPlan:
    """Validation and seed derivation."""

    def test_seeds_distinct(self):
        """Every (n, index) gets its own seed."""
        plan = ExperimentPlan(n_values=[10, 20, 40], trials_per_n=50, base_seed=7)
        seeds = [seed for _, _, seed in plan.trials()]
        assert len(set(seeds)) == 150

    def test_seed_formula(self):
        """seed = base XOR h(n, index)."""
        assert trial_seed(5, 10, 3) == trial_seed(0, 10, 3) ^ 5

    def test_duplicate_n_rejected(self):
        """n values must be distinct."""
        with pytest.raises(ValidationError):
            ExperimentPlan(n_values=[10, 10])

    def test_grid_instrumentation_rejected(self):
        """Coupling instrumentation needs the line."""
        with pytest.raises(ValidationError):
            ExperimentPlan(n_values=[10], topology=Topology.GRID2D, instrument=Instrumentation.COUPLING)

    def test_non_positive_trials_rejected(self):
        """trials_per_n must be positive."""
        with pytest.raises(ValidationError):
            ExperimentPlan(n_values=[10], trials_per_n=0)

    def test_plan_id_ignores_output_location(self):
        """The plan id covers what affects results only."""
        a = ExperimentPlan(n_values=[10], base_seed=1, out_dir="a")
        b = ExperimentPlan(n_values=[10], base_seed=1, out_dir="b")
        c = ExperimentPlan(n_values=[10], base_seed=2)
        assert a.plan_id == b.plan_id
        assert a.plan_id != c.plan_id


# =============================================================================
# Running and aggregation
# =============================================================================

class TestRunExperiment:
    """run_experiment and Summary."""

    def test_single_particle(self):
        """n=1: every span is 0 and T is 0."""
        result = run_experiment(ExperimentPlan(n_values=[1], trials_per_n=5), jobs=1, progress=False)
        part = result.summary.by_n[1]
        assert part.spans == [0] * 5
        assert part.stopping_times == [0] * 5

    def test_two_particle_mean_stopping_time(self):
        """n=2: mean T = 2 within 4 standard errors."""
        plan = ExperimentPlan(n_values=[2], trials_per_n=2_000, base_seed=11)
        result = run_experiment(plan, jobs=1, progress=False)
        Ts = result.summary.by_n[2].stopping_times
        assert abs(np.mean(Ts) - 2) <= 4 * math.sqrt(2 / len(Ts))

    def test_outcomes_sorted(self):
        """Outcomes come back in (n, index) order."""
        plan = ExperimentPlan(n_values=[8, 4], trials_per_n=3, base_seed=2)
        result = run_experiment(plan, jobs=1, progress=False)
        expected = [seed for _, _, seed in sorted(plan.trials())]
        assert [r.seed for r in result.records] == expected

    def test_parallel_matches_serial(self):
        """Job count does not change the records."""
        plan = ExperimentPlan(n_values=[6, 12], trials_per_n=3, base_seed=9)
        serial = run_experiment(plan, jobs=1, progress=False)
        parallel = run_experiment(plan, jobs=2, progress=False)
        assert serial.records == parallel.records

    def test_capped_trials_excluded(self):
        """Capped trials are counted but kept out of the statistics."""
        plan = ExperimentPlan(n_values=[20], trials_per_n=3, max_steps=2)
        part = run_experiment(plan, jobs=1, progress=False).summary.by_n[20]
        assert part.capped == 3
        assert part.spans == []
        assert part.to_dict()["span"] == {"count": 0}

    def test_capped_coupled_trials_excluded(self):
        """Capped coupled trials add nothing to max_gap or the g_hat tail."""
        plan = ExperimentPlan(n_values=[20], trials_per_n=2, max_steps=2, instrument=Instrumentation.COUPLING)
        part = run_experiment(plan, jobs=1, progress=False).summary.by_n[20]
        assert part.capped == 2
        assert part.max_gaps == []
        assert int(part.diagnostics.tail_histogram.sum()) == 0
        assert part.rho_hat() is None

    def test_merge_associativity(self):
        """Summary(A + B) matches merge(Summary(A), Summary(B))."""
        outcomes = [
            run_instrumented_trial(n, seed=s, instrument=Instrumentation.STATS)
            for n in (5, 9) for s in range(4)
        ]
        a, b = outcomes[::2], outcomes[1::2]
        whole = Summary.from_outcomes(outcomes)
        merged = Summary.from_outcomes(a).merge(Summary.from_outcomes(b))
        assert whole.to_dict() == merged.to_dict()

    def test_settled_density(self):
        """Settled line trials have span >= n - 1, so density <= 1."""
        result = run_experiment(ExperimentPlan(n_values=[25], trials_per_n=4), jobs=1, progress=False)
        part = result.summary.by_n[25]
        assert min(part.spans) >= 24
        assert max(part.densities) <= 1


class TestResultFiles:
    """Files written by run_experiment."""

    def test_files_and_headers(self, tmp_path):
        """JSONL, CSV and TSV files start with the config and timestamp lines."""
        plan = ExperimentPlan(n_values=[5, 10], trials_per_n=2, base_seed=3)
        result = run_experiment(plan, out_dir=tmp_path, jobs=1, progress=False)
        names = {p.name for p in result.files}
        assert {"records.jsonl", "summary.csv", "summary.json", "scaling.tsv"} <= names
        for path in result.files:
            lines = path.read_text().splitlines()
            assert json.loads(lines[0][2:]) == plan.resolved()
            assert lines[1].startswith("# created_at ")

    def test_records_jsonl(self, tmp_path):
        """One record per trial with the plan id."""
        plan = ExperimentPlan(n_values=[6], trials_per_n=3, base_seed=4)
        run_experiment(plan, out_dir=tmp_path, jobs=1, progress=False)
        rows = [json.loads(line) for line in data_lines(tmp_path / "records.jsonl")]
        assert len(rows) == 3
        assert all(row["plan_id"] == plan.plan_id for row in rows)
        assert set(rows[0]) == set(TrialRecord.__dataclass_fields__) | {"plan_id"}

    def test_csv_header(self, tmp_path):
        """The summary CSV header is fixed."""
        plan = ExperimentPlan(n_values=[6], trials_per_n=2)
        run_experiment(plan, out_dir=tmp_path, jobs=1, progress=False)
        rows = list(csv.reader(data_lines(tmp_path / "summary.csv")))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert rows[0][:3] == ["n", "trials", "mean_span"]
        assert rows[1][0] == "6"

    def test_reruns_identical(self, tmp_path):
        """Same plan, same bytes apart from the timestamp line."""
        plan = ExperimentPlan(n_values=[7], trials_per_n=3, base_seed=5)
        run_experiment(plan, out_dir=tmp_path / "a", jobs=1, progress=False)
        run_experiment(plan, out_dir=tmp_path / "b", jobs=1, progress=False)
        for name in ("records.jsonl", "summary.csv"):
            a = (tmp_path / "a" / name).read_text().splitlines()
            b = (tmp_path / "b" / name).read_text().splitlines()
            assert a[0] == b[0]
            assert a[2:] == b[2:]

    def test_manifest_on_io_failure(self, tmp_path):
        """An unwritable output leaves manifest.json and re-raises."""
        (tmp_path / "records.jsonl").mkdir()
        plan = ExperimentPlan(n_values=[4], trials_per_n=1)
        with pytest.raises(OSError):
            run_experiment(plan, out_dir=tmp_path, jobs=1, progress=False)
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["complete"] is False
        assert manifest["files"] == []

    def test_output_dir_is_a_file(self, tmp_path):
        """When the directory cannot be created, its own error is raised."""
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        plan = ExperimentPlan(n_values=[4], trials_per_n=1)
        with pytest.raises(FileExistsError):
            run_experiment(plan, out_dir=blocker, jobs=1, progress=False)
        assert blocker.read_text() == ""

    def test_coupling_survival_file(self, tmp_path):
        """Coupled plans also write the g_hat survival curves."""
        plan = ExperimentPlan(n_values=[20], trials_per_n=2, instrument=Instrumentation.COUPLING)
        result = run_experiment(plan, out_dir=tmp_path, jobs=1, progress=False)
        assert (tmp_path / "survival.tsv") in result.files
        assert "# n=20" in (tmp_path / "survival.tsv").read_text()


# =============================================================================
# Checks
# =============================================================================

class TestFitScaling:
    """Linear against n log n growth."""

    N_VALUES = [125, 250, 500, 1000]

    def test_planted_linear(self):
        """spans = 1.1 n: flatness 1, alpha 1."""
        report = fit_scaling({n: 1.1 * n for n in self.N_VALUES})
        assert report.flatness == pytest.approx(1.0)
        assert report.alpha == pytest.approx(1.0)
        assert report.log_ratio_decreasing
        assert report.looks_linear

    def test_planted_log_law(self):
        """spans = n ln n: flagged as non-linear."""
        report = fit_scaling({n: n * math.log(n) for n in self.N_VALUES})
        assert report.flatness == pytest.approx(math.log(1000) / math.log(125))
        assert report.flatness > 1.15
        assert not report.log_ratio_decreasing
        assert not report.looks_linear

    def test_too_few_values(self):
        """Two n values are not enough."""
        with pytest.raises(InvalidArgumentError):
            fit_scaling({100: 110.0, 1000: 1100.0})

    def test_too_narrow(self):
        """n values must span a factor of 8."""
        with pytest.raises(InvalidArgumentError):
            fit_scaling({100: 110.0, 200: 220.0, 400: 440.0})

    def test_stopping_time_trend(self):
        """T / (n^2 ln n) per n, skipping n = 1."""
        trend = stopping_time_trend({1: 0.0, 10: 100 * math.log(10)})
        assert trend == {10: pytest.approx(1.0)}


class TestDriftCheck:
    """Closest-stack drift."""

    def test_stats_runs(self):
        """Stacked steps shrink d_t at rate >= 3/4; singleton steps never change it."""
        outcomes = [
            run_instrumented_trial(40, seed=s, instrument=Instrumentation.STATS) for s in range(6)
        ]
        report = drift_check(outcomes)
        assert report.steps > 0
        assert report.singleton_changes == 0
        assert report.expected >= 0.75
        assert report.frequency_ok
        assert report.passed
        assert not report.max_d_exceeded

    def test_two_stack_rate(self):
        """Stacks of 2 next to the origin decrease d_t with probability 3/4."""
        outcomes = [
            run_instrumented_trial(30, seed=s, instrument=Instrumentation.STATS) for s in range(10)
        ]
        bucket = drift_check(outcomes).by_stack_size.get(2)
        assert bucket is not None
        assert bucket["expected"] == 0.75
        se = math.sqrt(0.75 * 0.25 / bucket["steps"])
        assert bucket["frequency"] >= 0.75 - 3 * se

    def test_no_data(self):
        """Uninstrumented trials have no drift samples."""
        outcomes = [run_instrumented_trial(10, seed=1)]
        with pytest.raises(NoEstimateError):
            drift_check(outcomes)


class TestGapTailCheck:
    """Largest gap against (ln n)^2."""

    def test_planted_gap_flagged(self):
        """A gap of 50 at n=100 is above (ln 100)^2 ~ 21.2."""
        report = gap_tail_check([record(100, 50)])
        assert not report["passed"]
        assert report["flagged"][0]["max_gap"] == 50

    def test_small_n_not_flagged(self):
        """Trials below min_n are reported only."""
        report = gap_tail_check([record(10, 50)])
        assert report["passed"]
        assert len(report["trials"]) == 1

    def test_two_particles(self):
        """n=2 never opens a gap wider than 2."""
        plan = ExperimentPlan(n_values=[2], trials_per_n=50, instrument=Instrumentation.COUPLING)
        records = run_experiment(plan, jobs=1, progress=False).records
        assert all(r.max_gap <= 2 for r in records)
        assert gap_tail_check(records)["passed"]


# =============================================================================
# Acceptance (slow)
# =============================================================================

@pytest.mark.slow
class TestHarnessAcceptance:
    """Full-size Monte Carlo runs."""

    def test_two_particles_1e5(self):
        """10^5 trials at n=2: mean T = 2.0 +- 0.02."""
        plan = ExperimentPlan(n_values=[2], trials_per_n=100_000, base_seed=1)
        Ts = run_experiment(plan, progress=False).summary.by_n[2].stopping_times
        assert abs(np.mean(Ts) - 2) <= 0.02

    def test_n1000(self):
        """20 trials at n=1000: span/n in [1.0, 1.2], density in [0.82, 1.0]."""
        plan = ExperimentPlan(n_values=[1000], trials_per_n=20, base_seed=42)
        part = run_experiment(plan, progress=False).summary.by_n[1000]
        assert part.capped == 0
        assert 1.0 <= part.mean_span_ratio() <= 1.2
        assert 0.82 <= np.mean(part.densities) <= 1.0

    def test_linear_scaling(self):
        """n in {125..1000}, 20 trials each: span grows linearly."""
        plan = ExperimentPlan(n_values=[125, 250, 500, 1000], trials_per_n=20, base_seed=2024)
        summary = run_experiment(plan, progress=False).summary
        assert summary.capped == 0
        report = fit_scaling(summary.mean_spans())
        assert report.flatness <= 1.15
        assert report.log_ratio_decreasing
        assert 0.9 <= report.alpha <= 1.1

    @pytest.mark.parametrize("n", [100, 1000])
    def test_drift(self, n):
        """Stats runs: drift rate >= 3/4 and max_d <= 10 ln n in every trial."""
        plan = ExperimentPlan(n_values=[n], trials_per_n=4, base_seed=8, instrument=Instrumentation.STATS)
        report = drift_check(run_experiment(plan, progress=False).outcomes)
        assert report.passed
        assert len(report.max_d) == 4
        assert all(d <= 10 * math.log(n) for _, d in report.max_d)
        assert report.max_d_exceeded == []

    @pytest.mark.parametrize("n, trials", [(100, 5), (500, 3), (1000, 1)])
    def test_gap_bound(self, n, trials):
        """Coupled runs: the largest ordered gap stays below (ln n)^2."""
        plan = ExperimentPlan(n_values=[n], trials_per_n=trials, base_seed=6, instrument=Instrumentation.COUPLING)
        records = run_experiment(plan, progress=False).records
        assert all(not r.capped for r in records)
        assert all(r.max_gap < math.log(n) ** 2 for r in records)
        assert gap_tail_check(records)["passed"]
