"""Aggregation of trial outcomes.

A Summary keeps the raw per-trial values it needs (sorted, so the order in
which trials finish never matters) and merged diagnostics. Statistics are
computed on demand, which makes ``merge`` exact: summarising A + B gives the
same ``to_dict()`` as merging the summaries of A and B.

Statistics cover settled trials only; capped trials are counted separately.
"""

import math
from bisect import insort
from dataclasses import dataclass, field

import numpy as np

from coupling.diagnostics import delta_hat_stats, estimate_rho, lagged_correlation, zi_bound_report
from process.errors import NoEstimateError
from process.trial import TrialDiagnostics, TrialOutcome
from shape2d.metrics import ShapeMetrics

CSV_COLUMNS = (
    "n", "trials", "mean_span", "sd_span", "q05_span", "q50_span", "q95_span",
    "mean_T", "sd_T", "mean_max_d", "mean_density", "rho_hat", "e_events", "violations", "capped",
)
GRID_COLUMNS = ("mean_r_max", "mean_r_inf", "mean_disk_density", "mean_anisotropy")


def describe(values: list[float]) -> dict:
    """mean, sd, min, max, 5/50/95% quantiles and a 95% half-width."""
    if not values:
        return {"count": 0}
    data = np.asarray(values, dtype=np.float64)
    sd = float(data.std(ddof=1)) if data.size > 1 else 0.0
    q05, q50, q95 = np.quantile(data, [0.05, 0.5, 0.95])
    return {
        "count": int(data.size),
        "mean": float(data.mean()),
        "sd": sd,
        "min": float(data.min()),
        "max": float(data.max()),
        "q05": float(q05),
        "q50": float(q50),
        "q95": float(q95),
        "ci95": 1.96 * sd / math.sqrt(data.size),
    }


@dataclass
class NSummary:
    """Everything collected for one value of n."""
    n: int
    trials: int = 0
    capped: int = 0
    spans: list[int] = field(default_factory=list)
    stopping_times: list[int] = field(default_factory=list)
    max_ds: list[int] = field(default_factory=list)
    max_gaps: list[int] = field(default_factory=list)
    densities: list[float] = field(default_factory=list)
    shapes: list[tuple[float, int, float, float]] = field(default_factory=list)
    e_events: int = 0
    violations: int = 0
    non_conserved: int = 0
    diagnostics: TrialDiagnostics = field(default_factory=TrialDiagnostics)

    def add(self, outcome: TrialOutcome, shape: ShapeMetrics | None = None):
        record = outcome.record
        self.trials += 1
        self.e_events += record.e_events
        self.violations += record.domination_violations + record.lipschitz_violations
        self.non_conserved += int(not record.conserved)
        # Invariant counters cover every trial; statistics cover settled ones only
        if record.capped:
            self.capped += 1
            return
        self.diagnostics = self.diagnostics.merge(outcome.diagnostics)
        if record.max_gap is not None:
            insort(self.max_gaps, record.max_gap)
        insort(self.stopping_times, record.T)
        if record.span is not None:
            insort(self.spans, record.span)
        if record.max_d is not None:
            insort(self.max_ds, record.max_d)
        if record.density is not None:
            insort(self.densities, record.density)
        if shape is not None:
            insort(self.shapes, (shape.r_max, shape.r_inf, shape.disk_density, shape.anisotropy))

    def merge(self, other: "NSummary") -> "NSummary":
        return NSummary(
            n=self.n,
            trials=self.trials + other.trials,
            capped=self.capped + other.capped,
            spans=sorted(self.spans + other.spans),
            stopping_times=sorted(self.stopping_times + other.stopping_times),
            max_ds=sorted(self.max_ds + other.max_ds),
            max_gaps=sorted(self.max_gaps + other.max_gaps),
            densities=sorted(self.densities + other.densities),
            shapes=sorted(self.shapes + other.shapes),
            e_events=self.e_events + other.e_events,
            violations=self.violations + other.violations,
            non_conserved=self.non_conserved + other.non_conserved,
            diagnostics=self.diagnostics.merge(other.diagnostics),
        )

    def rho_hat(self):
        try:
            return estimate_rho(self.diagnostics.tail_histogram)
        except NoEstimateError:
            return None

    def mean_span_ratio(self) -> float | None:
        return float(np.mean(self.spans)) / self.n if self.spans else None

    def to_dict(self) -> dict:
        rho = self.rho_hat()
        data = {
            "n": self.n,
            "trials": self.trials,
            "settled": self.trials - self.capped,
            "capped": self.capped,
            "span": describe(self.spans),
            "span_over_n": self.mean_span_ratio(),
            "T": describe(self.stopping_times),
            "max_d": describe(self.max_ds),
            "max_gap": describe(self.max_gaps),
            "density": describe(self.densities),
            "e_events": self.e_events,
            "violations": self.violations,
            "non_conserved": self.non_conserved,
            "rho_hat": None if rho is None else {"rho": rho.rho, "r_squared": rho.r_squared, "points": rho.points},
            "delta_hat": {
                str(case): {
                    "count": s.count,
                    "mean": s.mean,
                    "stderr": s.stderr,
                    "positive_freq": s.positive_freq,
                    "expected_positive": s.expected_positive,
                    "max_abs": s.max_abs,
                    "passed": s.passed,
                }
                for case, s in delta_hat_stats(self.diagnostics.deltas).items()
            },
            "lagged_correlation": lagged_correlation(self.diagnostics.correlation),
            "z_bound": None if rho is None else zi_bound_report(self.diagnostics.z_peak, rho.rho),
            "close_pairs": self.diagnostics.close_pairs,
        }
        if self.shapes:
            columns = np.array(self.shapes, dtype=np.float64)
            data["shape"] = dict(zip(GRID_COLUMNS, (float(v) for v in columns.mean(axis=0))))
        return data

    def csv_row(self, grid: bool = False) -> list:
        span = describe(self.spans)
        T = describe(self.stopping_times)
        rho = self.rho_hat()
        row = [
            self.n,
            self.trials,
            span.get("mean", ""),
            span.get("sd", ""),
            span.get("q05", ""),
            span.get("q50", ""),
            span.get("q95", ""),
            T.get("mean", ""),
            T.get("sd", ""),
            describe(self.max_ds).get("mean", ""),
            describe(self.densities).get("mean", ""),
            "" if rho is None else rho.rho,
            self.e_events,
            self.violations,
            self.capped,
        ]
        if grid:
            means = np.array(self.shapes, dtype=np.float64).mean(axis=0).tolist() if self.shapes else [""] * 4
            row.extend(means)
        return row


@dataclass
class Summary:
    """Per-n summaries of an experiment."""
    by_n: dict[int, NSummary] = field(default_factory=dict)

    @classmethod
    def from_outcomes(
        cls,
        outcomes: list[TrialOutcome],
        shapes: list[ShapeMetrics | None] | None = None,
    ) -> "Summary":
        summary = cls()
        shapes = shapes or [None] * len(outcomes)
        for outcome, shape in zip(outcomes, shapes):
            n = outcome.record.n
            summary.by_n.setdefault(n, NSummary(n)).add(outcome, shape)
        return summary

    def merge(self, other: "Summary") -> "Summary":
        merged = dict(self.by_n)
        for n, part in other.by_n.items():
            merged[n] = merged[n].merge(part) if n in merged else part
        return Summary(merged)

    @property
    def n_values(self) -> list[int]:
        return sorted(self.by_n)

    def mean_spans(self) -> dict[int, float]:
        return {n: float(np.mean(s.spans)) for n, s in sorted(self.by_n.items()) if s.spans}

    def mean_stopping_times(self) -> dict[int, float]:
        return {n: float(np.mean(s.stopping_times)) for n, s in sorted(self.by_n.items()) if s.stopping_times}

    @property
    def violations(self) -> int:
        return sum(s.violations for s in self.by_n.values())

    @property
    def capped(self) -> int:
        return sum(s.capped for s in self.by_n.values())

    @property
    def e_events(self) -> int:
        return sum(s.e_events for s in self.by_n.values())

    def to_dict(self) -> dict:
        return {"by_n": [self.by_n[n].to_dict() for n in self.n_values]}


__all__ = ["CSV_COLUMNS", "GRID_COLUMNS", "describe", "NSummary", "Summary"]
