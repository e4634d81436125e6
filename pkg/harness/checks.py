"""Statistical checks over finished trials.

    drift_check          closest-stack drift: d_t falls with probability >= 3/4
                         whenever the closest stack holds >= 2 particles
    gap_tail_check       largest ordered gap against (ln n)^2
    fit_scaling          span growth: linear against n log n
    stopping_time_trend  mean T / (n^2 ln n) per n
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from process.errors import InvalidArgumentError, NoEstimateError
from process.trial import DriftTally, TrialOutcome, TrialRecord, log_squared

DRIFT_FLOOR = 0.75
MAX_D_FACTOR = 10.0
FLATNESS_LIMIT = 1.15
ALPHA_RANGE = (0.9, 1.1)
MIN_SCALING_POINTS = 3
MIN_SCALING_RATIO = 8


# =============================================================================
# Closest-stack drift
# =============================================================================

@dataclass
class DriftReport:
    steps: int
    decreases: int
    frequency: float
    stderr: float
    expected: float
    by_stack_size: dict[int, dict]
    singleton_steps: int
    singleton_changes: int
    max_d: list[tuple[int, int]]
    max_d_exceeded: list[tuple[int, int]] = field(default_factory=list)

    @property
    def frequency_ok(self) -> bool:
        return self.frequency >= DRIFT_FLOOR - 3 * self.stderr

    @property
    def singletons_ok(self) -> bool:
        return self.singleton_changes == 0

    @property
    def passed(self) -> bool:
        return self.frequency_ok and self.singletons_ok

    def to_dict(self) -> dict:
        data = asdict(self)
        data.update(frequency_ok=self.frequency_ok, singletons_ok=self.singletons_ok, passed=self.passed)
        return data


def drift_check(outcomes: list[TrialOutcome]) -> DriftReport:
    """Pool drift tallies of stats-level trials.

    Over steps with d_t != 0 and closest stack size >= 2, the frequency of
    d_{t+1} < d_t is compared with 0.75 - 3 standard errors and with the
    exact pooled expectation sum(1 - 2^-size) / steps. Singleton steps must
    never change d_t. max_d above 10 ln n is listed, not failed.
    """
    pooled = DriftTally()
    for outcome in outcomes:
        pooled = pooled.merge(outcome.diagnostics.drift)

    steps = sum(bucket[0] for bucket in pooled.stacked.values())
    if steps == 0:
        raise NoEstimateError("no steps with d_t != 0 next to a stack")
    decreases = sum(bucket[1] for bucket in pooled.stacked.values())
    frequency = decreases / steps
    expected = sum(count * (1 - 2.0 ** -lam) for lam, (count, _) in pooled.stacked.items()) / steps

    by_size = {
        lam: {"steps": count, "decreases": down, "frequency": down / count, "expected": 1 - 2.0 ** -lam}
        for lam, (count, down) in sorted(pooled.stacked.items())
    }

    max_d = [(o.record.n, o.record.max_d) for o in outcomes if o.record.max_d is not None]
    exceeded = [(n, d) for n, d in max_d if n > 1 and d > MAX_D_FACTOR * math.log(n)]
    if exceeded:
        print(f"⚠️  max_d above 10 ln n in {len(exceeded)} trial(s)")

    return DriftReport(
        steps=steps,
        decreases=decreases,
        frequency=frequency,
        stderr=math.sqrt(frequency * (1 - frequency) / steps),
        expected=expected,
        by_stack_size=by_size,
        singleton_steps=pooled.singleton_steps,
        singleton_changes=pooled.singleton_changes,
        max_d=max_d,
        max_d_exceeded=exceeded,
    )


# =============================================================================
# Gap tail
# =============================================================================

def gap_tail_check(records: list[TrialRecord], min_n: int = 100) -> dict:
    """Flag trials whose largest ordered gap reaches (ln n)^2.

    Trials with n < min_n are reported but never flagged.
    """
    trials = []
    flagged = []
    for record in records:
        if record.max_gap is None:
            continue
        limit = log_squared(record.n) if record.n > 1 else 0.0
        row = {"seed": record.seed, "n": record.n, "max_gap": record.max_gap, "limit": limit}
        trials.append(row)
        if record.n >= min_n and record.max_gap >= limit:
            flagged.append(row)
    return {"trials": trials, "flagged": flagged, "passed": not flagged}


# =============================================================================
# Scaling
# =============================================================================

@dataclass
class ScalingReport:
    n_values: list[int]
    span_over_n: list[float]
    span_over_n_log_n: list[float]
    flatness: float
    log_ratio_decreasing: bool
    alpha: float
    intercept: float

    @property
    def looks_linear(self) -> bool:
        low, high = ALPHA_RANGE
        return self.flatness <= FLATNESS_LIMIT and self.log_ratio_decreasing and low <= self.alpha <= high

    def to_dict(self) -> dict:
        data = asdict(self)
        data["looks_linear"] = self.looks_linear
        return data

    def to_table(self) -> str:
        lines = ["n\tspan/n\tspan/(n ln n)"]
        for n, a, b in zip(self.n_values, self.span_over_n, self.span_over_n_log_n):
            lines.append(f"{n}\t{a:.4f}\t{b:.4f}")
        lines.append(f"flatness {self.flatness:.4f}  alpha {self.alpha:.4f}  "
                     f"decreasing {self.log_ratio_decreasing}  linear {self.looks_linear}")
        return "\n".join(lines)


def fit_scaling(mean_spans: dict[int, float]) -> ScalingReport:
    """Compare mean spans against linear and n log n growth.

    Needs at least three n values (all >= 2) with n_max / n_min >= 8.
    """
    n_values = sorted(mean_spans)
    if len(n_values) < MIN_SCALING_POINTS:
        raise InvalidArgumentError(f"need at least {MIN_SCALING_POINTS} n values, got {len(n_values)}")
    if n_values[0] < 2:
        raise InvalidArgumentError("scaling fit needs n >= 2")
    if n_values[-1] < MIN_SCALING_RATIO * n_values[0]:
        raise InvalidArgumentError(f"n values must span a factor of at least {MIN_SCALING_RATIO}")

    ns = np.array(n_values, dtype=np.float64)
    spans = np.array([mean_spans[n] for n in n_values], dtype=np.float64)
    if np.any(spans <= 0):
        raise InvalidArgumentError("mean spans must be positive")

    linear = spans / ns
    log_law = spans / (ns * np.log(ns))
    alpha, intercept = np.polyfit(np.log(ns), np.log(spans), 1)
    return ScalingReport(
        n_values=n_values,
        span_over_n=linear.tolist(),
        span_over_n_log_n=log_law.tolist(),
        flatness=float(linear.max() / linear.min()),
        log_ratio_decreasing=bool(np.all(np.diff(log_law) < -1e-9 * log_law[:-1])),
        alpha=float(alpha),
        intercept=float(intercept),
    )


def stopping_time_trend(mean_stopping_times: dict[int, float]) -> dict[int, float]:
    """mean T / (n^2 ln n) per n (n >= 2)."""
    return {
        n: T / (n * n * math.log(n))
        for n, T in sorted(mean_stopping_times.items())
        if n >= 2
    }


__all__ = [
    "DriftReport",
    "drift_check",
    "gap_tail_check",
    "ScalingReport",
    "fit_scaling",
    "stopping_time_trend",
]
