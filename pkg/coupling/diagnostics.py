"""Statistics collected on top of the coupling.

All tallies here are mergeable: adding two tallies gives the tally of the
union of their samples, which lets trials run in separate processes.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from process.errors import NoEstimateError

from .domination import (
    CASE_BOTH_STACKED,
    CASE_LEFT_STACKED,
    CASE_RIGHT_STACKED,
    CASE_SINGLETONS,
)
from .ordered import OrderedView

MIN_CASE_SAMPLES = 1000
MIN_SURVIVAL_SAMPLES = 30

# Upper bounds printed next to the positive branches of the table
ANNOTATED_POSITIVE = {
    CASE_BOTH_STACKED: 1 / 16,
    CASE_LEFT_STACKED: 1 / 4,
    CASE_RIGHT_STACKED: 1 / 4,
}


# =============================================================================
# delta_hat case statistics
# =============================================================================

@dataclass
class DeltaHatTally:
    """Per (case, s_j, s_j+1) cell: count, sum, sum of squares, positives, max |delta|."""
    cells: dict[tuple[int, int, int], list[int]] = field(default_factory=dict)

    def record(self, view: OrderedView, deltas: np.ndarray):
        I = view.I
        if I.size == 0:
            return
        s_left, s_right = view.s[I], view.s[I + 1]
        case = np.where(
            s_left >= 2,
            np.where(s_right >= 2, CASE_BOTH_STACKED, CASE_LEFT_STACKED),
            np.where(s_right >= 2, CASE_RIGHT_STACKED, CASE_SINGLETONS),
        )
        keep = case != CASE_SINGLETONS
        if not keep.any():
            return
        rows = np.stack([case[keep], s_left[keep], s_right[keep]], axis=1)
        values = deltas[I][keep]
        keys, inverse = np.unique(rows, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        counts = np.bincount(inverse)
        sums = np.bincount(inverse, weights=values)
        squares = np.bincount(inverse, weights=values * values)
        positives = np.bincount(inverse, weights=(values > 0).astype(np.int64))
        max_abs = np.zeros(len(keys), dtype=np.int64)
        np.maximum.at(max_abs, inverse, np.abs(values))

        for index, key in enumerate(map(tuple, keys.tolist())):
            cell = self.cells.setdefault(key, [0, 0, 0, 0, 0])
            cell[0] += int(counts[index])
            cell[1] += int(sums[index])
            cell[2] += int(squares[index])
            cell[3] += int(positives[index])
            cell[4] = max(cell[4], int(max_abs[index]))

    def merge(self, other: "DeltaHatTally") -> "DeltaHatTally":
        merged = {key: list(cell) for key, cell in self.cells.items()}
        for key, cell in other.cells.items():
            target = merged.setdefault(key, [0, 0, 0, 0, 0])
            for i in range(4):
                target[i] += cell[i]
            target[4] = max(target[4], cell[4])
        return DeltaHatTally(merged)

    def to_dict(self) -> dict:
        return {f"{c}:{a}:{b}": cell for (c, a, b), cell in sorted(self.cells.items())}

    @classmethod
    def from_dict(cls, data: dict) -> "DeltaHatTally":
        cells = {}
        for key, cell in data.items():
            c, a, b = (int(part) for part in key.split(":"))
            cells[(c, a, b)] = list(cell)
        return cls(cells)


def positive_probability(case: int, s_left: int, s_right: int) -> float:
    """Exact chance of the positive branch given the stack sizes."""
    if case == CASE_BOTH_STACKED:
        return 2.0 ** (-s_left - s_right)
    if case == CASE_LEFT_STACKED:
        return 2.0 ** (-s_left)
    if case == CASE_RIGHT_STACKED:
        return 2.0 ** (-s_right)
    return 0.0


@dataclass(frozen=True)
class CaseStats:
    case: int
    count: int
    mean: float
    stderr: float
    positive_freq: float
    expected_positive: float
    positive_stderr: float
    max_abs: int
    sufficient: bool

    @property
    def bounded(self) -> bool:
        return self.max_abs <= 2

    @property
    def mean_ok(self) -> bool:
        """E(delta_hat) <= -1/2, up to three standard errors."""
        return self.mean <= -0.5 + 3 * self.stderr

    @property
    def frequency_ok(self) -> bool:
        return abs(self.positive_freq - self.expected_positive) <= 3 * self.positive_stderr + 1e-12

    @property
    def annotation_ok(self) -> bool:
        return self.positive_freq <= ANNOTATED_POSITIVE[self.case] + 3 * self.positive_stderr + 1e-12

    @property
    def passed(self) -> bool:
        return self.bounded and self.mean_ok and self.frequency_ok and self.annotation_ok


def delta_hat_stats(tally: DeltaHatTally, min_samples: int = MIN_CASE_SAMPLES) -> dict[int, CaseStats]:
    """Pool the cells of each non-trivial case into conditional statistics.

    The expected positive frequency is the count-weighted mix of the exact
    dyadic probabilities of the cells; its standard error treats every sample
    as a Bernoulli with its own cell probability.
    """
    report = {}
    for case in (CASE_BOTH_STACKED, CASE_LEFT_STACKED, CASE_RIGHT_STACKED):
        cells = [(key, cell) for key, cell in tally.cells.items() if key[0] == case]
        count = sum(cell[0] for _, cell in cells)
        if count == 0:
            continue
        total = sum(cell[1] for _, cell in cells)
        squares = sum(cell[2] for _, cell in cells)
        positives = sum(cell[3] for _, cell in cells)
        mean = total / count
        variance = max(squares / count - mean * mean, 0.0)
        expected = sum(cell[0] * positive_probability(*key) for key, cell in cells) / count
        bernoulli_var = sum(
            cell[0] * positive_probability(*key) * (1 - positive_probability(*key)) for key, cell in cells
        )
        report[case] = CaseStats(
            case=case,
            count=count,
            mean=mean,
            stderr=math.sqrt(variance / count),
            positive_freq=positives / count,
            expected_positive=expected,
            positive_stderr=math.sqrt(bernoulli_var) / count,
            max_abs=max(cell[4] for _, cell in cells),
            sufficient=count >= min_samples,
        )
    return report


# =============================================================================
# Geometric tail of g_hat
# =============================================================================

@dataclass(frozen=True)
class RhoEstimate:
    rho: float
    r_squared: float
    points: int


def survival(tail_histogram: np.ndarray) -> np.ndarray:
    """Empirical Pr(value >= k) for k = 0..len-1."""
    counts = np.asarray(tail_histogram, dtype=np.float64)
    tails = np.cumsum(counts[::-1])[::-1]
    return tails / tails[0] if tails.size and tails[0] > 0 else np.zeros_like(tails)


def estimate_rho(tail_histogram: np.ndarray, min_samples: int = MIN_SURVIVAL_SAMPLES) -> RhoEstimate:
    """Fit Pr(g_hat - 3 >= k) ~ rho^k by least squares on the log survival.

    Only k whose survival is backed by at least ``min_samples`` samples
    enter the fit.
    """
    counts = np.asarray(tail_histogram, dtype=np.int64)
    tails = np.cumsum(counts[::-1])[::-1]
    ks = np.flatnonzero(tails >= max(min_samples, 1))
    if ks.size < 2:
        raise NoEstimateError("need at least two survival points with enough samples")

    log_survival = np.log(tails[ks] / tails[0])
    fit = stats.linregress(ks, log_survival)
    if fit.slope >= 0:
        raise NoEstimateError("empirical survival does not decay")
    return RhoEstimate(rho=float(math.exp(fit.slope)), r_squared=float(fit.rvalue ** 2), points=int(ks.size))


# =============================================================================
# Independence diagnostics (report-only)
# =============================================================================

def stack_distance_pairs(view: OrderedView, L: int) -> int:
    """Pairs j < j' in the same residue class, both in I_t, whose stacks are
    at most two apart."""
    I = view.I
    pairs = 0
    for offset in (1, 2):
        if I.size <= offset:
            break
        left, right = I[:-offset], I[offset:]
        close = (view.P[right] - view.P[left]) <= 2
        same_class = ((left + 1) % L) == ((right + 1) % L)
        pairs += int(np.count_nonzero(close & same_class))
    return pairs


@dataclass
class CorrelationTally:
    """Running sums for the Pearson correlation of delta_hat pairs."""
    lag: int = 3
    count: int = 0
    sx: float = 0.0
    sy: float = 0.0
    sxx: float = 0.0
    syy: float = 0.0
    sxy: float = 0.0

    def record(self, view: OrderedView, deltas: np.ndarray):
        # Consecutive members of I_t sit on distinct, increasing stacks, so a
        # lag of k entries is a stack distance of at least k, not 3 L.
        values = deltas[view.I].astype(np.float64)
        if values.size <= self.lag:
            return
        x, y = values[: -self.lag], values[self.lag:]
        self.count += int(x.size)
        self.sx += float(x.sum())
        self.sy += float(y.sum())
        self.sxx += float(x @ x)
        self.syy += float(y @ y)
        self.sxy += float(x @ y)

    def merge(self, other: "CorrelationTally") -> "CorrelationTally":
        return CorrelationTally(
            lag=self.lag,
            count=self.count + other.count,
            sx=self.sx + other.sx,
            sy=self.sy + other.sy,
            sxx=self.sxx + other.sxx,
            syy=self.syy + other.syy,
            sxy=self.sxy + other.sxy,
        )

    def correlation(self) -> float | None:
        if self.count < 2:
            return None
        n = self.count
        cov = self.sxy / n - (self.sx / n) * (self.sy / n)
        var_x = self.sxx / n - (self.sx / n) ** 2
        var_y = self.syy / n - (self.sy / n) ** 2
        if var_x <= 0 or var_y <= 0:
            return None
        return cov / math.sqrt(var_x * var_y)


def lagged_correlation(tally: CorrelationTally) -> dict:
    """Correlation of delta_hat pairs ``lag`` entries apart in I_t, with its
    3-sigma band.

    The lag counts entries of I_t, so the stack distance is at least ``lag``.
    It is not a 3 L stack distance.
    """
    r = tally.correlation()
    band = 3 / math.sqrt(tally.count) if tally.count else None
    return {
        "lag": tally.lag,
        "lag_unit": "I_t entries",
        "pairs": tally.count,
        "correlation": r,
        "band": band,
        "within_band": None if r is None else abs(r) <= band,
    }


def zi_bound_report(z_peak: float, rho_hat: float) -> dict:
    """Compare the largest class mean Z_i / |A_i| with 3 + 2/(1 - rho_hat)."""
    bound = 3 + 2 / (1 - rho_hat)
    return {"z_peak": z_peak, "bound": bound, "holds": z_peak <= bound}


__all__ = [
    "DeltaHatTally",
    "CaseStats",
    "delta_hat_stats",
    "positive_probability",
    "ANNOTATED_POSITIVE",
    "RhoEstimate",
    "survival",
    "estimate_rho",
    "stack_distance_pairs",
    "CorrelationTally",
    "lagged_correlation",
    "zi_bound_report",
]
