"""Tail bound for sums of independent geometric-tailed integer variables.

If Pr(Y_r >= k) <= C rho^k for k >= 1 and mu = C / (1 - rho), then for
0 <= eps <= 1

    Pr(Y_1 + ... + Y_m >= (1 + eps) mu m) <= exp(-B eps^2 m),  B = eta^3 / 4,

with eta chosen so that e^lambda <= (1 - eta) / rho at lambda = eps eta^3 / (2C).

This module picks (eta, lambda, B), evaluates every step of the MGF chain
exactly on finite distributions, and compares the bound against the exact
tail from dense convolution.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from observability import tracer
from process.errors import (
    InfeasibleParametersError,
    InvalidArgumentError,
    SupportTooLargeError,
)

MAX_SUPPORT = 1_000_000
MAX_HALVINGS = 64
PMF_TOLERANCE = 1e-12


# =============================================================================
# Types
# =============================================================================

@dataclass(frozen=True, eq=False)
class TailSpec:
    """Finite pmf on {0..K} with Pr(Y >= k) <= C rho^k for k in [1, K]."""
    C: float
    rho: float
    pmf: np.ndarray

    def __post_init__(self):
        if self.C <= 0 or not 0 < self.rho < 1:
            raise InvalidArgumentError(f"need C > 0 and 0 < rho < 1, got C={self.C}, rho={self.rho}")
        pmf = np.asarray(self.pmf, dtype=np.float64)
        if pmf.ndim != 1 or pmf.size == 0 or np.any(pmf < 0):
            raise InvalidArgumentError("pmf must be a non-empty vector of non-negative weights")
        if abs(math.fsum(pmf) - 1.0) > PMF_TOLERANCE:
            raise InvalidArgumentError(f"pmf sums to {math.fsum(pmf)}, not 1")
        tails = tail_sums(pmf)
        ks = np.arange(1, pmf.size)
        limit = self.C * self.rho ** ks
        if np.any(tails[1:] > limit + PMF_TOLERANCE):
            worst = int(ks[np.argmax(tails[1:] - limit)])
            raise InvalidArgumentError(f"survival exceeds C rho^k at k={worst}")
        object.__setattr__(self, "pmf", pmf)

    @property
    def K(self) -> int:
        return self.pmf.size - 1

    def mean(self) -> float:
        return float(math.fsum(np.arange(self.pmf.size) * self.pmf))

    def variance(self) -> float:
        ks = np.arange(self.pmf.size)
        mean = self.mean()
        return float(math.fsum((ks - mean) ** 2 * self.pmf))


@dataclass(frozen=True)
class LemmaParams:
    """(eta, lambda, B) for given (C, rho, eps)."""
    C: float
    rho: float
    eps: float
    mu: float
    eta: float
    lam: float
    B: float
    halvings: int

    def bound(self, m: int) -> float:
        """exp(-B eps^2 m)."""
        return math.exp(-self.B * self.eps ** 2 * m)

    def to_dict(self) -> dict:
        return asdict(self)


# =============================================================================
# Parameters
# =============================================================================

def mu(C: float, rho: float) -> float:
    """mu = C / (1 - rho)."""
    if C <= 0:
        raise InvalidArgumentError(f"C must be positive, got {C}")
    if not 0 < rho < 1:
        raise InvalidArgumentError(f"rho must lie in (0, 1), got {rho}")
    return C / (1 - rho)


def star_holds(lam: float, eta: float, rho: float) -> bool:
    """e^lambda <= (1 - eta) / rho."""
    return math.exp(lam) <= (1 - eta) / rho


def choose_params(C: float, rho: float, eps: float) -> LemmaParams:
    """Largest eta in (1-rho)/2, (1-rho)/4, ... for which the MGF condition holds."""
    mean = mu(C, rho)
    if not 0 <= eps <= 1:
        raise InvalidArgumentError(f"eps must lie in [0, 1], got {eps}")

    eta = (1 - rho) / 2
    for halvings in range(MAX_HALVINGS + 1):
        lam = eps * eta ** 3 / (2 * C)
        if star_holds(lam, eta, rho):
            return LemmaParams(
                C=C, rho=rho, eps=eps, mu=mean, eta=eta, lam=lam, B=eta ** 3 / 4, halvings=halvings,
            )
        eta /= 2
    raise InfeasibleParametersError(f"no eta after {MAX_HALVINGS} halvings for C={C}, rho={rho}, eps={eps}")


# =============================================================================
# MGF chain
# =============================================================================

@dataclass(frozen=True)
class MgfSlack:
    """Both inequalities of the MGF chain, evaluated exactly."""
    second_moment: float
    second_moment_bound: float
    mgf: float
    mgf_bound: float

    @property
    def second_moment_slack(self) -> float:
        return self.second_moment_bound - self.second_moment

    @property
    def mgf_slack(self) -> float:
        return self.mgf_bound - self.mgf

    @property
    def holds(self) -> bool:
        return self.second_moment_slack >= 0 and self.mgf_slack >= 0


def mgf_chain_check(spec: TailSpec, lam: float) -> MgfSlack:
    """E[Z^2 e^{lam Z}] <= 2C/(1 - rho e^lam)^3 and
    E[e^{lam Z}] <= 1 + lam + 2 lam^2 C/(1 - rho e^lam)^3, with Z = Y / mu."""
    x = spec.rho * math.exp(lam)
    if x >= 1:
        raise InvalidArgumentError(f"rho e^lambda = {x} must be below 1")

    z = np.arange(spec.pmf.size) / mu(spec.C, spec.rho)
    weights = np.exp(lam * z) * spec.pmf
    second = math.fsum(np.sort(z * z * weights))
    mgf = math.fsum(np.sort(weights))
    denominator = (1 - x) ** 3
    return MgfSlack(
        second_moment=second,
        second_moment_bound=2 * spec.C / denominator,
        mgf=mgf,
        mgf_bound=1 + lam + 2 * lam * lam * spec.C / denominator,
    )


# =============================================================================
# Exact oracle
# =============================================================================

def tail_sums(pmf: np.ndarray) -> np.ndarray:
    """Pr(Y >= k) for k = 0..K, each summed smallest term first."""
    return np.cumsum(np.asarray(pmf, dtype=np.float64)[::-1])[::-1]


def convolve_power(spec: TailSpec, m: int) -> np.ndarray:
    """pmf of Y_1 + ... + Y_m by iterated dense convolution."""
    if m < 1:
        raise InvalidArgumentError(f"m must be >= 1, got {m}")
    if m * spec.K + 1 > MAX_SUPPORT:
        raise SupportTooLargeError(f"m*K = {m * spec.K} exceeds {MAX_SUPPORT} support points")
    total = spec.pmf
    for _ in range(m - 1):
        total = np.convolve(total, spec.pmf)
    return total


def exact_tail(spec: TailSpec, m: int, threshold: int) -> float:
    """Exact Pr(Y_1 + ... + Y_m >= threshold)."""
    pmf = convolve_power(spec, m)
    if threshold <= 0:
        return 1.0
    if threshold >= pmf.size:
        return 0.0
    return float(math.fsum(np.sort(pmf[threshold:])))


def geometric_spec(C: float, rho: float, tol: float = 1e-15) -> TailSpec:
    """Geometric pmf (1-rho) rho^k truncated where the dropped tail < tol, renormalized."""
    mu(C, rho)
    if C < 1:
        raise InvalidArgumentError("a geometric pmf has Pr(Y >= 1) = rho, which needs C >= 1")
    K = max(1, math.ceil(math.log(tol) / math.log(rho)) - 1)
    ks = np.arange(K + 1)
    pmf = (1 - rho) * rho ** ks
    pmf /= math.fsum(pmf)
    return TailSpec(C=C, rho=rho, pmf=pmf)


# =============================================================================
# Certification
# =============================================================================

@dataclass(frozen=True)
class CertificationReport:
    params: LemmaParams
    m: int
    K: int
    threshold: int
    exact_tail: float
    chernoff: float
    bound: float
    slack: MgfSlack

    @property
    def passed(self) -> bool:
        return (
            self.exact_tail <= self.bound
            and self.exact_tail <= self.chernoff * (1 + 1e-9)
            and self.slack.holds
        )

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "m": self.m,
            "K": self.K,
            "threshold": self.threshold,
            "exact_tail": self.exact_tail,
            "chernoff": self.chernoff,
            "bound": self.bound,
            "second_moment_slack": self.slack.second_moment_slack,
            "mgf_slack": self.slack.mgf_slack,
            "passed": self.passed,
        }

    def to_table(self) -> str:
        p = self.params
        rows = [
            ("C", f"{p.C:g}"),
            ("rho", f"{p.rho:g}"),
            ("eps", f"{p.eps:g}"),
            ("m", str(self.m)),
            ("mu", f"{p.mu:.6g}"),
            ("eta", f"{p.eta:.6g}"),
            ("lambda", f"{p.lam:.6g}"),
            ("B", f"{p.B:.6g}"),
            ("threshold", str(self.threshold)),
            ("exact tail", f"{self.exact_tail:.6e}"),
            ("chernoff", f"{self.chernoff:.6e}"),
            ("lemma bound", f"{self.bound:.6e}"),
            ("E[Z^2 e^lZ] slack", f"{self.slack.second_moment_slack:.6e}"),
            ("E[e^lZ] slack", f"{self.slack.mgf_slack:.6e}"),
            ("passed", "yes" if self.passed else "NO"),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def lemma_threshold(params: LemmaParams, m: int) -> int:
    """ceil((1 + eps) mu m), guarded against float noise just above an integer."""
    raw = (1 + params.eps) * params.mu * m
    nearest = round(raw)
    return int(nearest) if abs(raw - nearest) < 1e-9 else math.ceil(raw)


def certify(C: float, rho: float, m: int, eps: float, spec: TailSpec | None = None) -> CertificationReport:
    """Check the lemma end to end on a concrete distribution (geometric by default)."""
    with tracer.start_as_current_span("certify") as span:
        span.set_attribute("C", C)
        span.set_attribute("rho", rho)
        span.set_attribute("m", m)
        params = choose_params(C, rho, eps)
        spec = spec or geometric_spec(C, rho)
        threshold = lemma_threshold(params, m)
        slack = mgf_chain_check(spec, params.lam)
        chernoff = math.exp(-params.lam * threshold / params.mu) * slack.mgf ** m
        report = CertificationReport(
            params=params,
            m=m,
            K=spec.K,
            threshold=threshold,
            exact_tail=exact_tail(spec, m, threshold),
            chernoff=chernoff,
            bound=params.bound(m),
            slack=slack,
        )
        span.set_attribute("passed", report.passed)
    return report


__all__ = [
    "TailSpec",
    "LemmaParams",
    "MgfSlack",
    "CertificationReport",
    "mu",
    "choose_params",
    "star_holds",
    "mgf_chain_check",
    "tail_sums",
    "convolve_power",
    "exact_tail",
    "geometric_spec",
    "lemma_threshold",
    "certify",
]
