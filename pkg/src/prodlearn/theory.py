"""Closed-form constants and bounds for ERM/PERM sample complexity.

Poisson quantities are evaluated in log space, splitting ``y!`` into its
Stirling form plus a small correction, so probabilities keep full relative
precision for rates up to ~1e4 and beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import ProdLearnError


class HypothesisViolated(ProdLearnError, ValueError):
    """A bound was evaluated outside the range where it was derived."""


class BoundInapplicable(ProdLearnError, ValueError):
    pass


def c1_constant() -> float:
    """1 / (sqrt(pi) * e^(1/12)) ~= 0.5190795."""
    return 1.0 / (math.sqrt(math.pi) * math.exp(1.0 / 12.0))


C1 = c1_constant()
C_MAX = C1**2 / 16.0


@dataclass(frozen=True)
class BoundParams:
    N: int
    m: float
    epsilon: float
    delta: float = 0.1

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.m < 0:
            raise ValueError("m must be >= 0")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @property
    def lam(self) -> float:
        return self.m / self.N


_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_STIRLING_COEFFS = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360)


def stirling_error(n: float) -> float:
    """lgamma(n + 1) - [(n + 1/2) log n - n + log sqrt(2 pi)], accurate for large n.

    Uses the asymptotic series above n = 15, where differencing ``lgamma``
    would lose most significant digits.
    """
    if n <= 15:
        return math.lgamma(n + 1) - (n + 0.5) * math.log(n) + n - _HALF_LOG_2PI
    inv2 = 1.0 / (n * n)
    acc = 0.0
    for c in reversed(_STIRLING_COEFFS):
        acc = acc * inv2 + c
    return acc / n


def _deviance(y: float, lam: float) -> float:
    """y log(y / lam) + lam - y without cancellation when y is close to lam."""
    if abs(y - lam) < 0.1 * (y + lam):
        v = (y - lam) / (y + lam)
        s = (y - lam) * v
        ej = 2.0 * y * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return y * math.log(y / lam) + lam - y


def poisson_logpmf(lam: float, y: int) -> float:
    """log(e^-lam lam^y / y!) via the saddle-point split of y!."""
    if lam <= 0:
        raise ValueError("rate must be positive")
    if y < 0:
        return -math.inf
    if y == 0:
        return -lam
    return -math.log(2.0 * math.pi * y) / 2.0 - stirling_error(y) - _deviance(y, lam)


def poisson_pmf(lam: float, y: int) -> float:
    return math.exp(poisson_logpmf(lam, y))


def _stirling_error_array(n: np.ndarray) -> np.ndarray:
    out = np.empty(n.shape)
    small = n <= 15
    ns = n[small]
    out[small] = gammaln(ns + 1) - (ns + 0.5) * np.log(ns) + ns - _HALF_LOG_2PI
    nb = n[~small]
    inv2 = 1.0 / (nb * nb)
    acc = np.zeros(nb.shape)
    for c in reversed(_STIRLING_COEFFS):
        acc = acc * inv2 + c
    out[~small] = acc / nb
    return out


def _deviance_array(y: np.ndarray, lam: float) -> np.ndarray:
    out = y * np.log(y / lam) + lam - y
    near = np.abs(y - lam) < 0.1 * (y + lam)
    if near.any():
        yn = y[near]
        v = (yn - lam) / (yn + lam)
        s = (yn - lam) * v
        ej = 2.0 * yn * v
        v2 = v * v
        # |v| < 0.1 here, so 20 terms are far past double precision
        for j in range(1, 20):
            ej = ej * v2
            s = s + ej / (2 * j + 1)
        out[near] = s
    return out


def poisson_pmf_array(lam: float, y: np.ndarray) -> np.ndarray:
    """Vectorised ``poisson_pmf`` over non-negative integer counts."""
    if lam <= 0:
        raise ValueError("rate must be positive")
    y = np.asarray(y, dtype=np.float64)
    logp = np.full(y.shape, -float(lam))
    pos = y > 0
    yp = y[pos]
    logp[pos] = -np.log(2.0 * np.pi * yp) / 2.0 - _stirling_error_array(yp) - _deviance_array(yp, lam)
    return np.exp(logp)


def truncation_point(lam: float) -> int:
    return int(math.ceil(lam + 40.0 * math.sqrt(lam) + 40.0))


def folded_abs_mean_exact(lam: float) -> float:
    """E|Y - lam| for Y ~ Poisson(lam), via 2 lam^(f+1) e^-lam / f!, f = floor(lam)."""
    if lam <= 0:
        raise ValueError("rate must be positive")
    f = math.floor(lam)
    # 2 lam^(f+1) e^-lam / f! = 2 lam * pmf(f)
    return math.exp(math.log(2.0 * lam) + poisson_logpmf(lam, f))


def folded_abs_mean_sum(lam: float) -> float:
    """Truncated-sum evaluation of E|Y - lam|, independent of the closed form."""
    y = np.arange(truncation_point(lam) + 1, dtype=np.float64)
    return math.fsum(poisson_pmf_array(lam, y) * np.abs(y - lam))


def folded_variance(lam: float) -> float:
    """Var|Y - lam| = E(Y - lam)^2 - (E|Y - lam|)^2 = lam - mean^2."""
    return lam - folded_abs_mean_exact(lam) ** 2


def folded_variance_sum(lam: float) -> float:
    y = np.arange(truncation_point(lam) + 1, dtype=np.float64)
    p = poisson_pmf_array(lam, y)
    return math.fsum(p * (y - lam) ** 2) - math.fsum(p * np.abs(y - lam)) ** 2


def _require_rate_at_least_two(lam: float):
    if lam < 2:
        raise HypothesisViolated(f"rate {lam} < 2; the folded-moment bounds assume rate >= 2")


def lemma2_bounds(lam: float) -> tuple[float, float]:
    """(lower bound on E|Y - lam|, upper bound on Var|Y - lam|) = (c1 sqrt(lam), lam)."""
    _require_rate_at_least_two(lam)
    return C1 * math.sqrt(lam), float(lam)


@dataclass(frozen=True)
class ChainStep:
    name: str
    lhs: float
    rhs: float
    log_ratio: float  # log(lhs / rhs); >= 0 means the inequality holds

    @property
    def margin(self) -> float:
        return self.rhs * math.expm1(self.log_ratio)

    @property
    def holds(self) -> bool:
        return self.log_ratio >= 0.0


@dataclass(frozen=True)
class ChainReport:
    lam: float
    exact: float
    steps: tuple[ChainStep, ...]

    @property
    def holds(self) -> bool:
        return all(s.holds for s in self.steps)

    def to_json(self) -> dict:
        return {
            "lambda": self.lam,
            "exact_mean": self.exact,
            "holds": self.holds,
            "steps": [
                {"name": s.name, "lhs": s.lhs, "rhs": s.rhs, "margin": s.margin,
                 "log_ratio": s.log_ratio, "holds": s.holds}
                for s in self.steps
            ],
        }


def appendix_chain_check(lam: float) -> ChainReport:
    """Evaluate each link of the lower-bound chain for E|Y - lam| at ``lam``.

    (i)   exact >= 2 f^(f+1) e^-f / f!              (f = floor(lam))
    (ii)        >= sqrt(2/pi) sqrt(f) e^(-1/(12 f))  (Stirling upper bound on f!)
    (iii)       >= sqrt(2/pi) sqrt(lam/2) e^(-1/12) = c1 sqrt(lam)

    Ratios are formed in log space.  Step (ii)'s true gap is about 1/(360 f^3),
    below double rounding of ``lgamma`` for large f, so it is evaluated from
    the Stirling series directly.
    """
    _require_rate_at_least_two(lam)
    f = math.floor(lam)
    log_exact = math.log(2.0 * lam) + poisson_logpmf(lam, f)
    log_a = math.log(2.0 * f) + poisson_logpmf(f, f)
    log_b = 0.5 * math.log(2.0 / math.pi) + 0.5 * math.log(f) - 1.0 / (12.0 * f)
    log_c = math.log(C1) + 0.5 * math.log(lam)

    if f <= 15:
        ab = 1.0 / (12.0 * f) - stirling_error(f)
    else:
        inv2 = 1.0 / (f * f)
        acc = 0.0
        for c in reversed(_STIRLING_COEFFS[1:]):
            acc = acc * inv2 + c
        ab = -acc * inv2 / f
    # (f+1) log(lam/f) - (lam - f): both terms small, no large cancellation
    exact_a = (f + 1) * math.log(lam / f) - (lam - f)
    bc = 0.5 * math.log(f / (lam / 2.0)) + 1.0 / 12.0 - 1.0 / (12.0 * f)

    steps = (
        ChainStep("monotonicity", math.exp(log_exact), math.exp(log_a), exact_a),
        ChainStep("stirling", math.exp(log_a), math.exp(log_b), ab),
        ChainStep("floor_halving", math.exp(log_b), math.exp(log_c), bc),
    )
    return ChainReport(lam, math.exp(log_exact), steps)


def chebyshev_failure_bound(p: BoundParams) -> float:
    """m / (c1 sqrt(mN) - 2 m eps)^2, the Chebyshev bound on the Poissonized event.

    Four times this value bounds Pr[d_TV(emp(S), D) < eps] for uniform D.
    """
    if p.m <= 0:
        raise BoundInapplicable("m must be positive")
    gap = C1 * math.sqrt(p.m * p.N) - 2.0 * p.m * p.epsilon
    if gap <= 0:
        raise BoundInapplicable(
            f"2 m eps >= c1 sqrt(mN) (m={p.m}, N={p.N}, eps={p.epsilon}); need m < c1^2 N / (4 eps^2)"
        )
    return p.m / gap**2


def chebyshev_closed_form(c: float, N: int) -> float:
    """The same bound at m = c N / eps^2, where eps cancels: c / ((c1 sqrt c - 2c)^2 N)."""
    return c / ((C1 * math.sqrt(c) - 2.0 * c) ** 2 * N)


def erm_lower_threshold(N: int, epsilon: float, c: float = 0.016) -> int:
    """Largest integer m with m < c N / eps^2."""
    if not 0 < c < C_MAX:
        raise ValueError(f"c must lie in (0, {C_MAX:.6f})")
    x = c * N / epsilon**2
    m = math.floor(x)
    return m - 1 if m == x else m


def perm_sample_bound(n: int, k: int, epsilon: float, delta: float, C: float = 1.0) -> int:
    """ceil(C n k log(1/delta) / eps^2); C stands in for the unstated constant."""
    if C <= 0:
        raise ValueError("C must be positive")
    return math.ceil(C * n * k * math.log(1.0 / delta) / epsilon**2)


def distinct_sample_tv(m: int, N: int) -> float:
    """TV between emp of m distinct samples and the uniform distribution on N points."""
    if not 1 <= m <= N:
        raise ValueError(f"need 1 <= m <= N for distinct samples, got m={m}, N={N}")
    return 1.0 - m / N


def distinct_sample_lower_bound(m: int, N: int) -> float:
    return 0.5 * (1.0 - m / N)


def expected_emp_tv_uniform(m: int, N: int) -> float:
    """Poissonized approximation of E d_TV(emp, uniform): E|Y - lam| / (2 lam)."""
    lam = m / N
    return folded_abs_mean_exact(lam) / (2.0 * lam)


def theory_report(N: int, m: float, epsilon: float, delta: float = 0.1, c: float = 0.016,
                  n: int | None = None, k: int | None = None, C: float = 1.0) -> dict:
    """Every constant and bound evaluated at one parameter point, JSON-ready."""
    p = BoundParams(N, m, epsilon, delta)
    out: dict = {
        "params": {"N": N, "m": m, "epsilon": epsilon, "delta": delta, "c": c, "lambda": p.lam},
        "c1": C1,
        "c_max": C_MAX,
        "erm_lower_threshold": erm_lower_threshold(N, epsilon, c),
        "chebyshev_limit_m": C1**2 * N / (4 * epsilon**2),
    }
    try:
        b = chebyshev_failure_bound(p)
        out["chebyshev_failure_bound"] = b
        out["emp_success_upper_bound"] = 4 * b
    except BoundInapplicable as exc:
        out["chebyshev_failure_bound"] = None
        out["chebyshev_note"] = str(exc)
    out["chebyshev_closed_form_at_c"] = chebyshev_closed_form(c, N)
    out["chebyshev_cap_at_c"] = 4.0 / (C1**2 * N)
    if p.lam > 0:
        out["folded_abs_mean"] = folded_abs_mean_exact(p.lam)
        out["expected_emp_tv"] = folded_abs_mean_exact(p.lam) / (2 * p.lam)
    if p.lam >= 2:
        lo, hi = lemma2_bounds(p.lam)
        out["folded_moment_bounds"] = {"mean_lower": lo, "var_upper": hi,
                         "folded_variance": folded_variance(p.lam)}
        out["folded_mean_chain"] = appendix_chain_check(p.lam).to_json()
    if 1 <= m <= N and float(m).is_integer():
        out["distinct_sample_tv"] = distinct_sample_tv(int(m), N)
        out["distinct_sample_lower_bound"] = distinct_sample_lower_bound(int(m), N)
    if n is not None and k is not None:
        out["perm_sample_bound"] = perm_sample_bound(n, k, epsilon, delta, C)
    return out
