"""Balls-and-bins occupancy counts and their independent Poisson surrogates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import binomtest

from .seeding import PURPOSE_EVENT, derive_trial_seed

EXACT = "exact-m"
POISSONIZED = "poissonized"
BATCH = 4096
BATCH_CELLS = 1 << 21


@dataclass(frozen=True, eq=False)
class OccupancyCounts:
    bins: np.ndarray
    regime: str

    @property
    def total(self) -> int:
        return int(self.bins.sum())

    @property
    def N(self) -> int:
        return self.bins.size


def _throw(rng: np.random.Generator, N: int, m: int, size: int) -> np.ndarray:
    # one uniform draw per ball, then per-row histograms via offset bincount
    throws = rng.integers(0, N, size=(size, m))
    throws += (np.arange(size) * N)[:, None]
    return np.bincount(throws.ravel(), minlength=size * N).reshape(size, N)


def multinomial_counts(N: int, m: int, seed) -> OccupancyCounts:
    if N < 1 or m < 0:
        raise ValueError("need N >= 1 and m >= 0")
    rng = np.random.default_rng(seed)
    return OccupancyCounts(_throw(rng, N, m, 1)[0], EXACT)


def poisson_counts(N: int, lam: float, seed) -> OccupancyCounts:
    if lam <= 0:
        raise ValueError("rate must be positive")
    rng = np.random.default_rng(seed)
    return OccupancyCounts(rng.poisson(lam, size=N), POISSONIZED)


@dataclass(frozen=True)
class MultinomialSource:
    """m balls thrown uniformly into N bins."""

    N: int
    m: int
    regime = EXACT

    @property
    def width(self) -> int:
        return max(self.m, self.N)

    def batch(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return _throw(rng, self.N, self.m, size)


@dataclass(frozen=True)
class PoissonSource:
    """N independent Poisson(lam) bins."""

    N: int
    lam: float
    regime = POISSONIZED

    @property
    def width(self) -> int:
        return self.N

    def batch(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.poisson(self.lam, size=(size, self.N))


def discrepancy_stat(counts, m: float, N: int) -> float:
    """sum_j |X_j - m/N|; equals 2 m d_TV(emp, uniform) for exact-m counts."""
    bins = counts.bins if isinstance(counts, OccupancyCounts) else np.asarray(counts)
    if bins.shape[-1] != N:
        raise ValueError(f"expected {N} bins, got {bins.shape[-1]}")
    return math.fsum(np.abs(bins - m / N))


# Events take a (trials, N) count array and return one boolean per row.
Event = Callable[[np.ndarray], np.ndarray]


def max_load_at_most(t: int) -> Event:
    return lambda c: c.max(axis=-1) <= t


def total_at_most(m: int) -> Event:
    return lambda c: c.sum(axis=-1) <= m


def discrepancy_below(m: int, N: int, epsilon: float) -> Event:
    """The event sum_j |X_j - m/N| < 2 m eps (emp within eps of uniform)."""
    return lambda c: np.abs(c - m / N).sum(axis=-1) < 2.0 * m * epsilon


def bin_is_zero(j: int = 0) -> Event:
    return lambda c: c[..., j] == 0


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class EventEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    successes: int
    trials: int

    def to_json(self) -> dict:
        return {"estimate": self.estimate, "ci_low": self.ci_low, "ci_high": self.ci_high,
                "successes": self.successes, "trials": self.trials}


def event_probability(event: Event, generator, trials: int, seed: int,
                      purpose: int = PURPOSE_EVENT) -> EventEstimate:
    """Monte Carlo frequency of ``event`` with a Wilson 95% interval.

    Trials are generated in fixed-size blocks, block ``b`` seeded by
    ``derive_trial_seed(seed, purpose, N, b)``; the block size depends only on
    the generator, so results are reproducible for a given seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    block = max(1, min(BATCH, BATCH_CELLS // max(generator.width, 1)))
    hits = 0
    for b, start in enumerate(range(0, trials, block)):
        size = min(block, trials - start)
        rng = np.random.default_rng(derive_trial_seed(seed, purpose, generator.N, b))
        hits += int(np.count_nonzero(event(generator.batch(rng, size))))
    lo, hi = wilson_interval(hits, trials)
    return EventEstimate(hits / trials, lo, hi, hits, trials)


@dataclass(frozen=True)
class PoissonizationReport:
    N: int
    m: int
    exact: EventEstimate
    poissonized: EventEstimate
    slack: float

    @property
    def rhs(self) -> float:
        return 4.0 * self.poissonized.estimate

    @property
    def holds(self) -> bool:
        return self.exact.estimate <= self.rhs + self.slack

    def to_json(self) -> dict:
        return {"N": self.N, "m": self.m, "exact": self.exact.to_json(),
                "poissonized": self.poissonized.to_json(), "four_times_poissonized": self.rhs,
                "slack": self.slack, "holds": self.holds}


def poissonization_check(event: Event, N: int, m: int, trials: int, seed: int) -> PoissonizationReport:
    """Compare Pr_X[event] with 4 Pr_Y[event] for a caller-asserted monotone event.

    A statistical report, not a proof: ``holds`` allows the upper CI slack of
    both estimates.
    """
    x = event_probability(event, MultinomialSource(N, m), trials, seed, purpose=PURPOSE_EVENT)
    y = event_probability(event, PoissonSource(N, m / N), trials, seed, purpose=PURPOSE_EVENT + 1)
    slack = (x.ci_high - x.estimate) + 4.0 * (y.ci_high - y.estimate)
    return PoissonizationReport(N, m, x, y, slack)


def named_event(name: str, N: int, m: int, epsilon: float | None = None,
                threshold: int | None = None) -> Event:
    if name == "discrepancy":
        if epsilon is None:
            raise ValueError("discrepancy event needs epsilon")
        return discrepancy_below(m, N, epsilon)
    if name == "max-load":
        if threshold is None:
            raise ValueError("max-load event needs a threshold")
        return max_load_at_most(threshold)
    if name == "total":
        return total_at_most(m if threshold is None else threshold)
    raise ValueError(f"unknown event {name!r}")
