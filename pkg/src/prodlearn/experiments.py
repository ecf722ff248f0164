"""Monte Carlo sweeps comparing emp and pemp against a product target."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    DEFAULT_ENUMERATION_CAP,
    ProdLearnError,
    ProductDistribution,
    SpaceSpec,
    draw_samples,
    uniform_product,
)
from .estimators import emp, pemp
from .metrics import tv_product_exact, tv_product_upper_bound, tv_sparse_vs_pointwise
from .poissonization import wilson_interval
from .seeding import PURPOSE_SAMPLE, derive_trial_seed

CSV_HEADER = (
    "estimator", "n", "k", "N", "epsilon", "m", "trials",
    "success_rate", "ci_low", "ci_high", "median_tv", "mean_tv", "seed",
)
ESTIMATORS = ("emp", "pemp")
TV_MODES = ("exact", "bound")


class ConfigError(ProdLearnError, ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    n: int
    k: int
    epsilon: float
    m_grid: tuple[int, ...]
    trials: int = 200
    estimator: str = "emp"
    master_seed: int = 0
    target: ProductDistribution | None = None  # None means uniform
    tv_mode: str = "exact"
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP

    def __post_init__(self):
        object.__setattr__(self, "m_grid", tuple(int(m) for m in self.m_grid))
        if self.n < 1 or self.k < 1:
            raise ConfigError("n and k must be >= 1")
        if not 0 < self.epsilon < 1:
            raise ConfigError("epsilon must lie in (0, 1)")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.m_grid or any(m < 1 for m in self.m_grid):
            raise ConfigError("m_grid must be a non-empty list of positive counts")
        if any(a >= b for a, b in zip(self.m_grid, self.m_grid[1:])):
            raise ConfigError("m_grid must be strictly increasing")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"estimator must be one of {ESTIMATORS}")
        if self.tv_mode not in TV_MODES:
            raise ConfigError(f"tv_mode must be one of {TV_MODES}")
        if self.tv_mode == "bound" and self.estimator != "pemp":
            raise ConfigError("tv_mode=bound is only available for pemp")
        if self.target is not None and self.target.space.sizes != self.space.sizes:
            raise ConfigError(f"target sizes {self.target.space.sizes} do not match n={self.n}, k={self.k}")

    @property
    def space(self) -> SpaceSpec:
        return SpaceSpec.uniform(self.n, self.k, enumeration_cap=self.enumeration_cap)

    @property
    def N(self) -> int:
        return self.space.total_size()

    def target_distribution(self) -> ProductDistribution:
        if self.target is not None:
            return self.target
        return uniform_product(self.space)

    def to_json(self) -> dict:
        obj = {
            "n": self.n, "k": self.k, "epsilon": self.epsilon, "m_grid": list(self.m_grid),
            "trials": self.trials, "estimator": self.estimator, "master_seed": self.master_seed,
            "tv_mode": self.tv_mode, "enumeration_cap": self.enumeration_cap,
            "target_distribution": "uniform" if self.target is None else self.target.to_json(),
        }
        return obj

    @classmethod
    def from_json(cls, obj: dict, **overrides) -> "SweepConfig":
        fields = dict(obj)
        fields.update({k: v for k, v in overrides.items() if v is not None})
        target = fields.pop("target_distribution", "uniform")
        if isinstance(target, dict):
            fields["target"] = ProductDistribution.from_json(target)
        elif target not in (None, "uniform"):
            raise ConfigError(f"unknown target_distribution {target!r}")
        known = {f for f in cls.__dataclass_fields__}
        extra = set(fields) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**fields)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class SweepRecord:
    m: int
    tv_values: tuple[float, ...]
    epsilon: float
    tv_mode: str = "exact"
    successes: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "successes", sum(tv <= self.epsilon for tv in self.tv_values))

    @property
    def trials(self) -> int:
        return len(self.tv_values)

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def wilson_ci(self) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials)

    @property
    def median_tv(self) -> float:
        return float(np.median(self.tv_values))

    @property
    def mean_tv(self) -> float:
        return math.fsum(self.tv_values) / self.trials

    @property
    def conclusive(self) -> bool:
        """In bound mode a failed trial only means the bound exceeded epsilon."""
        return self.tv_mode == "exact" or self.successes == self.trials


def _trial_tv(config: SweepConfig, target: ProductDistribution, m: int, trial: int,
              estimator: str) -> float:
    S = draw_samples(target, m, derive_trial_seed(config.master_seed, PURPOSE_SAMPLE, m, trial))
    return _tv_of(estimator, S, target, config.tv_mode)


def _tv_of(estimator: str, S, target: ProductDistribution, tv_mode: str) -> float:
    if estimator == "emp":
        return tv_sparse_vs_pointwise(emp(S), target)
    P = pemp(S)
    if tv_mode == "bound":
        return tv_product_upper_bound(P, target)
    return tv_product_exact(P, target)


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_sweep(config: SweepConfig, threads: int = 1) -> list[SweepRecord]:
    """Success rate of the configured estimator at every grid point.

    Trial ``t`` at sample size ``m`` draws from seed
    ``derive_trial_seed(master_seed, PURPOSE_SAMPLE, m, t)``; results are
    collected in trial order, so ``threads`` never changes the output.
    """
    if config.tv_mode == "exact":
        config.space.require_enumerable()
    target = config.target_distribution()
    records = []
    for m in config.m_grid:
        tvs = _map(lambda t: _trial_tv(config, target, m, t, config.estimator),
                   range(config.trials), threads)
        records.append(SweepRecord(m, tuple(tvs), config.epsilon, config.tv_mode))
    return records


@dataclass(frozen=True)
class GapReport:
    n: int
    k: int
    epsilon: float
    m: int
    tv_emp: tuple[float, ...]
    tv_pemp: tuple[float, ...]

    @property
    def trials(self) -> int:
        return len(self.tv_emp)

    @property
    def gap_witness_rate(self) -> float:
        hits = sum(p < self.epsilon < e for e, p in zip(self.tv_emp, self.tv_pemp))
        return hits / self.trials

    def to_json(self) -> dict:
        return {
            "n": self.n, "k": self.k, "N": self.k**self.n, "epsilon": self.epsilon, "m": self.m,
            "trials": self.trials,
            "median_tv_emp": float(np.median(self.tv_emp)),
            "median_tv_pemp": float(np.median(self.tv_pemp)),
            "emp_success_rate": sum(t <= self.epsilon for t in self.tv_emp) / self.trials,
            "pemp_success_rate": sum(t <= self.epsilon for t in self.tv_pemp) / self.trials,
            "gap_witness_rate": self.gap_witness_rate,
            "pairs": [[e, p] for e, p in zip(self.tv_emp, self.tv_pemp)],
        }


def gap_experiment(n: int, k: int, epsilon: float, m: int, trials: int, master_seed: int,
                   target: ProductDistribution | None = None, threads: int = 1,
                   enumeration_cap: int = DEFAULT_ENUMERATION_CAP) -> GapReport:
    """emp and pemp evaluated on the very same sample set in every trial.

    Sample sets coincide with those of ``run_sweep`` at the same seed and ``m``.
    """
    config = SweepConfig(n, k, epsilon, (m,), trials, "emp", master_seed, target,
                         enumeration_cap=enumeration_cap)
    config.space.require_enumerable()
    tgt = config.target_distribution()

    def one(t):
        S = draw_samples(tgt, m, derive_trial_seed(master_seed, PURPOSE_SAMPLE, m, t))
        return _tv_of("emp", S, tgt, "exact"), _tv_of("pemp", S, tgt, "exact")

    pairs = _map(one, range(trials), threads)
    return GapReport(n, k, epsilon, m, tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


def crossover_estimate(config: SweepConfig, delta: float, records: list[SweepRecord] | None = None,
                       threads: int = 1) -> int | None:
    """Smallest grid m whose Wilson lower bound on the success rate is >= 1 - delta."""
    if not 0 < delta < 1:
        raise ConfigError("delta must lie in (0, 1)")
    records = records if records is not None else run_sweep(config, threads)
    for rec in records:
        if rec.wilson_ci[0] >= 1.0 - delta and rec.conclusive:
            return rec.m
    return None


def geometric_grid(lo: int, hi: int, per_octave: int = 2) -> tuple[int, ...]:
    steps = max(1, math.ceil(per_octave * math.log2(hi / lo)))
    return tuple(sorted({int(round(x)) for x in np.geomspace(lo, hi, steps + 1)}))


def scaling_study(ns, k: int, epsilon: float, delta: float, trials: int, master_seed: int,
                  threads: int = 1, per_octave: int = 2) -> list[dict]:
    """emp and pemp crossovers as the dimension grows at fixed k.

    Grids are geometric: for emp from N/4 up to 64 N, for pemp from n k up to
    64 n k / eps^2 capped at the same upper end.
    """
    rows = []
    for n in ns:
        N = k**n
        emp_grid = geometric_grid(max(1, N // 4), 64 * N, per_octave)
        pemp_grid = geometric_grid(max(1, n * k), max(2 * n * k, int(4 * n * k / epsilon**2)),
                                   per_octave)
        out = {"n": n, "k": k, "N": N, "nk": n * k}
        for name, grid in (("emp", emp_grid), ("pemp", pemp_grid)):
            cfg = SweepConfig(n, k, epsilon, grid, trials, name, master_seed)
            out[f"{name}_crossover"] = crossover_estimate(cfg, delta, threads=threads)
        rows.append(out)
    return rows


def sweep_csv(config: SweepConfig, records: list[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        lo, hi = rec.wilson_ci
        w.writerow([
            config.estimator, config.n, config.k, config.N, repr(config.epsilon), rec.m,
            rec.trials, repr(rec.success_rate), repr(lo), repr(hi), repr(rec.median_tv),
            repr(rec.mean_tv), config.master_seed,
        ])
    return buf.getvalue()


def with_overrides(config: SweepConfig, **kwargs) -> SweepConfig:
    return replace(config, **{k: v for k, v in kwargs.items() if v is not None})
