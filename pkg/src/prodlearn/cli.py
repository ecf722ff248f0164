"""Command-line entry point: ``prodlearn <subcommand> ...``.

Exit codes: 0 success, 2 invalid configuration, 3 enumeration unsupported.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments, poissonization, theory
from .core import (
    DenseDistribution,
    EnumerationUnsupported,
    ProdLearnError,
    ProductDistribution,
    SpaceSpec,
    draw_samples,
    load_distribution,
    load_json,
    uniform_product,
)
from .metrics import tv_dense, tv_product_exact, tv_product_upper_bound

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ENUMERATION = 3


def _int_list(text: str) -> list[int]:
    try:
        return [int(float(x)) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of counts: {text}") from exc


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj, out: str | None = None):
    _emit(json.dumps(obj, indent=2) + "\n", out)


def _add_sweep_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with SweepConfig fields; flags override it")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--m-grid", type=_int_list, help="comma-separated sample counts")
    p.add_argument("--trials", type=int)
    p.add_argument("--estimator", choices=experiments.ESTIMATORS)
    p.add_argument("--seed", type=int)
    p.add_argument("--tv-mode", choices=experiments.TV_MODES)
    p.add_argument("--target", help="product distribution JSON (default: uniform)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="write output here instead of stdout")


def _sweep_config(args) -> experiments.SweepConfig:
    base = load_json(args.config) if args.config else {}
    overrides = {
        "n": args.n, "k": args.k, "epsilon": args.epsilon,
        "m_grid": tuple(args.m_grid) if args.m_grid else None,
        "trials": args.trials, "estimator": args.estimator, "master_seed": args.seed,
        "tv_mode": args.tv_mode,
    }
    if args.target:
        base["target_distribution"] = load_json(args.target)
    missing = [f for f in ("n", "k", "epsilon", "m_grid") if f not in base and overrides[f] is None]
    if missing:
        raise experiments.ConfigError(f"missing required settings: {', '.join(missing)}")
    return experiments.SweepConfig.from_json(base, **overrides)


def cmd_sweep(args) -> int:
    config = _sweep_config(args)
    records = experiments.run_sweep(config, threads=args.threads)
    _emit(experiments.sweep_csv(config, records), args.out)
    return EXIT_OK


def cmd_crossover(args) -> int:
    config = _sweep_config(args)
    records = experiments.run_sweep(config, threads=args.threads)
    m_star = experiments.crossover_estimate(config, args.delta, records)
    _emit_json({
        "estimator": config.estimator, "n": config.n, "k": config.k, "N": config.N,
        "epsilon": config.epsilon, "delta": args.delta, "crossover_m": m_star,
        "found": m_star is not None,
        "grid": [{"m": r.m, "success_rate": r.success_rate, "ci_low": r.wilson_ci[0],
                  "ci_high": r.wilson_ci[1]} for r in records],
    }, args.out)
    return EXIT_OK


def cmd_gap(args) -> int:
    target = ProductDistribution.from_json(load_json(args.target)) if args.target else None
    report = experiments.gap_experiment(args.n, args.k, args.epsilon, args.m, args.trials,
                                        args.seed, target=target, threads=args.threads)
    obj = report.to_json()
    if not args.pairs:
        obj.pop("pairs")
    _emit_json(obj, args.out)
    return EXIT_OK


def cmd_theory(args) -> int:
    _emit_json(theory.theory_report(args.N, args.m, args.epsilon, args.delta, args.c,
                                    args.n, args.k, args.C), args.out)
    return EXIT_OK


def cmd_poisson_check(args) -> int:
    thresholds = args.threshold or [None]
    reports = []
    for t in thresholds:
        event = poissonization.named_event(args.event, args.N, args.m, args.epsilon, t)
        rep = poissonization.poissonization_check(event, args.N, args.m, args.trials, args.seed)
        reports.append({"event": args.event, "threshold": t, "epsilon": args.epsilon,
                        **rep.to_json()})
    _emit_json({"reports": reports, "all_hold": all(r["holds"] for r in reports)}, args.out)
    return EXIT_OK


def cmd_tv(args) -> int:
    P, Q = load_distribution(args.first), load_distribution(args.second)
    if isinstance(P, ProductDistribution) and isinstance(Q, ProductDistribution):
        bound = tv_product_upper_bound(P, Q)
        if args.bound:
            result = {"tv_upper_bound": bound}
        else:
            result = {"tv": tv_product_exact(P, Q), "tv_upper_bound": bound}
    else:
        P = P.to_dense() if isinstance(P, ProductDistribution) else P
        Q = Q.to_dense() if isinstance(Q, ProductDistribution) else Q
        result = {"tv": tv_dense(P, Q)}
    _emit_json(result, args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.dist:
        dist = load_distribution(args.dist)
        if isinstance(dist, DenseDistribution):
            raise experiments.ConfigError("sampling needs a product distribution")
    elif args.n and args.k:
        dist = uniform_product(SpaceSpec.uniform(args.n, args.k))
    else:
        raise experiments.ConfigError("give --dist or both --n and --k")
    S = draw_samples(dist, args.m, args.seed)
    lines = [",".join(f"x{j}" for j in range(dist.n))]
    lines += [",".join(str(c) for c in row) for row in S.array.tolist()]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_scaling(args) -> int:
    rows = experiments.scaling_study(args.ns, args.k, args.epsilon, args.delta, args.trials,
                                     args.seed, threads=args.threads,
                                     per_octave=args.per_octave)
    _emit_json(rows, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prodlearn",
        description="ERM vs product-ERM density estimation experiments on finite product spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="Monte Carlo success rate over a grid of sample sizes (CSV)")
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("crossover", help="smallest grid m reaching confidence 1 - delta (JSON)")
    _add_sweep_flags(p)
    p.add_argument("--delta", type=float, default=0.1)
    p.set_defaults(func=cmd_crossover)

    p = sub.add_parser("gap", help="paired emp/pemp TV on identical samples (JSON)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--target")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--pairs", action="store_true", help="include per-trial TV pairs")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("theory", help="evaluate every constant and bound (JSON)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--c", type=float, default=0.016)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("poisson-check", help="compare exact-m and Poissonized event rates (JSON)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--event", choices=("discrepancy", "max-load", "total"), default="discrepancy")
    p.add_argument("--threshold", type=_int_list, help="comma-separated thresholds")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_poisson_check)

    p = sub.add_parser("tv", help="TV distance between two distribution files (JSON)")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--bound", action="store_true", help="products only: skip enumeration")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tv)

    p = sub.add_parser("sample", help="draw i.i.d. samples (CSV of coordinates)")
    p.add_argument("--dist")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("scaling", help="emp vs pemp crossover as n grows (JSON)")
    p.add_argument("--ns", type=_int_list, default=[2, 3, 4, 5, 6])
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--per-octave", type=int, default=2, help="grid points per doubling of m")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scaling)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EnumerationUnsupported as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENUMERATION
    except (ProdLearnError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
