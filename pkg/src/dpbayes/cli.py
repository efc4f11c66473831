"""Command line: Monte Carlo sweeps, noisy queries, closed-form analytics.

Exit codes: 0 on success, 2 on usage or input errors (bad flags, bad
predicate, missing or malformed data file), 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .estimators import bayes_estimate
from .mechanism import calibrate, out_of_range_bounds, out_of_range_probability
from .prior import BinomialPrior, uncertainty_widths
from .querydb import Predicate, load_records, noisy_count_query, public_answer
from .simulation import (
    DEFAULT_EPSILON_VALUES,
    DEFAULT_N_VALUES,
    DEFAULT_P_VALUES,
    DEFAULT_RUNS,
    SweepConfig,
    run_sweep,
    write_csv,
)

SEED_ENV_VAR = "DPBAYES_SEED"


class _MedianStream:
    """Noise hook for tests: every uniform is 0.5, so every Laplace draw is 0."""

    def random(self) -> float:
        return 0.5


def _resolve_seed(flag_value, default=None):
    # Precedence: explicit flag, then the environment, then the default.
    if flag_value is not None:
        return flag_value
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return default


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpbayes",
        description="Differentially private counting queries and estimator studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run the Monte Carlo estimator-comparison grid")
    sweep.add_argument("--n", type=int, nargs="+", default=None,
                       help=f"database sizes (default: {list(DEFAULT_N_VALUES)})")
    sweep.add_argument("--p", type=float, nargs="+", default=None,
                       help=f"match probabilities (default: {list(DEFAULT_P_VALUES)})")
    sweep.add_argument("--eps", type=float, nargs="+", default=None,
                       help=f"privacy levels (default: {list(DEFAULT_EPSILON_VALUES)})")
    sweep.add_argument("--runs", type=int, default=None,
                       help=f"Monte Carlo runs per cell (default: {DEFAULT_RUNS})")
    sweep.add_argument("--seed", type=int, default=None,
                       help=f"base seed (default: ${SEED_ENV_VAR} or 0)")
    sweep.add_argument("--shards", type=int, default=None,
                       help="contiguous run blocks; never changes results (default: 1)")
    sweep.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    sweep.add_argument("--config", default=None,
                       help="JSON file with sweep settings; explicit flags win")

    query = sub.add_parser("query", help="answer one noisy counting query over a CSV file")
    query.add_argument("--data", required=True, help="CSV file, header row first")
    query.add_argument("--where", required=True,
                       help="predicate: 'field equals V', 'field not-equals V', "
                            "or 'field in-set V1,V2,...'")
    query.add_argument("--eps", type=float, required=True, help="privacy level")
    query.add_argument("--seed", type=int, default=None,
                       help=f"noise seed (default: ${SEED_ENV_VAR} or OS entropy)")
    query.add_argument("--estimate", action="store_true",
                       help="also print the posterior-mean correction (needs --p)")
    query.add_argument("--p", type=float, default=None,
                       help="assumed per-record match probability for --estimate")
    query.add_argument("--n-known", type=int, default=None,
                       help="database size assumed by the corrector "
                            "(default: the loaded row count)")
    query.add_argument("--noise-hook", choices=["median"], default=None, help=argparse.SUPPRESS)

    analyze = sub.add_parser("analyze", help="closed-form out-of-range and width reports")
    analyze.add_argument("--n", type=int, required=True, help="database size")
    analyze.add_argument("--eps", type=float, required=True, help="privacy level")
    analyze.add_argument("--p", type=float, default=None,
                         help="match probability (needed by --widths)")
    analyze.add_argument("--a", type=int, default=None,
                         help="true count to report the out-of-range probability for")
    analyze.add_argument("--widths", action="store_true",
                         help="compare population and noise 1-sigma interval widths")
    analyze.add_argument("--bounds", action="store_true",
                         help="report extremes of the out-of-range probability")
    return parser


_SWEEP_CONFIG_KEYS = ("n_values", "p_values", "epsilon_values", "runs", "seed", "shards")


def _load_sweep_file(path: str) -> dict:
    with open(path) as stream:
        loaded = json.load(stream)
    if not isinstance(loaded, dict):
        raise ValueError(f"sweep config must be a JSON object, got {type(loaded).__name__}")
    unknown = set(loaded) - set(_SWEEP_CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
    for key in ("n_values", "p_values", "epsilon_values"):
        if key in loaded and not isinstance(loaded[key], list):
            raise ValueError(f"sweep config {key} must be a list")
    return loaded


def cmd_sweep(args) -> int:
    stored = _load_sweep_file(args.config) if args.config is not None else {}

    def pick(flag_value, key, fallback):
        if flag_value is not None:
            return flag_value
        return stored.get(key, fallback)

    # Seed precedence: flag, then config file, then the environment, then 0.
    if args.seed is not None:
        seed = args.seed
    elif "seed" in stored:
        seed = stored["seed"]
    else:
        seed = _resolve_seed(None, default=0)
    config = SweepConfig(
        n_values=tuple(pick(args.n, "n_values", DEFAULT_N_VALUES)),
        p_values=tuple(pick(args.p, "p_values", DEFAULT_P_VALUES)),
        epsilon_values=tuple(pick(args.eps, "epsilon_values", DEFAULT_EPSILON_VALUES)),
        runs=pick(args.runs, "runs", DEFAULT_RUNS),
        seed=seed,
        shards=pick(args.shards, "shards", 1),
    )
    result = run_sweep(config)
    if args.out is not None:
        with open(args.out, "w", newline="") as stream:
            write_csv(result, stream)
    else:
        write_csv(result, sys.stdout)
    if result.failures:
        for failure in result.failures:
            print(
                f"cell failed: n={failure.n} p={failure.p} eps={failure.epsilon}: "
                f"{failure.message}",
                file=sys.stderr,
            )
        return 1
    return 0


def cmd_query(args) -> int:
    level = calibrate(args.eps)
    pred = Predicate.parse(args.where)
    with open(args.data, newline="") as stream:
        db = load_records(stream)
    if args.noise_hook == "median":
        rng = _MedianStream()
    else:
        seed = _resolve_seed(args.seed)
        rng = np.random.default_rng(seed)
    result = noisy_count_query(db, pred, level, rng)
    print(public_answer(result))
    if args.estimate:
        if args.p is None:
            raise ValueError("--estimate requires --p")
        n_known = args.n_known if args.n_known is not None else db.size
        prior = BinomialPrior(n=n_known, p=args.p)
        corrected = bayes_estimate(prior, level, result.noisy_value)
        print(json.dumps({"bayes_estimate": corrected, "n": prior.n, "p": prior.p}))
    return 0


def cmd_analyze(args) -> int:
    level = calibrate(args.eps)
    printed = False
    if args.widths:
        if args.p is None:
            raise ValueError("--widths requires --p")
        prior = BinomialPrior(n=args.n, p=args.p)
        binomial_width, laplace_width = uncertainty_widths(prior, level)
        print(f"binomial 1-sigma interval width: {binomial_width:.4f}")
        print(f"laplace 1-sigma interval width:  {laplace_width:.4f}")
        printed = True
    if args.bounds:
        bounds = out_of_range_bounds(args.n, level)
        print(
            f"max out-of-range probability: {bounds.max_prob:.7f} "
            f"at a in {sorted(bounds.argmax)}"
        )
        print(
            f"min out-of-range probability: {bounds.min_prob:.7g} "
            f"at a in {sorted(bounds.argmin)}"
        )
        printed = True
    if args.a is not None:
        report = out_of_range_probability(args.a, args.n, level)
        print(
            f"P(out of range | a={report.true_count}, n={report.db_size}, "
            f"eps={level.epsilon}) = {report.probability:.7g}"
        )
        printed = True
    if not printed:
        # No selector given: print a small table over quartile counts.
        print("a,out_of_range_probability")
        for a in sorted({0, args.n // 4, args.n // 2, (3 * args.n) // 4, args.n}):
            report = out_of_range_probability(a, args.n, level)
            print(f"{a},{report.probability:.7g}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "query":
            return cmd_query(args)
        return cmd_analyze(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure, not a usage problem
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
