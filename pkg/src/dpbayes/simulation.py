"""Monte Carlo comparison of the naive and posterior-mean estimators.

Each run draws a true count from the binomial population model, perturbs it
with calibrated Laplace noise, and scores both estimators by absolute error.
Every run owns a counter-based random stream keyed by ``(seed, run_index)``,
so results are bitwise identical however the run range is partitioned into
shards, and runs are shared across grid cells (common random numbers) to
keep cross-cell comparisons smooth.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .estimators import bayes_estimate_batch
from .mechanism import PrivacyLevel, calibrate, sample_noise
from .prior import BinomialPrior, sample_true_count

__all__ = [
    "DEFAULT_N_VALUES",
    "DEFAULT_P_VALUES",
    "DEFAULT_EPSILON_VALUES",
    "DEFAULT_RUNS",
    "CSV_HEADER",
    "SweepConfig",
    "CellResult",
    "CellFailure",
    "SweepResult",
    "run_stream",
    "shard_ranges",
    "analytic_naive_error",
    "run_cell",
    "run_sweep",
    "write_csv",
]

DEFAULT_N_VALUES = (100, 1000)
DEFAULT_P_VALUES = (0.02, 0.1, 0.3, 0.5, 0.7, 0.9, 0.98)
DEFAULT_EPSILON_VALUES = (0.05, 0.1, 0.2, 0.5, 1.0, 2.0)
DEFAULT_RUNS = 100_000

CSV_HEADER = (
    "n",
    "p",
    "epsilon",
    "noise_std",
    "avg_err_naive",
    "avg_err_naive_analytic",
    "avg_err_bayes",
    "prob_bayes_better",
    "se_naive",
    "se_bayes",
    "runs",
    "seed",
)

_MASK64 = (1 << 64) - 1


def run_stream(seed: int, run_index: int) -> np.random.Generator:
    """Counter-based random stream for one run, keyed by (seed, run index).

    Streams for distinct run indices are independent, and a run's stream
    never depends on which shard or worker executes it.  Runs with the same
    index deliberately share a stream across grid cells, so cells are
    compared under common random numbers.
    """
    key = np.array([seed & _MASK64, run_index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SweepConfig:
    """Grid and reproducibility knobs for an estimator-comparison sweep."""

    n_values: tuple = DEFAULT_N_VALUES
    p_values: tuple = DEFAULT_P_VALUES
    epsilon_values: tuple = DEFAULT_EPSILON_VALUES
    runs: int = DEFAULT_RUNS
    seed: int = 0
    shards: int = 1

    def __post_init__(self) -> None:
        for name in ("n_values", "p_values", "epsilon_values"):
            values = tuple(getattr(self, name))
            if not values:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, values)
        if int(self.runs) < 1:
            raise ValueError(f"runs must be at least 1, got {self.runs!r}")
        if int(self.shards) < 1:
            raise ValueError(f"shards must be at least 1, got {self.shards!r}")
        object.__setattr__(self, "runs", int(self.runs))
        object.__setattr__(self, "shards", int(self.shards))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class CellResult:
    """Aggregated error metrics for one (n, p, epsilon) grid cell."""

    n: int
    p: float
    epsilon: float
    avg_err_naive: float
    avg_err_naive_analytic: float
    avg_err_bayes: float
    prob_bayes_better: float
    se_naive: float
    se_bayes: float
    ties: int
    runs: int
    seed: int

    @property
    def noise_std(self) -> float:
        return math.sqrt(2.0) / self.epsilon

    @property
    def prob_naive_better(self) -> float:
        """Complement share; ties count as better for neither side."""
        return 1.0 - self.prob_bayes_better - self.ties / self.runs


@dataclass(frozen=True)
class CellFailure:
    """One grid cell that aborted, with the error message (and run index when known)."""

    n: int
    p: float
    epsilon: float
    message: str


@dataclass(frozen=True)
class SweepResult:
    """All surviving cells of a sweep, in grid order, plus any failures."""

    config: SweepConfig
    cells: tuple
    failures: tuple = ()


def shard_ranges(runs: int, shards: int) -> list[tuple[int, int]]:
    """Contiguous balanced partition of the run range [0, runs) into shards.

    Always returns exactly ``shards`` ranges; some are empty when
    ``shards > runs``.  Which partition is chosen never affects results,
    because each run draws from its own stream.
    """
    base, extra = divmod(runs, shards)
    ranges = []
    lo = 0
    for index in range(shards):
        hi = lo + base + (1 if index < extra else 0)
        ranges.append((lo, hi))
        lo = hi
    return ranges


def analytic_naive_error(level: PrivacyLevel) -> float:
    """Expected absolute error 1/epsilon of the naive estimator.

    The naive error is the raw Laplace noise, whose mean absolute value is
    its scale ``b = 1/epsilon``.
    """
    return level.scale_b


def run_cell(n: int, p: float, epsilon: float, runs: int, seed: int, shards: int = 1) -> CellResult:
    """Simulate one grid cell.

    Per run: a fresh true count from the prior, one calibrated noise draw,
    then absolute errors of the raw response and of its posterior-mean
    correction.  Shards split the run range into contiguous blocks; because
    every run derives its own stream and the reduction happens in run
    order, the result is bitwise independent of the shard count.  Shard
    blocks touch no shared mutable state beyond disjoint slices of the
    preallocated arrays, so external callers may execute them in parallel.

    Raises:
        ValueError: on invalid population, privacy, or run parameters.
        FloatingPointError: naming the offending run if the posterior
            degenerates; the cell aborts rather than report partial sums.
    """
    prior = BinomialPrior(n=n, p=p)
    level = calibrate(epsilon)
    if int(runs) < 1:
        raise ValueError(f"runs must be at least 1, got {runs!r}")
    runs = int(runs)
    true_counts = np.empty(runs, dtype=np.float64)
    responses = np.empty(runs, dtype=np.float64)
    for lo, hi in shard_ranges(runs, shards):
        for run_index in range(lo, hi):
            stream = run_stream(seed, run_index)
            count = sample_true_count(prior, stream)
            true_counts[run_index] = count
            responses[run_index] = count + sample_noise(level, stream)
    try:
        corrected = bayes_estimate_batch(prior, level, responses)
    except FloatingPointError as exc:
        raise FloatingPointError(f"cell n={n} p={p} epsilon={epsilon}: {exc} (row = run index)") from exc
    err_naive = np.abs(responses - true_counts)
    err_bayes = np.abs(corrected - true_counts)
    better = int((err_bayes < err_naive).sum())
    ties = int((err_bayes == err_naive).sum())
    return CellResult(
        n=prior.n,
        p=prior.p,
        epsilon=level.epsilon,
        avg_err_naive=float(err_naive.mean()),
        avg_err_naive_analytic=analytic_naive_error(level),
        avg_err_bayes=float(err_bayes.mean()),
        prob_bayes_better=better / runs,
        se_naive=float(err_naive.std(ddof=1) / math.sqrt(runs)) if runs > 1 else float("nan"),
        se_bayes=float(err_bayes.std(ddof=1) / math.sqrt(runs)) if runs > 1 else float("nan"),
        ties=ties,
        runs=runs,
        seed=int(seed),
    )


def run_sweep(config: SweepConfig) -> SweepResult:
    """Evaluate every (n, p, epsilon) cell of the configured grid.

    Cell failures are collected, not fatal: the sweep continues and reports
    them alongside the surviving cells, which keep grid order (n outer,
    then p, then epsilon).
    """
    cells = []
    failures = []
    for n in config.n_values:
        for p in config.p_values:
            for epsilon in config.epsilon_values:
                try:
                    cells.append(
                        run_cell(n, p, epsilon, config.runs, config.seed, shards=config.shards)
                    )
                except Exception as exc:
                    failures.append(CellFailure(n=n, p=p, epsilon=epsilon, message=str(exc)))
    return SweepResult(config=config, cells=tuple(cells), failures=tuple(failures))


def write_csv(result: SweepResult, stream) -> None:
    """Emit one row per cell with the fixed column set.

    Floats are written with shortest round-trip precision and the line
    terminator is pinned, so equal results serialise to equal bytes.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for cell in result.cells:
        writer.writerow(
            [
                cell.n,
                cell.p,
                cell.epsilon,
                cell.noise_std,
                cell.avg_err_naive,
                cell.avg_err_naive_analytic,
                cell.avg_err_bayes,
                cell.prob_bayes_better,
                cell.se_naive,
                cell.se_bayes,
                cell.runs,
                cell.seed,
            ]
        )
