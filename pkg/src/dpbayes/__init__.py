"""Differentially private counting queries, and what a Bayes corrector recovers.

The package answers counting queries under epsilon-differential privacy with
Laplace output perturbation, applies a posterior-mean correction that an
analyst holding the population model (n, p) could compute from a single
noisy response, and ships a Monte Carlo harness comparing the corrected and
raw estimators across privacy levels.
"""

from .estimators import (
    EstimateReport,
    bayes_estimate,
    bayes_estimate_batch,
    estimate_report,
    naive_estimate,
    posterior,
)
from .mechanism import (
    OutOfRangeBounds,
    OutOfRangeReport,
    PrivacyLevel,
    calibrate,
    dp_ratio_check,
    laplace_density,
    out_of_range_bounds,
    out_of_range_probability,
    sample_noise,
)
from .prior import (
    BinomialPrior,
    log_mass,
    log_mass_vector,
    sample_true_count,
    uncertainty_widths,
)
from .querydb import (
    Predicate,
    QueryResult,
    RecordSet,
    count_query,
    load_records,
    noisy_count_query,
    public_answer,
)
from .simulation import (
    CellFailure,
    CellResult,
    SweepConfig,
    SweepResult,
    analytic_naive_error,
    run_cell,
    run_stream,
    run_sweep,
    shard_ranges,
    write_csv,
)

__all__ = [
    "BinomialPrior",
    "CellFailure",
    "CellResult",
    "EstimateReport",
    "OutOfRangeBounds",
    "OutOfRangeReport",
    "Predicate",
    "PrivacyLevel",
    "QueryResult",
    "RecordSet",
    "SweepConfig",
    "SweepResult",
    "analytic_naive_error",
    "bayes_estimate",
    "bayes_estimate_batch",
    "calibrate",
    "count_query",
    "dp_ratio_check",
    "estimate_report",
    "laplace_density",
    "load_records",
    "log_mass",
    "log_mass_vector",
    "naive_estimate",
    "noisy_count_query",
    "out_of_range_bounds",
    "out_of_range_probability",
    "posterior",
    "public_answer",
    "run_cell",
    "run_stream",
    "run_sweep",
    "sample_noise",
    "sample_true_count",
    "shard_ranges",
    "uncertainty_widths",
    "write_csv",
]
