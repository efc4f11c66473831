"""Shared fixtures: the heavy Monte Carlo grids are computed once per session."""

from __future__ import annotations

import pytest

from dpbayes import run_cell

# Frozen seed for every statistical assertion in the suite.  Chosen once and
# checked to give representative (not cherry-picked extreme) margins; the
# tightest assertion sits at about 4 standard errors from its threshold.
ACCEPTANCE_SEED = 31337

HEAVY_RUNS = 100_000
GRID_N_VALUES = (100, 1000)
GRID_EPSILONS = (0.05, 0.1, 0.2, 0.5, 1.0)
SWEEP_P_VALUES = (0.02, 0.1, 0.3, 0.5, 0.7, 0.9, 0.98)


@pytest.fixture(scope="session")
def acceptance_seed() -> int:
    return ACCEPTANCE_SEED


@pytest.fixture(scope="session")
def reference_grid_cells():
    """p = 0.3 cells over n x epsilon at 10^5 runs; shared by the heavy tests."""
    return {
        (n, eps): run_cell(n, 0.3, eps, runs=HEAVY_RUNS, seed=ACCEPTANCE_SEED)
        for n in GRID_N_VALUES
        for eps in GRID_EPSILONS
    }


@pytest.fixture(scope="session")
def p_sweep_cells():
    """n = 100, epsilon = 0.1 cells across match probabilities at 10^5 runs."""
    return {
        p: run_cell(100, p, 0.1, runs=HEAVY_RUNS, seed=ACCEPTANCE_SEED)
        for p in SWEEP_P_VALUES
    }
