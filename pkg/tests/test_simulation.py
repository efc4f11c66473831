"""Monte Carlo harness: determinism, CSV schema, and error metrics."""

from __future__ import annotations

import io
import math

import numpy as np
import pytest

import dpbayes.simulation as simulation_module
from dpbayes import (
    CellResult,
    SweepConfig,
    analytic_naive_error,
    calibrate,
    run_cell,
    run_stream,
    run_sweep,
    sample_noise,
    shard_ranges,
    write_csv,
)
from dpbayes.simulation import CSV_HEADER


class TestRunStream:
    def test_same_key_same_stream(self):
        assert run_stream(7, 3).random(4).tolist() == run_stream(7, 3).random(4).tolist()

    def test_distinct_runs_distinct_streams(self):
        a = run_stream(7, 3).random(4)
        b = run_stream(7, 4).random(4)
        assert not np.array_equal(a, b)

    def test_distinct_seeds_distinct_streams(self):
        a = run_stream(7, 3).random(4)
        b = run_stream(8, 3).random(4)
        assert not np.array_equal(a, b)

    def test_accepts_huge_and_negative_seeds(self):
        run_stream(2**70 + 5, 0).random()
        run_stream(-1, 0).random()


class TestShardRanges:
    @pytest.mark.parametrize("runs, shards", [(10, 1), (10, 3), (7, 7), (5, 8), (100, 4)])
    def test_partitions_exactly(self, runs, shards):
        ranges = shard_ranges(runs, shards)
        assert len(ranges) == shards
        covered = [i for lo, hi in ranges for i in range(lo, hi)]
        assert covered == list(range(runs))

    def test_balanced(self):
        sizes = [hi - lo for lo, hi in shard_ranges(10, 3)]
        assert sorted(sizes) == [3, 3, 4]


class TestAnalyticNaiveError:
    @pytest.mark.parametrize("epsilon, expected", [(0.1, 10.0), (0.5, 2.0), (1.0, 1.0)])
    def test_closed_form(self, epsilon, expected):
        assert analytic_naive_error(calibrate(epsilon)) == pytest.approx(expected, rel=1e-15)

    def test_monte_carlo_agreement(self):
        level = calibrate(0.1)
        rng = np.random.default_rng(777)
        draws = np.abs([sample_noise(level, rng) for _ in range(1_000_000)])
        assert np.mean(draws) == pytest.approx(analytic_naive_error(level), rel=0.01)


class TestRunCell:
    def test_smoke(self):
        cell = run_cell(100, 0.3, 0.5, runs=500, seed=1)
        assert isinstance(cell, CellResult)
        assert cell.runs == 500
        assert cell.avg_err_naive > 0.0
        assert cell.avg_err_bayes > 0.0
        assert 0.0 <= cell.prob_bayes_better <= 1.0
        assert cell.avg_err_naive_analytic == 2.0
        assert cell.noise_std == pytest.approx(math.sqrt(2.0) / 0.5, rel=1e-12)
        assert cell.se_naive > 0.0 and cell.se_bayes > 0.0

    def test_probability_shares_sum_to_one(self):
        cell = run_cell(100, 0.3, 0.5, runs=2_000, seed=3)
        total = cell.prob_bayes_better + cell.prob_naive_better + cell.ties / cell.runs
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_deterministic(self):
        first = run_cell(100, 0.3, 0.1, runs=1_000, seed=42)
        second = run_cell(100, 0.3, 0.1, runs=1_000, seed=42)
        assert first == second

    @pytest.mark.parametrize("shards", [2, 3, 8, 1000, 1001])
    def test_bitwise_shard_independence(self, shards):
        baseline = run_cell(100, 0.3, 0.1, runs=1_000, seed=42)
        assert run_cell(100, 0.3, 0.1, runs=1_000, seed=42, shards=shards) == baseline

    def test_seed_changes_results(self):
        a = run_cell(100, 0.3, 0.1, runs=1_000, seed=1)
        b = run_cell(100, 0.3, 0.1, runs=1_000, seed=2)
        assert a.avg_err_naive != b.avg_err_naive

    def test_common_random_numbers_across_cells(self):
        # Run r consumes n uniforms for the count and then one for the noise,
        # so at fixed n two cells with different p draw identical noise and
        # the naive error (which is just |noise|) matches bitwise.
        a = run_cell(100, 0.0, 0.1, runs=200, seed=9)
        b = run_cell(100, 0.3, 0.1, runs=200, seed=9)
        assert a.avg_err_naive == b.avg_err_naive
        shifted = run_cell(1000, 0.0, 0.1, runs=200, seed=9)
        assert a.avg_err_naive != shifted.avg_err_naive

    def test_rejects_bad_runs(self):
        with pytest.raises(ValueError):
            run_cell(100, 0.3, 0.1, runs=0, seed=1)

    def test_aborting_cell_names_run_index(self, monkeypatch):
        def broken(prior, level, ys):
            raise FloatingPointError("posterior normalisation degenerated at row 17")

        monkeypatch.setattr(simulation_module, "bayes_estimate_batch", broken)
        with pytest.raises(FloatingPointError, match="row 17"):
            run_cell(100, 0.3, 0.1, runs=50, seed=1)


class TestRunSweep:
    def test_grid_order_and_size(self):
        config = SweepConfig(
            n_values=(100,),
            p_values=(0.1, 0.5),
            epsilon_values=(0.5, 1.0, 2.0),
            runs=200,
            seed=5,
        )
        result = run_sweep(config)
        assert len(result.cells) == 6
        assert [(c.p, c.epsilon) for c in result.cells] == [
            (0.1, 0.5), (0.1, 1.0), (0.1, 2.0), (0.5, 0.5), (0.5, 1.0), (0.5, 2.0),
        ]
        assert result.failures == ()

    def test_failures_do_not_stop_the_sweep(self, monkeypatch):
        real_run_cell = simulation_module.run_cell

        def flaky(n, p, epsilon, runs, seed, shards=1):
            if epsilon == 1.0:
                raise FloatingPointError("boom at row 3")
            return real_run_cell(n, p, epsilon, runs, seed, shards=shards)

        monkeypatch.setattr(simulation_module, "run_cell", flaky)
        config = SweepConfig(
            n_values=(100,), p_values=(0.3,), epsilon_values=(0.5, 1.0, 2.0), runs=100, seed=1
        )
        result = run_sweep(config)
        assert len(result.cells) == 2
        assert len(result.failures) == 1
        assert result.failures[0].epsilon == 1.0
        assert "row 3" in result.failures[0].message

    def test_default_grid_shape(self):
        config = SweepConfig()
        assert len(config.n_values) * len(config.p_values) * len(config.epsilon_values) == 84
        assert config.runs == 100_000

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n_values": ()},
            {"p_values": ()},
            {"epsilon_values": ()},
            {"runs": 0},
            {"shards": 0},
        ],
    )
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            SweepConfig(**kwargs)


class TestWriteCsv:
    def make_result(self, shards=1):
        config = SweepConfig(
            n_values=(100,), p_values=(0.3,), epsilon_values=(0.5, 1.0),
            runs=300, seed=8, shards=shards,
        )
        return run_sweep(config)

    def test_header_and_shape(self):
        buffer = io.StringIO()
        write_csv(self.make_result(), buffer)
        lines = buffer.getvalue().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[0] == (
            "n,p,epsilon,noise_std,avg_err_naive,avg_err_naive_analytic,"
            "avg_err_bayes,prob_bayes_better,se_naive,se_bayes,runs,seed"
        )
        assert len(lines) == 3
        for line in lines[1:]:
            assert len(line.split(",")) == len(CSV_HEADER)

    def test_round_trips_full_precision(self):
        result = self.make_result()
        buffer = io.StringIO()
        write_csv(result, buffer)
        row = buffer.getvalue().splitlines()[1].split(",")
        cell = result.cells[0]
        assert int(row[0]) == cell.n
        assert float(row[4]) == cell.avg_err_naive
        assert float(row[7]) == cell.prob_bayes_better
        assert int(row[10]) == cell.runs
        assert int(row[11]) == cell.seed

    def test_identical_bytes_across_shardings(self):
        one = io.StringIO()
        write_csv(self.make_result(shards=1), one)
        eight = io.StringIO()
        write_csv(self.make_result(shards=8), eight)
        assert one.getvalue() == eight.getvalue()


class TestHeavyGridShape:
    """Statistical shape of the heavy grids (session-scoped fixtures)."""

    def test_no_ties_at_scale(self, reference_grid_cells):
        assert all(cell.ties == 0 for cell in reference_grid_cells.values())

    def test_bayes_error_decreases_with_weaker_privacy(self, reference_grid_cells):
        for n in (100, 1000):
            errors = [reference_grid_cells[(n, eps)].avg_err_bayes for eps in (0.05, 0.1, 0.2, 0.5, 1.0)]
            assert errors == sorted(errors, reverse=True)

    def test_bayes_never_loses_on_average(self, reference_grid_cells):
        for cell in reference_grid_cells.values():
            assert cell.avg_err_bayes <= cell.avg_err_naive

    def test_balanced_predicates_are_hardest(self, p_sweep_cells):
        # A tight prior (extreme p) makes the corrector nearly always closer,
        # so the improvement probability bottoms out at p = 1/2 while the
        # Bayes error peaks there.
        centre = p_sweep_cells[0.5]
        assert centre.prob_bayes_better == min(
            cell.prob_bayes_better for cell in p_sweep_cells.values()
        )
        for p, cell in p_sweep_cells.items():
            if p != 0.5:
                assert cell.avg_err_bayes < centre.avg_err_bayes
