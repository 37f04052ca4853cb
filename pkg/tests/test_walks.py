"""Tests for the variable-speed random walk and its Monte-Carlo oracles."""

import logging
import math

import numpy as np
import pytest

from percolated_gff.cluster import ClusterGeometry, largest_cluster
from percolated_gff.environment import parse_law, sample_environment
from percolated_gff.errors import ConfigError, EmptyClusterError
from percolated_gff.green import build_killed_operator, solve_green
from percolated_gff.rng import CounterStream
from percolated_gff.walks import _jump_slots, calibrate_sigma, mc_green_oracle, run_walkers

BLOCK = [[i, j] for i in range(3) for j in range(3)]


class TestGreenOracle:
    """Test the occupation-time estimate of the Green's function."""

    def test_agrees_with_solver(self, full_geom: ClusterGeometry) -> None:
        """Test agreement with the linear solve within four standard errors."""
        op = build_killed_operator(full_geom, BLOCK)
        green = solve_green(op)
        result = mc_green_oracle(op, (1, 1), (1, 2), walkers=4000, seed=2)
        assert abs(result.estimate - green.entry((1, 1), (1, 2))) < 4 * result.stderr
        assert not result.flagged

    def test_horizon_flagged(
        self, full_geom: ClusterGeometry, caplog: pytest.LogCaptureFixture
    ) -> None:
        """Test that a short horizon is flagged and logged."""
        op = build_killed_operator(full_geom, BLOCK)
        with caplog.at_level(logging.WARNING, logger="percolated_gff.walks"):
            result = mc_green_oracle(op, (1, 1), (1, 1), walkers=500, horizon=0.05)
        assert result.flagged
        assert result.truncated_fraction > 0.5
        assert "horizon" in caplog.text

    def test_no_walkers(self, full_geom: ClusterGeometry) -> None:
        """Test that zero walkers are rejected."""
        op = build_killed_operator(full_geom, [[0, 0]])
        with pytest.raises(ConfigError):
            mc_green_oracle(op, (0, 0), (0, 0), walkers=0)

    def test_single_site_holding_time(self, full_geom: ClusterGeometry) -> None:
        """Test that the occupation of {0} is one Exp(4) holding time."""
        op = build_killed_operator(full_geom, [[0, 0]])
        result = mc_green_oracle(op, (0, 0), (0, 0), walkers=4000, seed=1)
        assert abs(result.estimate - 0.25) < 3 * result.stderr
        assert result.truncated_fraction == 0.0

    def test_start_outside(self, full_geom: ClusterGeometry) -> None:
        """Test that walkers must start inside the domain."""
        op = build_killed_operator(full_geom, [[0, 0]])
        with pytest.raises(ConfigError):
            mc_green_oracle(op, (5, 5), (0, 0), walkers=10)

    def test_target_outside(self, full_geom: ClusterGeometry) -> None:
        """Test that a target off the domain has occupation exactly zero."""
        op = build_killed_operator(full_geom, [[0, 0]])
        result = mc_green_oracle(op, (0, 0), (3, 3), walkers=10)
        assert result.estimate == 0.0
        assert result.stderr == 0.0


class TestRunWalkers:
    """Test batches of walkers."""

    def test_independent_of_threads(self, full_geom: ClusterGeometry) -> None:
        """Test that chunking across threads does not change any path."""
        starts = np.full(5000, full_geom.row_of((0, 0)), dtype=np.int64)
        stream = CounterStream(9, "walk/test")
        single = run_walkers(full_geom, starts, stream, horizon=3.0, threads=1)
        pooled = run_walkers(full_geom, starts, stream, horizon=3.0, threads=2)
        assert np.array_equal(single.positions, pooled.positions)
        assert np.array_equal(single.truncated, pooled.truncated)

    def test_jump_slot_stays_on_open_edges(self, percolated_geom: ClusterGeometry) -> None:
        """Test that a draw at the full rate never selects a padded neighbour slot."""
        cumulative = np.array([[1.0, 2.0, 2.0, 2.0], [0.0, 1.0, 1.0, 3.0]])
        assert _jump_slots(cumulative, np.array([2.0, 3.0])).tolist() == [1, 3]
        assert _jump_slots(cumulative, np.array([2.0 + 1e-15, 3.5])).tolist() == [1, 3]
        assert _jump_slots(cumulative, np.array([0.5, 0.5])).tolist() == [0, 1]
        starts = np.arange(percolated_geom.size, dtype=np.int64)
        outcome = run_walkers(
            percolated_geom, starts, CounterStream(4, "walk/test"), horizon=5.0
        )
        assert np.all((outcome.positions >= 0) & (outcome.positions < percolated_geom.size))

    def test_unkilled_needs_horizon(self, full_geom: ClusterGeometry) -> None:
        """Test that an unkilled walk without a horizon is rejected."""
        starts = np.zeros(3, dtype=np.int64)
        with pytest.raises(ConfigError):
            run_walkers(full_geom, starts, CounterStream(0, "walk/test"))


class TestCalibrateSigma:
    """Test the diffusion-matrix calibration."""

    def test_empty_ensemble(self) -> None:
        """Test that an empty ensemble is rejected."""
        with pytest.raises(EmptyClusterError):
            calibrate_sigma([], n=4)

    def test_full_lattice(self) -> None:
        """Test that p = 1 gives Sigma^2 = 2I within four standard errors."""
        geom = largest_cluster(sample_environment(parse_law("bernoulli:p=1"), 2, 40))
        estimate = calibrate_sigma([geom], n=6, walkers=2000, seed=4)
        error = np.abs(estimate.matrix - 2.0 * np.eye(2))
        assert np.all(error < 4 * estimate.stderr + 1e-12)
        assert estimate.samples == 2000
        assert math.isfinite(float(estimate.matrix.sum()))
