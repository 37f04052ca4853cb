"""Tests for importance reweighting towards the Gibbs measure."""

import math
from typing import Callable

import numpy as np
import pytest

from percolated_gff.cluster import largest_cluster
from percolated_gff.domain import ScaledDomain
from percolated_gff.environment import Environment
from percolated_gff.errors import ConfigError
from percolated_gff.field import FieldSample, sample_dgff
from percolated_gff.green import GreenOperator, build_killed_operator, solve_green
from percolated_gff.wick import TestFunction, exp_function, gibbs_reweight

CENTRE = TestFunction("box", (0.25, 0.25, 0.75, 0.75))


def _first_value(field: FieldSample) -> float:
    return float(field.values[0])


def _mass(field: FieldSample) -> float:
    return float(field.values.sum()) / 9.0


class TestGibbsReweight:
    """Test self-normalised reweighting with the exponential interaction."""

    def test_free_limit(self, green12: GreenOperator) -> None:
        """Test that gamma = 0 gives equal weights and the free-field mean."""
        fields = sample_dgff(green12.op, 50, seed=1)
        result = gibbs_reweight(fields, green12, exp_function(), 0.0, CENTRE, _first_value)
        assert result.estimate == pytest.approx(result.free_mean)
        assert result.ess == pytest.approx(50.0)

    def test_too_few_replicas(self, green12: GreenOperator) -> None:
        """Test that a single replica is rejected."""
        fields = sample_dgff(green12.op, 1)
        with pytest.raises(ConfigError):
            gibbs_reweight(fields, green12, exp_function(), 0.5, CENTRE, _first_value)

    def test_two_site_quadrature(self, make_env: Callable[..., Environment]) -> None:
        """Test the exponential interaction against a two-site Gibbs integral.

        The killed chain ``(-1,0) - (0,0) - (1,0) - (2,0)`` leaves two sites in
        the scale-3 domain with ``g = [[2, 1], [1, 2]] / 3``. Repulsion pushes
        the mean of ``<Phi, 1>`` below zero.
        """
        env = make_env(3, {(0, (2, 3)): 1.0, (0, (3, 3)): 1.0, (0, (4, 3)): 1.0})
        green = solve_green(build_killed_operator(largest_cluster(env), ScaledDomain(3)))
        assert np.allclose(green.kernel, np.array([[2.0, 1.0], [1.0, 2.0]]) / 3.0)
        gamma, cell = 0.5, 1.0 / 9.0

        nodes, weights = np.polynomial.hermite_e.hermegauss(60)
        weights = weights / math.sqrt(2.0 * math.pi)
        xi = np.stack(np.meshgrid(nodes, nodes, indexing="ij"), axis=-1).reshape(-1, 2)
        mass = np.outer(weights, weights).ravel()
        phi = xi @ np.linalg.cholesky(green.kernel).T
        energy = cell * np.exp(gamma * phi - 0.5 * gamma**2 * np.diag(green.kernel)).sum(axis=1)
        density = mass * np.exp(-energy)
        exact = float(np.sum(density * cell * phi.sum(axis=1)) / density.sum())
        assert exact < 0

        fields = sample_dgff(green.op, 20000, seed=11)
        result = gibbs_reweight(fields, green, exp_function(), gamma, TestFunction("one"), _mass)
        values = np.array([_mass(f) for f in fields])
        w = result.weights / result.weights.sum()
        stderr = math.sqrt(float(np.sum(w**2 * (values - result.estimate) ** 2)))
        assert result.estimate < 0
        assert abs(result.estimate - exact) < 4 * stderr

    def test_weights_in_unit_interval(self, green12: GreenOperator) -> None:
        """Test that a positive interaction with g >= 0 keeps every weight in (0, 1]."""
        fields = sample_dgff(green12.op, 200, seed=2)
        result = gibbs_reweight(
            fields, green12, exp_function(), 0.5, TestFunction("one"), _first_value
        )
        assert np.all(result.weights > 0)
        assert np.all(result.weights <= 1)
        assert 1.0 <= result.ess <= 200.0
