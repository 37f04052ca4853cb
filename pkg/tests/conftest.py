"""
Shared pytest fixtures.

Environments here are small enough for dense solves; the scale-12 Green's
operator is the workhorse of the Wick and smeared-field tests.
"""

from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from percolated_gff.cluster import ClusterGeometry, largest_cluster
from percolated_gff.domain import ScaledDomain
from percolated_gff.environment import (
    Environment,
    EnvironmentLaw,
    edge_shapes,
    parse_law,
    sample_environment,
)
from percolated_gff.green import GreenOperator, build_killed_operator, solve_green


@pytest.fixture(scope="session")
def full_geom() -> ClusterGeometry:
    """
    Cluster of the fully open lattice on ``[-10, 10]^2``.

    Returns:
        ClusterGeometry: Geometry with ``theta0_hat == 1``
    """
    env = sample_environment(parse_law("bernoulli:p=1"), 2, 10)
    return largest_cluster(env)


@pytest.fixture(scope="session")
def green12(full_geom: ClusterGeometry) -> GreenOperator:
    """
    Green's operator of the scale-12 domain on the fully open lattice.

    Returns:
        GreenOperator: Solved operator with 121 rows
    """
    op = build_killed_operator(full_geom, ScaledDomain(12))
    return solve_green(op)


@pytest.fixture
def make_env() -> Callable[[int, dict[tuple[int, tuple[int, ...]], float]], Environment]:
    """
    Factory fixture for hand-built environments with every edge closed.

    Returns:
        Callable: ``make(L, opened)`` where ``opened`` maps ``(axis, low index)``
        to a conductance
    """

    def make(L: int, opened: dict[tuple[int, tuple[int, ...]], float]) -> Environment:
        weights = [np.zeros(shape) for shape in edge_shapes(2, L)]
        for (axis, index), value in opened.items():
            weights[axis][index] = value
        return Environment(2, L, tuple(weights), EnvironmentLaw())

    return make


@pytest.fixture(scope="session")
def percolated_geom() -> ClusterGeometry:
    """
    Largest cluster of a supercritical ``p = 0.7`` environment on ``[-12, 12]^2``.

    Returns:
        ClusterGeometry: Geometry of a genuinely random cluster
    """
    env = sample_environment(parse_law("bernoulli:p=0.7").with_seed(3), 2, 12)
    return largest_cluster(env)


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[str], Path]:
    """
    Factory fixture for experiment configuration files.

    Returns:
        Callable: Writes the given text to ``run.cfg`` and returns its path
    """

    def write(text: str) -> Path:
        path = tmp_path / "run.cfg"
        path.write_text(text, encoding="utf-8")
        return path

    return write
