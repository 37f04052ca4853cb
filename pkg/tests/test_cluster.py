"""Tests for cluster extraction, chemical distances and the projection pi_n."""

from typing import Callable

import numpy as np
import pytest

from percolated_gff.cluster import (
    ClusterGeometry,
    UnionFind,
    chemical_ball,
    chemical_distance,
    largest_cluster,
    percolation_census,
    project_pi_n,
)
from percolated_gff.environment import Environment, parse_law, sample_environment
from percolated_gff.errors import EmptyClusterError

MakeEnv = Callable[[int, dict[tuple[int, tuple[int, ...]], float]], Environment]


class TestLargestCluster:
    """Test largest-cluster extraction."""

    def test_cluster_sites_are_sorted(self, percolated_geom: ClusterGeometry) -> None:
        """Test that cluster vertices are in lexicographic order."""
        order = np.lexsort(percolated_geom.vertices.T[::-1])
        assert np.array_equal(order, np.arange(percolated_geom.size))

    def test_empty_environment(self, make_env: MakeEnv) -> None:
        """Test that an environment without open edges has no cluster."""
        with pytest.raises(EmptyClusterError):
            largest_cluster(make_env(2, {}))

    def test_fully_open_box(self) -> None:
        """Test that p = 1 gives the whole box with density 1."""
        env = sample_environment(parse_law("bernoulli:p=1"), 2, 4)
        geom = largest_cluster(env)
        assert geom.size == 81
        assert geom.theta0_hat == 1.0

    def test_matches_union_find_census(self, percolated_geom: ClusterGeometry) -> None:
        """Test that the largest cluster size agrees with the union-find census."""
        census = percolation_census(percolated_geom.env)
        assert census[0] == percolated_geom.size
        assert sum(census) == percolated_geom.env.side**2

    def test_speed_measure(self, full_geom: ClusterGeometry) -> None:
        """Test mu, nu and theta at an interior and a corner vertex."""
        centre = full_geom.row_of((0, 0))
        corner = full_geom.row_of((-10, -10))
        assert full_geom.mu[centre] == 4.0
        assert full_geom.nu[centre] == 4.0
        assert full_geom.mu[corner] == 2.0
        assert np.all(full_geom.theta >= 1.0)

    def test_tie_broken_by_minimal_vertex(self, make_env: MakeEnv) -> None:
        """Test that equal clusters resolve to the lexicographically smaller one."""
        env = make_env(1, {(0, (1, 2)): 1.0, (0, (0, 0)): 1.0})
        geom = largest_cluster(env)
        assert [geom.site(r) for r in range(geom.size)] == [(-1, -1), (0, -1)]
        assert percolation_census(env)[:2] == [2, 2]


class TestChemicalDistance:
    """Test graph distances on the cluster."""

    def test_adjacent(self, full_geom: ClusterGeometry) -> None:
        """Test that an open edge has length one."""
        assert chemical_distance(full_geom, (0, 0), (0, 1)) == 1.0

    def test_ball_centre_off_cluster(self, make_env: MakeEnv) -> None:
        """Test that a ball needs a centre on the cluster."""
        geom = largest_cluster(make_env(1, {(0, (0, 0)): 1.0}))
        with pytest.raises(EmptyClusterError):
            chemical_ball(geom, (1, 1), 2)

    def test_ball_size(self, full_geom: ClusterGeometry) -> None:
        """Test that the unit ball of the full lattice has five vertices."""
        assert len(chemical_ball(full_geom, (0, 0), 1)) == 5

    def test_detour_around_closed_edge(self) -> None:
        """Test the detour of length 3 on a 3x3 lattice with (0,0)-(1,0) closed."""
        env = sample_environment(parse_law("bernoulli:p=1"), 2, 1)
        env.weights[0][1, 1] = 0.0
        geom = largest_cluster(env)
        assert chemical_distance(geom, (0, 0), (1, 0)) == 3.0

    def test_off_cluster_is_infinite(self, make_env: MakeEnv) -> None:
        """Test that sites off the cluster are at infinite distance."""
        geom = largest_cluster(make_env(1, {(0, (0, 0)): 1.0}))
        assert np.isinf(chemical_distance(geom, (1, 1), (0, -1)))

    def test_same_site(self, full_geom: ClusterGeometry) -> None:
        """Test that the distance from a site to itself is zero."""
        assert chemical_distance(full_geom, (2, 3), (2, 3)) == 0.0


class TestProjection:
    """Test the projection pi_n."""

    def test_equidistant_candidates(self, make_env: MakeEnv) -> None:
        """Test that (0,1) beats (1,0) when both are closest to (1,1)."""
        geom = largest_cluster(make_env(1, {(0, (1, 1)): 1.0, (1, (1, 1)): 1.0}))
        assert geom.row_of((1, 1)) < 0
        assert project_pi_n(geom, 1, [1.0, 1.0]) == (0, 1)

    def test_exact_hit(self, full_geom: ClusterGeometry) -> None:
        """Test that a lattice point on the cluster projects to itself."""
        assert project_pi_n(full_geom, 4, [0.5, 0.25]) == (2, 1)

    def test_matches_full_scan(self, percolated_geom: ClusterGeometry) -> None:
        """Test against a brute-force scan over all cluster vertices."""
        rng = np.random.default_rng(0)
        vertices = percolated_geom.vertices
        for x in rng.uniform(-0.9, 0.9, size=(100, 2)):
            target = 10.0 * x
            distance = np.abs(vertices - target).sum(axis=1)
            best = distance.min()
            expected = min(
                tuple(int(c) for c in v) for v in vertices[distance <= best + 1e-9]
            )
            assert project_pi_n(percolated_geom, 10.0, x) == expected

    def test_offset(self, full_geom: ClusterGeometry) -> None:
        """Test that the offset is subtracted before projecting."""
        assert project_pi_n(full_geom, 4, [0.5, 0.5], offset=[2, 2]) == (0, 0)


class TestUnionFind:
    """Test the union-find census helper."""

    def test_union_and_sizes(self) -> None:
        """Test merging sets and listing sizes."""
        forest = UnionFind(5)
        forest.union(0, 1)
        forest.union(1, 2)
        forest.union(2, 0)
        assert forest.find(2) == forest.find(0)
        assert forest.sizes() == [3, 1, 1]
