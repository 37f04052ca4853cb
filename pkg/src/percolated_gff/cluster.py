"""Cluster geometry of an environment.

The infinite cluster is proxied by the largest open cluster of the box. A
padding margin (``L // 8`` by default) is discarded when estimating the
cluster density, because clusters touching the boundary bias it.

Cluster vertices are stored in lexicographic order of their coordinates,
which is also the row order of every operator built on the cluster.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import sparse
from scipy.sparse import csgraph
from scipy.spatial import cKDTree

from percolated_gff.environment import Environment
from percolated_gff.errors import EmptyClusterError

logger = logging.getLogger(__name__)

Site = tuple[int, ...]


class UnionFind:
    """Disjoint sets with union by size and path halving.

    Used as the independent census of cluster sizes.
    """

    def __init__(self, size: int):
        """Create ``size`` singleton sets.

        :param size: Number of elements
        """
        self.parent = np.arange(size)
        self.size = np.ones(size, dtype=np.int64)

    # Public methods

    def find(self, item: int) -> int:
        """Return the representative of ``item``."""
        parent = self.parent
        while parent[item] != item:
            parent[item] = parent[parent[item]]
            item = int(parent[item])
        return item

    def sizes(self) -> list[int]:
        """Sizes of all sets, largest first."""
        roots = [i for i in range(len(self.parent)) if self.parent[i] == i]
        return sorted((int(self.size[r]) for r in roots), reverse=True)

    def union(self, a: int, b: int) -> None:
        """Merge the sets containing ``a`` and ``b``."""
        root_a, root_b = self.find(a), self.find(b)
        if root_a == root_b:
            return
        if self.size[root_a] < self.size[root_b]:
            root_a, root_b = root_b, root_a
        self.parent[root_b] = root_a
        self.size[root_a] += self.size[root_b]


@dataclass(frozen=True, eq=False)
class ClusterGeometry:
    """Largest open cluster of an environment.

    ``mu`` is the total conductance at a vertex, ``nu`` the sum of inverse
    conductances over open edges and ``theta = max(mu, 1)`` the speed measure.
    """

    env: Environment
    vertices: NDArray[np.int64]  # (m, d) lexicographically sorted
    lookup: NDArray[np.int64]  # box-shaped; row id or -1
    mu: NDArray[np.float64]
    nu: NDArray[np.float64]
    theta: NDArray[np.float64]
    theta0_hat: float
    margin: int

    # Public methods

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric conductance matrix between cluster vertices."""
        m = len(self.vertices)
        rows, cols, vals = [], [], []
        for axis, weights in enumerate(self.env.weights):
            step = np.zeros(self.env.d, dtype=np.int64)
            step[axis] = 1
            upper = self.vertices + step
            inside = upper[:, axis] <= self.env.L
            source = np.nonzero(inside)[0]
            target = self.rows_of(upper[inside])
            w = weights[tuple((self.vertices[inside] + self.env.L).T)]
            keep = (target >= 0) & (w > 0)
            rows.append(source[keep])
            cols.append(target[keep])
            vals.append(w[keep])
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        v = np.concatenate(vals)
        upper_part = sparse.coo_matrix((v, (r, c)), shape=(m, m))
        return (upper_part + upper_part.T).tocsr()

    def contains(self, sites: NDArray[np.int64]) -> NDArray[np.bool_]:
        """Membership of each site (rows of ``sites``) in the cluster."""
        return self.rows_of(sites) >= 0

    @property
    def inner_half_width(self) -> int:
        """Half-width of the analysis box after removing the margin."""
        return self.env.L - self.margin

    @cached_property
    def neighbor_table(self) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
        """Per-vertex neighbour rows (``-1`` padded) and conductances, width 2d."""
        d = self.env.d
        m = len(self.vertices)
        rows = np.full((m, 2 * d), -1, dtype=np.int64)
        weights = np.zeros((m, 2 * d))
        for axis in range(d):
            for slot, sign in ((2 * axis, 1), (2 * axis + 1, -1)):
                step = np.zeros(d, dtype=np.int64)
                step[axis] = sign
                rows[:, slot] = self.rows_of(self.vertices + step)
                low = self.vertices if sign == 1 else self.vertices + step
                inside = (low[:, axis] >= -self.env.L) & (low[:, axis] < self.env.L)
                w = np.zeros(m)
                w[inside] = self.env.weights[axis][tuple((low[inside] + self.env.L).T)]
                weights[:, slot] = np.where(rows[:, slot] >= 0, w, 0.0)
        rows[weights == 0] = -1
        return rows, weights

    def row_of(self, site: Sequence[int]) -> int:
        """Row id of ``site`` or ``-1`` when it is not a cluster vertex."""
        return int(self.rows_of(np.asarray([site], dtype=np.int64))[0])

    def rows_of(self, sites: NDArray[np.int64]) -> NDArray[np.int64]:
        """Vectorised :meth:`row_of` for an ``(k, d)`` array of sites."""
        sites = np.asarray(sites, dtype=np.int64).reshape(-1, self.env.d)
        L = self.env.L
        inside = np.all((sites >= -L) & (sites <= L), axis=1)
        out = np.full(len(sites), -1, dtype=np.int64)
        out[inside] = self.lookup[tuple((sites[inside] + L).T)]
        return out

    def site(self, row: int) -> Site:
        """Coordinates of cluster row ``row``."""
        return tuple(int(c) for c in self.vertices[row])

    @property
    def size(self) -> int:
        """Number of cluster vertices."""
        return len(self.vertices)

    @cached_property
    def tree(self) -> cKDTree:
        """KD-tree over cluster vertices for nearest-site queries."""
        return cKDTree(self.vertices)


# Public functions


def chemical_ball(geom: ClusterGeometry, center: Sequence[int], radius: float) -> NDArray[np.int64]:
    """Rows of the chemical ball ``B(center, radius)`` in the cluster.

    :param geom: Cluster geometry
    :param center: Cluster site at the centre
    :param radius: Graph-distance radius (inclusive)
    :returns: Sorted cluster rows
    :rtype: NDArray[np.int64]
    """
    row = geom.row_of(center)
    if row < 0:
        raise EmptyClusterError(f"ball centre {tuple(center)} is not on the cluster")
    dist = csgraph.dijkstra(
        geom.adjacency, indices=row, unweighted=True, limit=radius + 0.5
    )
    return np.nonzero(dist <= radius)[0].astype(np.int64)


def chemical_distance(geom: ClusterGeometry, x: Sequence[int], y: Sequence[int]) -> float:
    """Graph distance between ``x`` and ``y`` along open edges of the cluster.

    :returns: Distance, ``inf`` when an endpoint is off the cluster
    :rtype: float
    """
    row_x, row_y = geom.row_of(x), geom.row_of(y)
    if row_x < 0 or row_y < 0:
        return float("inf")
    if row_x == row_y:
        return 0.0
    return float(chemical_distances(geom, row_x)[row_y])


def chemical_distances(geom: ClusterGeometry, row: int) -> NDArray[np.float64]:
    """BFS distances from cluster row ``row`` to every cluster row."""
    return np.asarray(
        csgraph.shortest_path(
            geom.adjacency, method="D", unweighted=True, indices=row
        ),
        dtype=np.float64,
    )


def largest_cluster(env: Environment, margin: int | None = None) -> ClusterGeometry:
    """Extract the largest open cluster of ``env``.

    Ties in size are broken by the lexicographically smallest minimal vertex.
    ``theta0_hat`` is the fraction of sites of the inner box (the box minus
    ``margin`` on every side) that belong to the cluster.

    :param env: Environment
    :param margin: Padding discarded for density estimates, ``L // 8`` if None
    :returns: The cluster geometry
    :rtype: ClusterGeometry
    """
    margin = env.L // 8 if margin is None else margin
    side = env.side
    shape = (side,) * env.d
    n_sites = side**env.d
    flat = np.arange(n_sites).reshape(shape)
    rows, cols = [], []
    for axis, weights in enumerate(env.weights):
        lower = [slice(None)] * env.d
        upper = [slice(None)] * env.d
        lower[axis] = slice(0, side - 1)
        upper[axis] = slice(1, side)
        open_edges = weights > 0
        rows.append(flat[tuple(lower)][open_edges])
        cols.append(flat[tuple(upper)][open_edges])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    if r.size == 0:
        raise EmptyClusterError("environment has no open edge")
    graph = sparse.coo_matrix((np.ones(r.size), (r, c)), shape=(n_sites, n_sites))
    _, labels = csgraph.connected_components(graph, directed=False)
    sizes = np.bincount(labels)
    # first occurrence in C order is the lexicographically minimal vertex
    first = np.full(len(sizes), n_sites)
    np.minimum.at(first, labels, np.arange(n_sites))
    best = min(range(len(sizes)), key=lambda k: (-sizes[k], first[k]))
    members = np.nonzero(labels == best)[0]
    vertices = np.stack(np.unravel_index(members, shape), axis=1).astype(np.int64)
    vertices -= env.L
    lookup = np.full(n_sites, -1, dtype=np.int64)
    lookup[members] = np.arange(len(members))
    mu, nu = _vertex_sums(env, vertices)
    inner = env.L - margin
    in_inner = np.all(np.abs(vertices) <= inner, axis=1)
    theta0_hat = float(np.count_nonzero(in_inner)) / float((2 * inner + 1) ** env.d)
    logger.info(
        "largest cluster: %d vertices, theta0_hat=%.4f (margin %d)",
        len(members),
        theta0_hat,
        margin,
    )
    return ClusterGeometry(
        env=env,
        vertices=vertices,
        lookup=lookup.reshape(shape),
        mu=mu,
        nu=nu,
        theta=np.maximum(mu, 1.0),
        theta0_hat=theta0_hat,
        margin=margin,
    )


def percolation_census(env: Environment) -> list[int]:
    """Sizes of all open clusters by union-find, largest first.

    Independent of :func:`largest_cluster`, which uses ``scipy.sparse.csgraph``.
    """
    side = env.side
    shape = (side,) * env.d
    forest = UnionFind(side**env.d)
    for x, y, _ in env.iter_open_edges():
        a = int(np.ravel_multi_index(tuple(c + env.L for c in x), shape))
        b = int(np.ravel_multi_index(tuple(c + env.L for c in y), shape))
        forest.union(a, b)
    return forest.sizes()


def project_pi_n(
    geom: ClusterGeometry,
    n: float,
    x: Sequence[float],
    offset: Sequence[int] | None = None,
) -> Site:
    """Closest cluster site to ``n * x`` in the l1 norm.

    Ties are broken by lexicographic order on Z^d.

    :param geom: Cluster geometry
    :param n: Scale
    :param x: Macroscopic point
    :param offset: Subtracted from ``n * x`` first (domain placement)
    :returns: The projected site
    :rtype: tuple[int, ...]
    """
    target = n * np.asarray(x, dtype=np.float64)
    if offset is not None:
        target = target - np.asarray(offset, dtype=np.float64)
    best, _ = geom.tree.query(target, k=1, p=1)
    candidates = geom.tree.query_ball_point(target, r=float(best) + 1e-9, p=1)
    chosen = min(geom.site(int(row)) for row in candidates)
    return chosen


# Private functions


def _vertex_sums(
    env: Environment, vertices: NDArray[np.int64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    mu = np.zeros(len(vertices))
    nu = np.zeros(len(vertices))
    for axis, weights in enumerate(env.weights):
        for sign in (1, -1):
            low = vertices.copy()
            if sign == -1:
                low[:, axis] -= 1
            inside = (low[:, axis] >= -env.L) & (low[:, axis] < env.L)
            w = np.zeros(len(vertices))
            w[inside] = weights[tuple((low[inside] + env.L).T)]
            mu += w
            opened = w > 0
            nu[opened] += 1.0 / w[opened]
    return mu, nu
