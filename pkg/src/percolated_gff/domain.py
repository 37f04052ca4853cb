"""Lattice images of the unit cube.

The macroscopic domain is ``D = (0, 1)^d``. At scale ``n`` its lattice image
``nD`` consists of the sites ``z`` with ``0 < z_i < n``; it is placed inside the
environment box by subtracting ``offset = n // 2`` on every axis so that it
sits around the origin. The n^-1-grid cell ``[z/n, (z+1)/n)`` carries the
value at site ``z``, matching ``g_n(x, y) = g(floor(nx), floor(ny))``.
"""

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from percolated_gff.cluster import ClusterGeometry, project_pi_n
from percolated_gff.errors import ConfigError


@dataclass(frozen=True)
class ScaledDomain:
    """The lattice image ``nD`` of the unit cube at scale ``n``."""

    n: int
    d: int = 2

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ConfigError(f"scale n={self.n} must be at least 2")

    # Public methods

    def cell_centers(self) -> NDArray[np.float64]:
        """Centres of the ``n^d`` grid cells, ordered like :meth:`cell_sites`."""
        return (self.cell_indices().astype(np.float64) + 0.5) / self.n

    def cell_indices(self) -> NDArray[np.int64]:
        """Domain coordinates ``z`` in ``{0, .., n-1}^d`` of every grid cell."""
        axes = [np.arange(self.n)] * self.d
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1).astype(np.int64)

    def cell_sites(self) -> NDArray[np.int64]:
        """Environment coordinates of the site carried by each grid cell."""
        return self.cell_indices() - self.offset

    @property
    def offset(self) -> int:
        """Shift from domain to environment coordinates."""
        return self.n // 2

    def project(self, geom: ClusterGeometry, x: NDArray[np.float64]) -> tuple[int, ...]:
        """The map ``pi_n`` in environment coordinates."""
        return project_pi_n(geom, self.n, x, offset=[self.offset] * self.d)

    def required_half_width(self, margin_fraction: float = 0.125) -> int:
        """Smallest box half-width whose analysis box contains ``nD``."""
        reach = self.n - self.offset + 1
        return int(math.ceil((reach + 1) / (1.0 - margin_fraction)))

    def site_of(self, points: NDArray[np.float64]) -> NDArray[np.int64]:
        """Environment site ``floor(n x) - offset`` for each point (rows)."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, self.d)
        return np.floor(self.n * points).astype(np.int64) - self.offset

    def sites(self) -> NDArray[np.int64]:
        """Environment coordinates of the interior sites of ``nD``."""
        indices = self.cell_indices()
        interior = np.all(indices > 0, axis=1)
        return indices[interior] - self.offset
