"""The standard bump mollifier and its quadrature rules."""

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray
from scipy import integrate, special

from percolated_gff.errors import ConfigError, SupportError, ToleranceError

logger = logging.getLogger(__name__)

NORMALISATION_TOL = 1e-10


@dataclass(frozen=True)
class MollifierSpec:
    """Bump ``rho(u) = c exp(-1 / (1 - |u|^2))`` on ``|u| < 1``, scaled to radius ``epsilon``.

    :param epsilon: Support radius in ``(0, 1)``
    :param d: Dimension
    :param nodes: Gauss-Legendre nodes per axis on the support box
    """

    epsilon: float
    d: int = 2
    nodes: int = 32

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"mollifier radius {self.epsilon} must lie in (0, 1)")

    # Public methods

    def check_support(self, centers: NDArray[np.float64]) -> None:
        """Raise :class:`SupportError` unless every ball ``B(x, eps)`` lies in ``(0, 1)^d``."""
        centers = np.asarray(centers, dtype=np.float64).reshape(-1, self.d)
        bad = np.any((centers - self.epsilon <= 0) | (centers + self.epsilon >= 1), axis=1)
        if np.any(bad):
            first = centers[np.argmax(bad)]
            raise SupportError(
                f"mollifier support of radius {self.epsilon} around {first.tolist()} "
                "leaves the unit cube"
            )

    def density(
        self, center: NDArray[np.float64], points: NDArray[np.float64]
    ) -> NDArray[np.float64]:
        """``rho^eps_x(z) = eps^-d rho((z - x) / eps)`` at each row of ``points``."""
        u = (np.asarray(points, dtype=np.float64) - np.asarray(center)) / self.epsilon
        return self.profile(np.sum(u * u, axis=-1)) / self.epsilon**self.d

    @cached_property
    def normalisation(self) -> float:
        """``int_{|u|<1} exp(-1 / (1 - |u|^2)) du`` by adaptive quadrature."""
        sphere = 2.0 * math.pi ** (self.d / 2) / special.gamma(self.d / 2)
        value, error = integrate.quad(
            lambda r: r ** (self.d - 1) * math.exp(-1.0 / (1.0 - r * r)) if r < 1 else 0.0,
            0.0,
            1.0,
            epsabs=1e-14,
            epsrel=1e-13,
        )
        if error > NORMALISATION_TOL:
            raise ToleranceError(f"mollifier normalisation error {error:.2e}")
        return float(sphere * value)

    def profile(self, radius_sq: NDArray[np.float64]) -> NDArray[np.float64]:
        """Normalised radial profile as a function of ``|u|^2``."""
        radius_sq = np.asarray(radius_sq, dtype=np.float64)
        inside = radius_sq < 1.0
        out = np.zeros_like(radius_sq)
        out[inside] = np.exp(-1.0 / (1.0 - radius_sq[inside]))
        return out / self.normalisation

    def quadrature(
        self, center: NDArray[np.float64]
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Tensor Gauss-Legendre nodes on the support box and weights ``w_i rho(z_i)``.

        :returns: ``(points, weights)`` with ``points`` of shape ``(nodes^d, d)``
        """
        nodes, weights = self.tensor_rule()
        points = np.asarray(center, dtype=np.float64) + self.epsilon * nodes
        return points, weights * self.density(center, points) * self.epsilon**self.d

    def riemann_weights(
        self, center: NDArray[np.float64], n: int
    ) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
        """Cells of the ``n^-1``-grid inside the support and weights ``n^-d rho(cell centre)``.

        :returns: ``(cells, weights)`` with ``cells`` in domain coordinates
        """
        center = np.asarray(center, dtype=np.float64)
        low = np.maximum(np.floor((center - self.epsilon) * n).astype(np.int64), 0)
        high = np.minimum(np.ceil((center + self.epsilon) * n).astype(np.int64), n - 1)
        axes = [np.arange(lo, hi + 1) for lo, hi in zip(low, high)]
        grid = np.meshgrid(*axes, indexing="ij")
        cells = np.stack([g.ravel() for g in grid], axis=1)
        weights = self.density(center, (cells + 0.5) / n) / float(n) ** self.d
        keep = weights > 0
        return cells[keep], weights[keep]

    def tensor_rule(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Gauss-Legendre rule on ``[-1, 1]^d``."""
        x, w = np.polynomial.legendre.leggauss(self.nodes)
        grid = np.meshgrid(*([x] * self.d), indexing="ij")
        weight_grid = np.meshgrid(*([w] * self.d), indexing="ij")
        nodes = np.stack([g.ravel() for g in grid], axis=1)
        weights = np.prod(np.stack([g.ravel() for g in weight_grid], axis=1), axis=1)
        return nodes, weights
