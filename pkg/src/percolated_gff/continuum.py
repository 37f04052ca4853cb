"""Continuum Gaussian free field on the unit square.

The reference generator is ``(1/2) div(a grad)`` with Dirichlet data, ``a``
the diffusivity ``Sigma^2`` of the limiting Brownian motion. For diagonal
``a`` the eigenpairs are explicit:

    e_k(x) = 2 sin(pi k1 x1) sin(pi k2 x2),
    lambda_k = (pi^2 / 2) (a11 k1^2 + a22 k2^2),

and ``g^Sigma(x, y) = sum_k e_k(x) e_k(y) / lambda_k`` is the occupation
density of the killed Brownian motion. The sum is truncated to the
``modes`` smallest eigenvalues.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from percolated_gff.errors import ConfigError
from percolated_gff.mollifier import MollifierSpec
from percolated_gff.rng import CounterStream

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ContinuumBasis:
    """Truncated Dirichlet eigenbasis of ``(1/2) div(a grad)`` on ``(0, 1)^2``."""

    a: NDArray[np.float64]
    wavenumbers: NDArray[np.int64]  # (K, 2)
    eigenvalues: NDArray[np.float64]  # ascending
    # Public methods

    def eigenfunctions(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        """``e_k(x)`` with shape ``(points, modes)``."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        first = np.sin(math.pi * points[:, 0:1] * self.wavenumbers[:, 0])
        second = np.sin(math.pi * points[:, 1:2] * self.wavenumbers[:, 1])
        return 2.0 * first * second

    def green(self, x: Sequence[float], y: Sequence[float]) -> float:
        """Truncated ``g^Sigma(x, y)``."""
        values = self.eigenfunctions(np.asarray([x, y], dtype=np.float64))
        return float(np.sum(values[0] * values[1] / self.eigenvalues))

    def green_matrix(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        """Truncated ``g^Sigma`` on all pairs of ``points``."""
        values = self.eigenfunctions(points)
        return np.asarray((values / self.eigenvalues) @ values.T)

    def heat_kernel(self, t: float, x: Sequence[float], y: Sequence[float]) -> float:
        """Truncated killed heat kernel ``sum_k exp(-lambda_k t) e_k(x) e_k(y)``."""
        values = self.eigenfunctions(np.asarray([x, y], dtype=np.float64))
        return float(np.sum(np.exp(-self.eigenvalues * t) * values[0] * values[1]))

    @property
    def log_coefficient(self) -> float:
        """Coefficient ``c`` in ``g^Sigma(x, y) ~ c log(1 / |x - y|)``."""
        return 1.0 / (math.pi * math.sqrt(float(np.linalg.det(self.a))))

    @property
    def modes(self) -> int:
        """Number of retained modes."""
        return len(self.eigenvalues)

    def mollified_coefficients(
        self, mollifier: MollifierSpec, centers: NDArray[np.float64]
    ) -> NDArray[np.float64]:
        """``<e_k, rho^eps_x>`` with shape ``(modes, centers)``.

        The integral uses the mollifier's tensor Gauss-Legendre rule; because
        ``e_k`` is a product of sines it factorises as ``2 S1 W S2^T`` with
        ``W`` the node weights on the support box.
        """
        centers = np.asarray(centers, dtype=np.float64).reshape(-1, 2)
        mollifier.check_support(centers)
        nodes, _ = np.polynomial.legendre.leggauss(mollifier.nodes)
        out = np.empty((self.modes, len(centers)))
        for i, center in enumerate(centers):
            _, weights = mollifier.quadrature(center)
            grid = weights.reshape(mollifier.nodes, mollifier.nodes)
            u1 = center[0] + mollifier.epsilon * nodes
            u2 = center[1] + mollifier.epsilon * nodes
            s1 = np.sin(math.pi * np.outer(self.wavenumbers[:, 0], u1))
            s2 = np.sin(math.pi * np.outer(self.wavenumbers[:, 1], u2))
            out[:, i] = 2.0 * np.sum((s1 @ grid) * s2, axis=1)
        return out


# Public functions


def continuum_basis(
    a: NDArray[np.float64] | Sequence[Sequence[float]], modes: int
) -> ContinuumBasis:
    """Build the truncated eigenbasis for diffusivity ``a``.

    :param a: 2x2 symmetric positive definite matrix; only diagonal ``a`` is supported
    :param modes: Number of modes kept (the smallest eigenvalues)
    :returns: The basis
    :rtype: ContinuumBasis
    :raises ConfigError: for non-SPD or non-diagonal ``a``
    """
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (2, 2) or not np.allclose(a, a.T):
        raise ConfigError("diffusivity must be a symmetric 2x2 matrix")
    if np.any(np.linalg.eigvalsh(a) <= 0):
        raise ConfigError("diffusivity must be positive definite")
    if abs(a[0, 1]) > 0:
        raise ConfigError("non-diagonal diffusivity is not supported")
    if modes < 1:
        raise ConfigError(f"mode count {modes} must be at least 1")
    a11, a22 = float(a[0, 0]), float(a[1, 1])
    k_max = int(math.ceil(2.0 * math.sqrt(modes))) + 2
    while True:
        k1, k2 = np.meshgrid(np.arange(1, k_max + 1), np.arange(1, k_max + 1), indexing="ij")
        k1, k2 = k1.ravel(), k2.ravel()
        values = 0.5 * math.pi**2 * (a11 * k1**2 + a22 * k2**2)
        order = np.lexsort((k2, k1, values))[:modes]
        ceiling = 0.5 * math.pi**2 * min(a11, a22) * (k_max + 1) ** 2
        if values[order[-1]] < ceiling:
            break
        k_max *= 2
    wavenumbers = np.stack([k1[order], k2[order]], axis=1).astype(np.int64)
    return ContinuumBasis(a=a, wavenumbers=wavenumbers, eigenvalues=values[order])


def continuum_cross_covariance(
    basis: ContinuumBasis, mollifier: MollifierSpec, points: NDArray[np.float64]
) -> NDArray[np.float64]:
    """``<delta_x, G^Sigma rho^eps_y>``; rows are unsmeared points, columns smeared ones."""
    coefficients = basis.mollified_coefficients(mollifier, points)
    values = basis.eigenfunctions(points)
    return np.asarray((values / basis.eigenvalues) @ coefficients)


def continuum_smeared_covariance(
    basis: ContinuumBasis, mollifier: MollifierSpec, points: NDArray[np.float64]
) -> NDArray[np.float64]:
    """``<rho^eps_x, G^Sigma rho^eps_y>`` on all pairs of ``points``."""
    coefficients = basis.mollified_coefficients(mollifier, points)
    covariance = (coefficients / basis.eigenvalues[:, None]).T @ coefficients
    return np.asarray(0.5 * (covariance + covariance.T))


def sample_cgff(
    basis: ContinuumBasis,
    mollifier: MollifierSpec,
    points: NDArray[np.float64],
    count: int,
    seed: int = 0,
) -> NDArray[np.float64]:
    """Smeared continuum field ``Psi^eps(x) = sum_k xi_k lambda_k^-1/2 <e_k, rho^eps_x>``.

    :returns: Array of shape ``(count, points)``
    :rtype: NDArray[np.float64]
    :raises SupportError: if a mollifier support leaves the square
    """
    coefficients = basis.mollified_coefficients(mollifier, points)
    return sample_cgff_modes(basis, count, seed) @ coefficients


def sample_cgff_modes(
    basis: ContinuumBasis, count: int, seed: int = 0, first: int = 0
) -> NDArray[np.float64]:
    """Modal amplitudes ``xi_k lambda_k^-1/2`` per replica, shape ``(count, modes)``."""
    stream = CounterStream(seed, "cgff")
    noise = np.zeros((count, basis.modes))
    for r in range(count):
        noise[r] = stream.child(first + r).normals(0, basis.modes)
    return np.asarray(noise / np.sqrt(basis.eigenvalues))
