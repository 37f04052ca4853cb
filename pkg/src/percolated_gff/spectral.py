"""Spectral data of the killed operator and heat kernels.

The eigenproblem is ``A psi = lambda Theta psi`` with ``Theta = diag(theta)``,
so the eigenvectors are orthonormal for the ``theta``-weighted inner product
and

    g = sum_k psi_k psi_k^T / lambda_k,     q_t = sum_k exp(-lambda_k t) psi_k psi_k^T.

``q_t(x, y)`` is the transition density of the walk with speed measure
``theta`` with respect to ``theta``; its time integral is the Green's function
for any choice of speed measure.
"""

import logging
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import linalg, sparse, stats

from percolated_gff.bounds import LinearFit, linear_fit
from percolated_gff.cluster import ClusterGeometry, chemical_distance
from percolated_gff.errors import CapacityError, ConfigError, NumericError
from percolated_gff.green import KilledOperator, build_killed_operator

logger = logging.getLogger(__name__)

DENSE_EIGEN_CAP = 4000


class PrincipalEigenvalueReport(NamedTuple):
    """Scaling of the principal eigenvalue over chemical balls."""

    c: float  # min over radii of lambda_1 * n^2
    scaled: dict[int, float]  # radius -> lambda_1 * n^2
    exponent: float  # fitted slope of log lambda_1 against log n
    band: float  # max / min of lambda_1 * n^2


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenpairs of ``-L_theta`` on a killed domain, ascending."""

    op: KilledOperator
    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]  # columns, theta-orthonormal
    theta: NDArray[np.float64]

    # Public methods

    def gram(self) -> NDArray[np.float64]:
        """``<psi_i, psi_j>_theta``; the identity up to round-off."""
        weighted = self.eigenvectors * self.theta[:, None]
        return np.asarray(self.eigenvectors.T @ weighted)

    def green_matrix(self) -> NDArray[np.float64]:
        """Green's kernel by the eigen-sum ``sum_k psi_k psi_k^T / lambda_k``."""
        scaled = self.eigenvectors / self.eigenvalues
        return np.asarray(scaled @ self.eigenvectors.T)

    def heat_kernel_matrix(self, t: float) -> NDArray[np.float64]:
        """``q_t`` on all pairs of rows."""
        if t < 0:
            raise ConfigError(f"heat kernel time must be non-negative, got {t}")
        scaled = self.eigenvectors * np.exp(-self.eigenvalues * t)
        return np.asarray(scaled @ self.eigenvectors.T)

    @property
    def principal(self) -> float:
        """The principal eigenvalue ``lambda_1``."""
        return float(self.eigenvalues[0])


# Public functions


def fit_gaussian_regime(
    spec: SpectralData,
    geom: ClusterGeometry,
    pairs: Sequence[tuple[Sequence[int], Sequence[int]]],
    times_per_pair: int = 8,
    window: tuple[float, float] = (1.0, 4.0),
) -> LinearFit:
    """Fit ``log q_t(x, y) + (d/2) log t`` against ``d_omega(x, y)^2 / t``.

    Times run over ``[window[0] * r^2, window[1] * r^2]`` with
    ``r = d_omega(x, y)``. Only the Gaussian-regime exponent is fitted; the
    slope should be negative.

    :returns: The fit
    :rtype: LinearFit
    """
    d = geom.env.d
    regressors, responses = [], []
    for x, y in pairs:
        r = chemical_distance(geom, x, y)
        if not math.isfinite(r) or r < 1:
            continue
        for t in np.linspace(window[0] * r * r, window[1] * r * r, times_per_pair):
            q = killed_heat_kernel(spec, float(t), x, y)
            if q <= 0:
                continue
            regressors.append(r * r / t)
            responses.append(math.log(q) + 0.5 * d * math.log(t))
    fit = linear_fit(np.asarray(regressors), np.asarray(responses))
    logger.info("Gaussian regime fit: slope %.4f, R^2 %.3f", fit.slope, fit.r_squared)
    return fit


def green_time_integral(spec: SpectralData, x: Sequence[int], y: Sequence[int]) -> float:
    """``int_0^inf q_t(x, y) dt`` by the eigenvalue-wise closed form."""
    i, j = spec.op.local_row(x), spec.op.local_row(y)
    psi = spec.eigenvectors
    return float(np.sum(psi[i] * psi[j] / spec.eigenvalues))


def killed_heat_kernel(spec: SpectralData, t: float, x: Sequence[int], y: Sequence[int]) -> float:
    """``q_t(x, y) = sum_k exp(-lambda_k t) psi_k(x) psi_k(y)``.

    :param spec: Spectral data
    :param t: Time, non-negative
    :param x: Site
    :param y: Site
    :returns: The killed heat kernel
    :rtype: float
    """
    if t < 0:
        raise ConfigError(f"heat kernel time must be non-negative, got {t}")
    i, j = spec.op.local_row(x), spec.op.local_row(y)
    psi = spec.eigenvectors
    return float(np.sum(np.exp(-spec.eigenvalues * t) * psi[i] * psi[j]))


def principal_eigenvalue_check(spectra: Mapping[int, SpectralData]) -> PrincipalEigenvalueReport:
    """Check ``lambda_1 >= c n^-2`` over chemical balls of several radii.

    :param spectra: Ball radius to spectral data of the ball
    :returns: The report; ``c`` is fitted, never compared to a constant
    :rtype: PrincipalEigenvalueReport
    :raises ConfigError: for fewer than three radii
    """
    if len(spectra) < 3:
        raise ConfigError("principal eigenvalue fit needs at least three radii")
    radii = sorted(spectra)
    scaled = {n: spectra[n].principal * n * n for n in radii}
    c = min(scaled.values())
    if c <= 0:
        raise NumericError(f"non-positive principal eigenvalue scaling c={c}")
    fit = linear_fit(np.log(radii), np.log([spectra[n].principal for n in radii]))
    report = PrincipalEigenvalueReport(
        c=c, scaled=scaled, exponent=fit.slope, band=max(scaled.values()) / c
    )
    logger.info("principal eigenvalue: c=%.4f exponent=%.3f", c, fit.slope)
    return report


def spectral_decompose(
    geom: ClusterGeometry,
    domain: KilledOperator | NDArray[np.int64] | Sequence[Sequence[int]],
    cap: int = DENSE_EIGEN_CAP,
    theta: NDArray[np.float64] | None = None,
) -> SpectralData:
    """Solve the generalised eigenproblem ``A psi = lambda Theta psi``.

    :param geom: Cluster geometry
    :param domain: A killed operator or the vertex set ``Lambda``
    :param cap: Dense eigensolver size cap
    :param theta: Speed measure on the operator rows; the cluster's by default
    :returns: Eigenpairs sorted ascending
    :rtype: SpectralData
    :raises CapacityError: if ``Lambda`` ∩ cluster exceeds ``cap``
    """
    op = domain if isinstance(domain, KilledOperator) else build_killed_operator(geom, domain)
    if op.size > cap:
        raise CapacityError(f"dense eigensolver cap {cap} exceeded by {op.size} rows")
    op.check_nonsingular()
    weights = op.theta if theta is None else np.asarray(theta, dtype=np.float64)
    eigenvalues, eigenvectors = linalg.eigh(op.matrix.toarray(), np.diag(weights))
    logger.debug("spectrum on %d rows, lambda_1=%.4g", op.size, eigenvalues[0])
    return SpectralData(op=op, eigenvalues=eigenvalues, eigenvectors=eigenvectors, theta=weights)


def uniformized_heat_kernel(
    op: KilledOperator,
    t: float,
    x: Sequence[int],
    y: Sequence[int],
    theta: NDArray[np.float64] | None = None,
    tail: float = 1e-14,
) -> float:
    """Killed heat kernel by uniformisation of the ``theta``-walk.

    With jump rate ``r = max(mu / theta)`` the semigroup is
    ``P_t = sum_j Poisson(r t)(j) P^j`` for the sub-stochastic
    ``P = I - Theta^-1 A / r``; the heat kernel is ``P_t(x, y) / theta(y)``.

    :returns: The killed heat kernel
    :rtype: float
    """
    if t < 0:
        raise ConfigError(f"heat kernel time must be non-negative, got {t}")
    weights = op.theta if theta is None else np.asarray(theta, dtype=np.float64)
    i, j = op.local_row(x), op.local_row(y)
    generator = sparse.diags(1.0 / weights) @ op.matrix
    rate = float(np.max(op.matrix.diagonal() / weights))
    step = (sparse.identity(op.size) - generator / rate).tocsr()
    mean = rate * t
    last = int(stats.poisson.isf(tail, mean)) + 1 if mean > 0 else 0
    pmf = stats.poisson.pmf(np.arange(last + 1), mean)
    row = np.zeros(op.size)
    row[i] = 1.0
    total = pmf[0] * row[j]
    for k in range(1, last + 1):
        row = step.T @ row
        total += pmf[k] * row[j]
    return float(total / weights[j])
