"""Negative Sobolev norms and the fractional kernel ``G_s`` on the unit square."""

import logging
import math
from dataclasses import dataclass
from typing import Literal, NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import integrate, special

from percolated_gff.continuum import ContinuumBasis
from percolated_gff.errors import ConfigError
from percolated_gff.field import FieldSample
from percolated_gff.wick.functionals import cell_centers

logger = logging.getLogger(__name__)

Route = Literal["eigen", "gamma"]


class SobolevNorm(NamedTuple):
    """Truncated ``H^-s`` norm and an estimate of the neglected tail."""

    value: float
    tail_bound: float
    modes: int


@dataclass(frozen=True)
class FractionalKernel:
    """``G_s = sum_k lambda_k^-s e_k (x) e_k`` truncated to the basis modes."""

    s: float
    basis: ContinuumBasis

    def __post_init__(self) -> None:
        if self.s <= 0:
            raise ConfigError(f"fractional order s={self.s} must be positive")


# Public functions


def fractional_kernel_bound(s: float, r: float, d: int = 2) -> float:
    """Shape of the bound on ``G_s`` at distance ``r``.

    ``r^(2s - d)`` for ``s < d/2``, ``log(1/r) + 1`` at ``s = d/2`` and 1 above.
    """
    if r <= 0:
        raise ConfigError("distance must be positive")
    if s < d / 2:
        return float(r ** (2 * s - d))
    if s == d / 2:
        return float(math.log(1.0 / r) + 1.0)
    return 1.0


def fractional_kernel_eval(
    kernel: FractionalKernel,
    x: Sequence[float],
    y: Sequence[float],
    route: Route = "eigen",
) -> float:
    """Evaluate ``G_s(x, y)``.

    The ``eigen`` route sums ``lambda_k^-s e_k(x) e_k(y)``. The ``gamma`` route
    integrates ``Gamma(s)^-1 int_0^inf t^(s-1) k_t(x, y) dt`` over the
    truncated heat kernel by adaptive quadrature, after the substitution
    ``t = u^(1/s)`` which removes the endpoint singularity.

    :raises ConfigError: at ``x == y`` with ``s <= 1``
    """
    basis = kernel.basis
    s = kernel.s
    if np.allclose(x, y) and s <= 1.0:
        raise ConfigError("G_s on the diagonal needs s > d/2")
    values = basis.eigenfunctions(np.asarray([x, y], dtype=np.float64))
    products = values[0] * values[1]
    if route == "eigen":
        return float(np.sum(products * basis.eigenvalues ** (-s)))
    if route != "gamma":
        raise ConfigError(f"unknown route {route!r}")
    eigenvalues = basis.eigenvalues

    def integrand(u: float) -> float:
        t = u ** (1.0 / s)
        return float(np.sum(np.exp(-eigenvalues * t) * products))

    scale = eigenvalues[0] ** (-s)  # t ~ 1/lambda_1 at u ~ scale
    total = 0.0
    for lower, upper in ((0.0, scale), (scale, 40.0 * scale), (40.0 * scale, np.inf)):
        part, _ = integrate.quad(integrand, lower, upper, limit=400, epsabs=1e-12, epsrel=1e-10)
        total += part
    return float(total / (s * special.gamma(s)))


def sobolev_minus_s_norm(
    coefficients: NDArray[np.float64], eigenvalues: NDArray[np.float64], s: float
) -> SobolevNorm:
    """``sum_k (1 + lambda_k)^-s u(e_k)^2`` with a Weyl-law tail estimate.

    The tail assumes the last quarter of the modes shows the decay
    ``u(e_k)^2 ~ c / lambda_k`` of a free field and the Weyl density
    ``K / lambda_K``; the estimate is infinite for ``s = 0``.

    :param coefficients: ``u(e_k)`` for ``k <= K``
    :param eigenvalues: ``lambda_k`` for ``k <= K``
    :param s: Order, non-negative
    :returns: The norm
    :rtype: SobolevNorm
    """
    u = np.asarray(coefficients, dtype=np.float64)
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if u.size < 1 or u.shape != lam.shape:
        raise ConfigError("need at least one coefficient per eigenvalue")
    if s < 0:
        raise ConfigError(f"order s={s} must be non-negative")
    value = float(np.sum((1.0 + lam) ** (-s) * u * u))
    if s == 0:
        tail = math.inf
    else:
        last = slice(3 * len(u) // 4, None)
        amplitude = float(np.mean(u[last] ** 2 * lam[last]))
        density = len(u) / float(lam[-1])
        tail = amplitude * density * float(lam[-1]) ** (-s) / s
    return SobolevNorm(value=value, tail_bound=tail, modes=len(u))


def tested_mode_coefficients(field: FieldSample, basis: ContinuumBasis) -> NDArray[np.float64]:
    """``u(e_k) = <Phi_n, e_k>`` by the ``n^-1``-grid Riemann rule."""
    n = field.op.scaled_domain().n
    values = basis.eigenfunctions(cell_centers(field.op))
    return np.asarray(field.values @ values / float(n) ** 2)
