"""Hermite polynomials with variance.

``H_k(x, v)`` is the Wick power ``:X^k:`` of a centred Gaussian ``X`` with
variance ``v`` evaluated at ``X = x``. It satisfies

    H_{k+1} = x H_k - k v H_{k-1},   d/dx H_k = k H_{k-1},
    d/dv H_k = -(k (k - 1) / 2) H_{k-2}.
"""

import math
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from percolated_gff.errors import ConfigError
from percolated_gff.rng import CounterStream


class WickCovarianceReport(NamedTuple):
    """Monte-Carlo check of ``E[:X^k: :Y^l:] = delta_kl k! rho^k``."""

    estimate: float
    stderr: float
    target: float

    # Public methods

    @property
    def z_score(self) -> float:
        """Deviation in standard errors."""
        if self.stderr == 0:
            return 0.0 if self.estimate == self.target else math.inf
        return abs(self.estimate - self.target) / self.stderr


# Public functions


def hermite(k: int, x: ArrayLike, v: ArrayLike) -> NDArray[np.float64]:
    """``H_k(x, v)`` by the three-term recurrence.

    :param k: Order, ``k >= 0``
    :param x: Argument(s)
    :param v: Variance(s), non-negative
    :returns: Values broadcast over ``x`` and ``v``
    :rtype: NDArray[np.float64]
    :raises ConfigError: for negative ``k`` or ``v``
    """
    return hermite_table(k, x, v)[k]


def hermite_explicit(k: int, x: float, v: float) -> float:
    """``sum_m (-1)^m k! / (m! (k-2m)! 2^m) v^m x^(k-2m)`` in exact rational arithmetic.

    ``x`` and ``v`` are converted to exact fractions, so the only rounding is
    the final conversion to float.
    """
    _check_order(k, v)
    xf, vf = Fraction(x), Fraction(v)
    total = Fraction(0)
    for m in range(k // 2 + 1):
        coefficient = Fraction(
            (-1) ** m * math.factorial(k),
            math.factorial(m) * math.factorial(k - 2 * m) * 2**m,
        )
        total += coefficient * vf**m * xf ** (k - 2 * m)
    return float(total)


def hermite_table(k_max: int, x: ArrayLike, v: ArrayLike) -> NDArray[np.float64]:
    """``H_0 .. H_{k_max}`` stacked on the first axis."""
    x_arr = np.asarray(x, dtype=np.float64)
    v_arr = np.asarray(v, dtype=np.float64)
    _check_order(k_max, float(np.min(v_arr)) if v_arr.size else 0.0)
    x_arr, v_arr = np.broadcast_arrays(x_arr, v_arr)
    table = np.empty((k_max + 1,) + x_arr.shape)
    table[0] = 1.0
    if k_max >= 1:
        table[1] = x_arr
    for k in range(1, k_max):
        table[k + 1] = x_arr * table[k] - k * v_arr * table[k - 1]
    return table


def wick_covariance_check(
    k: int, l: int, rho: float, replicas: int, seed: int = 0
) -> WickCovarianceReport:
    """Estimate ``E[:X^k: :Y^l:]`` for unit-variance Gaussians with correlation ``rho``.

    :raises ConfigError: if ``|rho| > 1`` or fewer than two replicas
    """
    if abs(rho) > 1:
        raise ConfigError(f"correlation {rho} must lie in [-1, 1]")
    if replicas < 2:
        raise ConfigError("wick_covariance_check needs at least two replicas")
    stream = CounterStream(seed, "wick/pairs", (k, l))
    xi = stream.normals(0, 2 * replicas)
    x = xi[0::2]
    y = rho * x + math.sqrt(1.0 - rho * rho) * xi[1::2]
    products = hermite(k, x, 1.0) * hermite(l, y, 1.0)
    target = float(math.factorial(k) * rho**k) if k == l else 0.0
    return WickCovarianceReport(
        estimate=float(products.mean()),
        stderr=float(products.std(ddof=1) / math.sqrt(replicas)),
        target=target,
    )


# Private functions


def _check_order(k: int, v: float) -> None:
    if k < 0:
        raise ConfigError(f"Hermite order {k} must be non-negative")
    if v < 0:
        raise ConfigError(f"Hermite variance {v} must be non-negative")
