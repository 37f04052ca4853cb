"""Analytic functions, their ``F_2`` transform and Wick composition.

An :class:`AnalyticFunction` is a truncated power series
``F(x) = sum_{k <= K} a_k x^k`` together with the claim that it is
``beta``-Fock-entire with constant ``M``:

    F_2(x) = sum_k k! a_k^2 x^k <= M exp(beta x)   for x >= 0.

The claim is checked on a grid, never assumed.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from percolated_gff.errors import ConfigError
from percolated_gff.wick.hermite import hermite_table

logger = logging.getLogger(__name__)

DEFAULT_TERMS = 64
TAIL_TOL = 1e-10
FINITE_MARK = "finite"


@dataclass(frozen=True)
class AnalyticFunction:
    """Truncated power series with a Fock-entire claim ``(beta, M)``."""

    name: str
    coefficients: tuple[float, ...]
    beta: float = 1.0
    bound: float = 1.0  # the constant M
    finite: bool = False  # exact polynomial, no truncation tail

    def __post_init__(self) -> None:
        if len(self.coefficients) < 2:
            raise ConfigError(f"{self.name}: truncation K must be at least 1")
        if self.beta < 0 or self.bound <= 0:
            raise ConfigError(f"{self.name}: need beta >= 0 and M > 0")

    # Public methods

    @property
    def a0(self) -> float:
        """The constant coefficient."""
        return self.coefficients[0]

    def centred_f2(self) -> "AnalyticFunction":
        """``H = F_2 - a0^2``, the second-moment transform of the centred functional."""
        f2 = self.f2()
        return replace(f2, name=f"h({self.name})", coefficients=(0.0,) + f2.coefficients[1:])

    def evaluate(self, x: ArrayLike) -> NDArray[np.float64]:
        """``F(x)`` from the truncated series."""
        return np.asarray(np.polynomial.polynomial.polyval(x, self.coefficients))

    def f2(self) -> "AnalyticFunction":
        """The transform with coefficients ``k! a_k^2``."""
        return f2_transform(self)

    def fock_check(self, upper: float = 50.0, points: int = 501) -> bool:
        """Whether ``F_2(x) <= M exp(beta x)`` on ``[0, upper]``.

        Compared in log space with relative slack ``1e-9``.
        """
        grid = np.linspace(0.0, upper, points)
        k = np.arange(len(self.coefficients))
        a = np.asarray(self.coefficients)
        nonzero = a != 0
        if not np.any(nonzero):
            return True
        orders = k[nonzero][:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            powers = np.where(orders == 0, 0.0, orders * np.log(grid)[None, :])
        log_terms = (
            special.gammaln(orders + 1) + 2.0 * np.log(np.abs(a[nonzero]))[:, None] + powers
        )
        log_f2 = special.logsumexp(log_terms, axis=0)
        log_bound = math.log(self.bound) + self.beta * grid
        return bool(np.all(log_f2 <= log_bound + 1e-9))

    def serialize(self) -> str:
        """Text form ``name beta M K a0 a1 ... aK``, then ``finite`` for exact polynomials."""
        values = " ".join(repr(float(c)) for c in self.coefficients)
        text = f"{self.name} {self.beta!r} {self.bound!r} {self.terms} {values}"
        return f"{text} {FINITE_MARK}" if self.finite else text

    def tail_bound(self, radius: float) -> float:
        """Bound on ``sum_{k > K} |a_k| radius^k`` from the Fock-entire coefficient estimate.

        Uses ``|a_k| <= sqrt(M) (beta e)^(k/2) / sqrt(k! k^k)``, summed over the
        next 400 orders in log space.
        """
        if self.finite or self.beta == 0:
            return 0.0
        k = np.arange(self.terms + 1, self.terms + 401, dtype=np.float64)
        log_terms = (
            0.5 * math.log(self.bound)
            + 0.5 * k * math.log(self.beta * math.e)
            - 0.5 * (special.gammaln(k + 1) + k * np.log(k))
            + k * math.log(max(radius, 1e-300))
        )
        return float(np.exp(special.logsumexp(log_terms)))

    @property
    def terms(self) -> int:
        """Truncation order ``K``."""
        return len(self.coefficients) - 1


# Public functions


def admissibility_bound(beta: float, theta0: float, c_sigma: float, c_hk: float) -> float:
    """Threshold ``sqrt((theta0 / beta) min(1 / C_Sigma, theta0 / C_HK))`` for ``|gamma|``.

    ``C_Sigma`` and ``C_HK`` are fitted surrogates; the window is recorded as
    a flag, never enforced.
    """
    if beta == 0:
        return math.inf
    if c_sigma <= 0 or c_hk <= 0 or theta0 <= 0:
        raise ConfigError("admissibility surrogates and theta0 must be positive")
    return math.sqrt((theta0 / beta) * min(1.0 / c_sigma, theta0 / c_hk))


def analytic_by_name(name: str, terms: int = DEFAULT_TERMS) -> AnalyticFunction:
    """Named constructor: exp, sin, cos, sinh, cosh, id, square, cube, quartic, or ``x^k``.

    :raises ConfigError: for unknown names
    """
    builders: dict[str, Callable[[], AnalyticFunction]] = {
        "exp": lambda: exp_function(terms),
        "sin": lambda: sin_function(terms),
        "cos": lambda: cos_function(terms),
        "sinh": lambda: sinh_function(terms),
        "cosh": lambda: cosh_function(terms),
        "id": lambda: monomial(1),
        "square": lambda: monomial(2),
        "cube": lambda: monomial(3),
        "quartic": lambda: monomial(4),
    }
    if name in builders:
        return builders[name]()
    if name.startswith("x^") and name[2:].isdigit():
        return monomial(int(name[2:]))
    raise ConfigError(f"unknown analytic function {name!r}")


def constant_function(a0: float) -> AnalyticFunction:
    """``F == a0`` (stored with a zero linear term)."""
    return AnalyticFunction(
        "constant", (float(a0), 0.0), beta=0.0, bound=max(a0 * a0, 1e-300), finite=True
    )


def cos_function(terms: int = DEFAULT_TERMS) -> AnalyticFunction:
    """Cosine; ``F_2 = cosh``."""
    return AnalyticFunction("cos", _series(terms, lambda k: _trig(k, even=True)))


def cosh_function(terms: int = DEFAULT_TERMS) -> AnalyticFunction:
    """Hyperbolic cosine; ``F_2 = cosh``."""
    coeffs = _series(terms, lambda k: 1.0 / math.factorial(k) if k % 2 == 0 else 0.0)
    return AnalyticFunction("cosh", coeffs)


def exp_function(terms: int = DEFAULT_TERMS) -> AnalyticFunction:
    """Exponential; ``F_2 = exp``, so it is 1-Fock-entire with ``M = 1``."""
    return AnalyticFunction("exp", _series(terms, lambda k: 1.0 / math.factorial(k)))


def f2_transform(function: AnalyticFunction) -> AnalyticFunction:
    """``F_2`` with coefficients ``k! a_k^2``.

    :param function: The function ``F``
    :returns: ``F_2``, carrying the same ``(beta, M)`` claim
    :rtype: AnalyticFunction
    """
    coeffs = tuple(
        math.factorial(k) * a * a for k, a in enumerate(function.coefficients)
    )
    return AnalyticFunction(
        f"f2({function.name})", coeffs, function.beta, function.bound, function.finite
    )


def monomial(k: int) -> AnalyticFunction:
    """``x^k``; ``F_2(x) = k! x^k <= (k/e)^k k! exp(x)``."""
    if k < 1:
        raise ConfigError(f"monomial degree {k} must be at least 1")
    coeffs = tuple(1.0 if j == k else 0.0 for j in range(k + 1))
    return AnalyticFunction(
        f"x^{k}", coeffs, beta=1.0, bound=_polynomial_bound(coeffs), finite=True
    )


def parse_analytic(text: str) -> AnalyticFunction:
    """Inverse of :meth:`AnalyticFunction.serialize`."""
    parts = text.split()
    finite = bool(parts) and parts[-1] == FINITE_MARK
    if finite:
        parts = parts[:-1]
    try:
        name, beta, bound, terms = parts[0], float(parts[1]), float(parts[2]), int(parts[3])
        coeffs = tuple(float(c) for c in parts[4:])
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"malformed analytic function {text!r}") from exc
    if len(coeffs) != terms + 1:
        raise ConfigError(f"expected {terms + 1} coefficients, got {len(coeffs)}")
    return AnalyticFunction(name, coeffs, beta, bound, finite)


def polynomial(coefficients: Sequence[float], name: str = "polynomial") -> AnalyticFunction:
    """Polynomial ``sum_k a_k x^k`` with ``beta = 1`` and ``M = sum_k k! a_k^2 (k/e)^k``."""
    coeffs = tuple(float(c) for c in coefficients)
    if len(coeffs) == 1:
        coeffs = coeffs + (0.0,)
    return AnalyticFunction(name, coeffs, beta=1.0, bound=_polynomial_bound(coeffs), finite=True)


def sin_function(terms: int = DEFAULT_TERMS) -> AnalyticFunction:
    """Sine; ``F_2 = sinh``."""
    return AnalyticFunction("sin", _series(terms, lambda k: _trig(k, even=False)))


def sinh_function(terms: int = DEFAULT_TERMS) -> AnalyticFunction:
    """Hyperbolic sine; ``F_2 = sinh``."""
    coeffs = _series(terms, lambda k: 1.0 / math.factorial(k) if k % 2 == 1 else 0.0)
    return AnalyticFunction("sinh", coeffs)


def wick_analytic(
    function: AnalyticFunction, gamma: float, value: ArrayLike, variance: ArrayLike
) -> NDArray[np.float64]:
    """``:F(gamma X): = sum_k a_k gamma^k H_k(X, v)`` at ``X = value``.

    :param function: The function ``F``
    :param gamma: Coupling
    :param value: Value(s) of ``X``
    :param variance: Variance(s) of ``X``
    :returns: Wick-ordered values, broadcast over ``value`` and ``variance``
    :rtype: NDArray[np.float64]
    """
    _check_tail(function, gamma, value, variance)
    table = hermite_table(function.terms, value, variance)
    weights = np.asarray(function.coefficients) * gamma ** np.arange(function.terms + 1)
    return np.tensordot(weights, table, axes=1)


def wick_exponential(gamma: float, value: ArrayLike, variance: ArrayLike) -> NDArray[np.float64]:
    """Closed form ``:exp(gamma X): = exp(gamma X - gamma^2 v / 2)``; always positive."""
    value = np.asarray(value, dtype=np.float64)
    return np.exp(gamma * value - 0.5 * gamma * gamma * np.asarray(variance))


# Private functions


def _check_tail(
    function: AnalyticFunction, gamma: float, value: ArrayLike, variance: ArrayLike
) -> float:
    # |H_k(x, v)| is dominated by (|x| + sqrt(v))^k at the orders that matter
    x = np.abs(np.asarray(value, dtype=np.float64))
    spread = np.sqrt(np.abs(np.asarray(variance, dtype=np.float64)))
    radius = abs(gamma) * float(np.max(x + spread, initial=0.0))
    tail = function.tail_bound(radius)
    if tail >= TAIL_TOL:
        logger.warning(
            "Wick truncation tail of %s at K=%d is %.3g at radius %.3g (tolerance %g)",
            function.name,
            function.terms,
            tail,
            radius,
            TAIL_TOL,
        )
    return tail


def _polynomial_bound(coeffs: Sequence[float]) -> float:
    total = sum(
        math.factorial(k) * a * a * (k / math.e) ** k for k, a in enumerate(coeffs)
    )
    return max(total, 1e-300)


def _series(terms: int, coefficient: Callable[[int], float]) -> tuple[float, ...]:
    if terms < 1:
        raise ConfigError(f"truncation K={terms} must be at least 1")
    return tuple(coefficient(k) for k in range(terms + 1))


def _trig(k: int, even: bool) -> float:
    if (k % 2 == 0) != even:
        return 0.0
    sign = -1.0 if (k // 2) % 2 else 1.0
    return sign / math.factorial(k)
