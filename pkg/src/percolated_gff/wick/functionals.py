"""Tested nonlinear functionals of the DGFF and their second moments.

A tested functional is a Riemann sum over the ``n^-1``-grid,

    <:F(gamma Phi_n):, f> = n^-d sum_x :F(gamma phi_x): 1_cluster(x) f(x / n),

where ``:F(gamma phi_x):`` is Wick ordered with the variance ``g_n(x, x)``
read from the Green's diagonal. For jointly Gaussian values the second
moment is ``<f, F_2(gamma^2 G_n) f>``, which :func:`covariance_functional`
evaluates as a double Riemann sum.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np
from numpy.typing import NDArray

from percolated_gff.errors import ConfigError, ProvenanceError, SupportError
from percolated_gff.field import FieldSample
from percolated_gff.green import GreenOperator, KilledOperator
from percolated_gff.mollifier import MollifierSpec
from percolated_gff.smeared import smear_fields, smeared_kernels, smoothing_matrix
from percolated_gff.wick.analytic import (
    AnalyticFunction,
    exp_function,
    wick_analytic,
    wick_exponential,
)

logger = logging.getLogger(__name__)

TEST_KINDS = ("zero", "one", "box", "bump", "sine")

Diagonal = Literal["clamp", "exact"]


@dataclass(frozen=True)
class TestFunction:
    """A test function on the unit cube given by a short descriptor.

    ``one`` is constant 1, ``zero`` constant 0, ``box:x0,y0,x1,y1`` the
    indicator of a rectangle, ``bump:cx,cy,r`` a smooth bump of height 1 and
    ``sine:k1,k2`` the Dirichlet mode ``2 sin(pi k1 x) sin(pi k2 y)``.
    """

    __test__ = False  # not a pytest class

    kind: str
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        expected = {"zero": 0, "one": 0, "box": 4, "bump": 3, "sine": 2}
        if self.kind not in expected:
            raise ConfigError(f"unknown test function {self.kind!r}")
        if len(self.params) != expected[self.kind]:
            raise ConfigError(
                f"test function {self.kind} takes {expected[self.kind]} parameters"
            )

    # Public methods

    def __call__(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        if self.kind == "zero":
            return np.zeros(len(points))
        if self.kind == "one":
            return np.ones(len(points))
        if self.kind == "box":
            x0, y0, x1, y1 = self.params
            inside = (
                (points[:, 0] >= x0)
                & (points[:, 0] < x1)
                & (points[:, 1] >= y0)
                & (points[:, 1] < y1)
            )
            return inside.astype(np.float64)
        if self.kind == "bump":
            cx, cy, r = self.params
            u2 = ((points[:, 0] - cx) ** 2 + (points[:, 1] - cy) ** 2) / (r * r)
            out = np.zeros(len(points))
            inside = u2 < 1
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - u2[inside]))
            return out
        k1, k2 = self.params
        return 2.0 * np.sin(math.pi * k1 * points[:, 0]) * np.sin(math.pi * k2 * points[:, 1])

    @property
    def descriptor(self) -> str:
        """Text form accepted by :func:`parse_test_function`."""
        if not self.params:
            return self.kind
        return f"{self.kind}:" + ",".join(repr(p) for p in self.params)

    def measure(self) -> float:
        """``int_D f`` for kinds with a closed form, else by a fine grid."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "one":
            return 1.0
        if self.kind == "box":
            x0, y0, x1, y1 = self.params
            return max(min(x1, 1) - max(x0, 0), 0.0) * max(min(y1, 1) - max(y0, 0), 0.0)
        points, area = macroscopic_grid(512)
        return float(np.sum(self(points)) * area)


@dataclass(frozen=True)
class WickFunctional:
    """``<:F(gamma Phi):, f>`` with its admissibility flag recorded."""

    function: AnalyticFunction
    gamma: float
    test: TestFunction
    admissible: bool | None = None

    # Public methods

    def wick(
        self, values: NDArray[np.float64], variances: NDArray[np.float64]
    ) -> NDArray[np.float64]:
        """``:F(gamma X):``; the closed form for ``exp``, the Hermite series otherwise."""
        if self.function.name == "exp":
            return wick_exponential(self.gamma, values, variances)
        return wick_analytic(self.function, self.gamma, values, variances)


# Public functions


def cell_centers(op: KilledOperator) -> NDArray[np.float64]:
    """Macroscopic centres ``(z + 1/2) / n`` of the cells carried by the operator rows."""
    domain = op.scaled_domain()
    return (op.sites + domain.offset + 0.5) / domain.n


def continuum_tested_functional(
    values: NDArray[np.float64],
    variances: NDArray[np.float64],
    w: WickFunctional,
    theta0: float,
    test_values: NDArray[np.float64],
    cell_area: float,
) -> NDArray[np.float64]:
    """``<:F(gamma Psi^eps / sqrt(theta0)):, f>`` for smeared continuum samples.

    :param values: ``(replicas, points)`` smeared continuum field values
    :param variances: Variance of ``Psi^eps`` at each point
    :param w: Functional
    :param theta0: Cluster density
    :param test_values: ``f`` at each point
    :param cell_area: Riemann weight per point
    :returns: One value per replica
    :rtype: NDArray[np.float64]
    """
    scale = 1.0 / math.sqrt(theta0)
    wick = w.wick(np.asarray(values) * scale, np.asarray(variances) * scale * scale)
    return np.asarray(wick @ test_values * cell_area)


def covariance_functional(
    kernel: NDArray[np.float64],
    transform: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    scale: float,
    test_values: NDArray[np.float64],
    cell_area: float,
    diagonal: Diagonal = "clamp",
) -> float:
    """``sum_{x,y} f(x) H(scale * K(x, y)) f(y) * cell_area^2``.

    With ``diagonal="clamp"`` each diagonal entry is replaced by the largest
    off-diagonal entry of its row, the kernel at lattice distance one for
    kernels decreasing in distance. A single-point grid keeps its diagonal.

    :param kernel: ``(P, P)`` kernel on the grid points
    :param transform: The scalar function ``H``, vectorised
    :param scale: Factor applied to the kernel inside ``H`` (``gamma^2``, ...)
    :param test_values: ``f`` at the grid points
    :param cell_area: Riemann weight per point
    :param diagonal: ``"clamp"`` or ``"exact"``
    :returns: The double Riemann sum
    :rtype: float
    """
    kernel = np.array(kernel, dtype=np.float64)
    if diagonal not in ("clamp", "exact"):
        raise ConfigError(f"unknown diagonal rule {diagonal!r}")
    if diagonal == "clamp" and kernel.shape[0] > 1:
        off = kernel.copy()
        np.fill_diagonal(off, -np.inf)
        np.fill_diagonal(kernel, off.max(axis=1))
    f = np.asarray(test_values, dtype=np.float64)
    return float(f @ np.asarray(transform(scale * kernel)) @ f * cell_area * cell_area)


def gmc_integral(
    field: FieldSample,
    green: GreenOperator,
    gamma: float,
    region: TestFunction,
    gamma_bound: float | None = None,
) -> float:
    """Mass of ``region`` under ``:exp(gamma phi):`` on the cluster.

    :param gamma_bound: Admissibility threshold; a warning is logged outside it
    :returns: A positive number (zero only if the region misses the cluster)
    :rtype: float
    """
    admissible = None if gamma_bound is None else abs(gamma) < gamma_bound
    if admissible is False:
        logger.warning("gamma=%.4g is outside the admissibility box %.4g", gamma, gamma_bound)
    w = WickFunctional(exp_function(), gamma, region, admissible)
    return tested_functional(field, green, w)


def lattice_covariance(
    green: GreenOperator,
    transform: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    scale: float,
    test: TestFunction,
) -> float:
    """``n^-2d sum_{x,y} f(x) T(scale g_n(x, y)) f(y)`` over the cluster cells.

    With ``T = F_2`` and ``scale = gamma^2`` this is the second moment of
    ``<:F(gamma Phi_n):, f>``; the diagonal is kept exactly.

    :param green: Green's operator on a scaled domain
    :param transform: Vectorised ``T``
    :param scale: Factor applied to the kernel inside ``T``
    :param test: Test function ``f``
    :returns: The double sum
    :rtype: float
    """
    op = green.op
    cell_area = float(op.scaled_domain().n) ** -op.geom.env.d
    f = test(cell_centers(op))
    on = f != 0
    if not np.any(on):
        return 0.0
    kernel = green.kernel[np.ix_(on, on)]
    return covariance_functional(kernel, transform, scale, f[on], cell_area, "exact")


def macroscopic_grid(resolution: int, d: int = 2) -> tuple[NDArray[np.float64], float]:
    """Cell centres of the ``resolution^-1``-grid on the unit cube and the cell volume."""
    if resolution < 1:
        raise ConfigError(f"grid resolution {resolution} must be positive")
    axes = [(np.arange(resolution) + 0.5) / resolution] * d
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1), float(resolution) ** -d


def mollifier_removal_gap(
    green: GreenOperator,
    mollifier: MollifierSpec,
    w: WickFunctional,
    theta0: float,
    resolution: int,
) -> float:
    """Variance of ``<:F(gamma Phi_n):, f> - <:theta0 F(gamma Phi^eps_n / theta0):, f>``.

    Expanded with ``H = F_2 - a0^2`` into three double sums. The unsmeared
    variable runs over the cluster cells of the ``n^-1``-grid, the smeared one
    over the support grid of ``f``: a ``G_n`` term, a ``G^{eps,eps}_n`` term and
    a ``G^{0,eps}_n`` cross term.
    """
    h = w.function.centred_f2().evaluate
    g2 = w.gamma**2
    plain = lattice_covariance(green, h, g2, w.test)
    smeared = smeared_covariance(green, mollifier, h, g2 / theta0**2, w.test, resolution)
    cross = smeared_cross_covariance(green, mollifier, h, g2 / theta0, w.test, resolution)
    return plain + theta0**2 * smeared - 2.0 * theta0 * cross


def parse_test_function(text: str) -> TestFunction:
    """Parse ``kind`` or ``kind:p1,p2,...``."""
    kind, _, rest = text.strip().partition(":")
    try:
        params = tuple(float(p) for p in rest.split(",")) if rest else ()
    except ValueError as exc:
        raise ConfigError(f"malformed test function {text!r}") from exc
    return TestFunction(kind, params)


def percolated_field_scale(k: int, theta0: float) -> float:
    """``theta0^((2 - k) / (2k))``, the scale of the k-percolated GFF."""
    if k < 1:
        raise ConfigError(f"order k={k} must be at least 1")
    return float(theta0 ** ((2.0 - k) / (2.0 * k)))


def smeared_covariance(
    green: GreenOperator,
    mollifier: MollifierSpec,
    transform: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    scale: float,
    test: TestFunction,
    resolution: int,
) -> float:
    """``<f, T(scale G^{eps,eps}_n) f>`` on the support grid of ``f``."""
    points, area, f = support_grid(test, mollifier, resolution)
    if points.size == 0:
        return 0.0
    gee = smeared_kernels(green, mollifier, points).gee
    return covariance_functional(gee, transform, scale, f, area, "exact")


def smeared_cross_covariance(
    green: GreenOperator,
    mollifier: MollifierSpec,
    transform: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    scale: float,
    test: TestFunction,
    resolution: int,
) -> float:
    """``<f, T(scale G^{0,eps}_n) f>``.

    The unsmeared variable runs over the cluster cells of the ``n^-1``-grid,
    the smeared one over the support grid of ``f``.
    """
    points, area, f = support_grid(test, mollifier, resolution)
    if points.size == 0:
        return 0.0
    op = green.op
    cell_area = float(op.scaled_domain().n) ** -op.geom.env.d
    f_cells = test(cell_centers(op))
    on = f_cells != 0
    g0e = np.asarray(smoothing_matrix(op, mollifier, points) @ green.kernel[:, on]).T
    return float(f_cells[on] @ transform(scale * g0e) @ f) * cell_area * area


def smeared_tested_functional(
    fields: Sequence[FieldSample],
    green: GreenOperator,
    mollifier: MollifierSpec,
    w: WickFunctional,
    theta0: float,
    resolution: int,
) -> NDArray[np.float64]:
    """``<:theta0 F(gamma Phi^eps_n / theta0):, f>`` per replica.

    The Wick ordering uses the smeared variance ``<rho^eps_x, G_n rho^eps_x>``
    at each point of the support grid of ``f``.
    """
    points, area, f = support_grid(w.test, mollifier, resolution)
    if points.size == 0:
        return np.zeros(len(fields))
    _check_provenance(fields, green)
    values = smear_fields(fields, mollifier, points)
    variances = np.diag(smeared_kernels(green, mollifier, points).gee)
    scale = 1.0 / theta0
    wick = w.wick(values * scale, variances * scale * scale)
    return np.asarray(theta0 * (wick @ f) * area)


def support_grid(
    test: TestFunction, mollifier: MollifierSpec, resolution: int
) -> tuple[NDArray[np.float64], float, NDArray[np.float64]]:
    """Grid points where ``f`` is non-zero, their cell area and ``f`` there.

    :raises SupportError: if ``f`` is non-zero where the mollifier support leaves the cube
    """
    points, area = macroscopic_grid(resolution)
    f = test(points)
    keep = f != 0
    points, f = points[keep], f[keep]
    eps = mollifier.epsilon
    outside = np.any((points - eps <= 0) | (points + eps >= 1), axis=1)
    if np.any(outside):
        raise SupportError(
            f"test function {test.descriptor} is non-zero within {eps} of the boundary"
        )
    return points, area, f


def tested_functional(field: FieldSample, green: GreenOperator, w: WickFunctional) -> float:
    """``<:F(gamma Phi_n):, f>`` for one field.

    :param field: Field on the same operator as ``green``
    :param green: Green's operator supplying ``g_n(x, x)``
    :param w: Functional
    :returns: The Riemann sum
    :rtype: float
    :raises ProvenanceError: if field and Green's operator differ
    """
    return float(tested_functionals([field], green, w)[0])


def tested_functionals(
    fields: Sequence[FieldSample], green: GreenOperator, w: WickFunctional
) -> NDArray[np.float64]:
    """Vectorised :func:`tested_functional` over replicas."""
    if not fields:
        return np.zeros(0)
    _check_provenance(fields, green)
    op = green.op
    centers = cell_centers(op)
    f = w.test(centers)
    values = np.stack([fl.values for fl in fields])
    wick = w.wick(values, green.diagonal[None, :])
    return np.asarray(wick @ f / float(op.scaled_domain().n) ** op.geom.env.d)


# Private functions


def _check_provenance(fields: Sequence[FieldSample], green: GreenOperator) -> None:
    op = green.op
    for f in fields:
        same = f.op is op or (
            f.provenance.env_id == op.geom.env.env_id
            and f.op.size == op.size
            and f.op.n == op.n
            and np.array_equal(f.op.rows, op.rows)
        )
        if not same:
            raise ProvenanceError("field and Green's operator live on different domains")
