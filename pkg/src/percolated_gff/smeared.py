"""Smeared fields and smeared Green's kernels on the ``n^-1``-grid.

Every smeared quantity uses one Riemann rule: the cell ``[z/n, (z+1)/n)``
carries the site ``z`` (shifted into environment coordinates) with weight
``n^-d rho^eps_x(cell centre)``, and only cells whose site lies in
``Lambda`` ∩ cluster contribute. In matrix form this is a smoothing matrix
``S`` with one row per macroscopic point, so

    phi^eps(x) = (S phi)(x),  g^{eps,eps} = S g S^T,  g^{0,eps} = g[rows(x)] S^T.
"""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import sparse

from percolated_gff.errors import ConfigError, ProvenanceError
from percolated_gff.field import FieldSample
from percolated_gff.green import GreenOperator, KilledOperator
from percolated_gff.mollifier import MollifierSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SmearedKernelSet:
    """``g_n``, ``g_n^{0,eps}`` and ``g_n^{eps,eps}`` on all pairs of ``points``."""

    points: NDArray[np.float64]
    g: NDArray[np.float64]
    g0e: NDArray[np.float64]
    gee: NDArray[np.float64]
    epsilon: float

    # Public methods

    def to_csv(self, path: Path) -> Path:
        """Write one row ``x1 x2 y1 y2 g g0e gee`` per pair."""
        d = self.points.shape[1]
        header = [f"x{i + 1}" for i in range(d)] + [f"y{i + 1}" for i in range(d)]
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header + ["g", "g0e", "gee"])
            for i, x in enumerate(self.points):
                for j, y in enumerate(self.points):
                    values = (self.g[i, j], self.g0e[i, j], self.gee[i, j])
                    writer.writerow([repr(float(c)) for c in (*x, *y, *values)])
        return path


# Public functions


def increment_moment(
    green: GreenOperator,
    mollifier: MollifierSpec,
    x: Sequence[float],
    y: Sequence[float],
    k: int,
) -> float:
    """``E[(phi^eps(x) - phi^eps(y))^(2k)] = (2k-1)!! <rho_x - rho_y, G_n (rho_x - rho_y)>^k``."""
    if k < 1:
        raise ConfigError(f"moment order k={k} must be at least 1")
    kernels = smeared_kernels(green, mollifier, np.asarray([x, y], dtype=np.float64))
    variance = kernels.gee[0, 0] + kernels.gee[1, 1] - 2.0 * kernels.gee[0, 1]
    double_factorial = math.prod(range(2 * k - 1, 0, -2))
    return float(double_factorial * max(variance, 0.0) ** k)


def point_rows(op: KilledOperator, points: NDArray[np.float64]) -> NDArray[np.int64]:
    """Operator row of ``floor(n x) - offset`` for each point, ``-1`` off ``Lambda``."""
    domain = op.scaled_domain()
    return op.local_rows(domain.site_of(points))


def smear_field(field: FieldSample, mollifier: MollifierSpec, x: Sequence[float]) -> float:
    """``phi^eps_n(x) = <Phi_n, rho^eps_x>`` by the grid Riemann rule.

    :param field: Field sample on a scaled domain
    :param mollifier: Mollifier
    :param x: Centre; ``B(x, eps)`` must lie in the unit cube
    :returns: The smeared value
    :rtype: float
    :raises SupportError: if the mollifier support leaves the cube
    """
    return float(smear_fields([field], mollifier, np.asarray([x], dtype=np.float64))[0, 0])


def smear_fields(
    fields: Sequence[FieldSample], mollifier: MollifierSpec, points: NDArray[np.float64]
) -> NDArray[np.float64]:
    """Smeared values of many replicas at many points, shape ``(replicas, points)``."""
    if not fields:
        return np.zeros((0, len(points)))
    op = fields[0].op
    if any(f.op is not op for f in fields):
        raise ProvenanceError("smeared replicas must share one operator")
    matrix = smoothing_matrix(op, mollifier, points)
    values = np.stack([f.values for f in fields])
    return np.asarray((matrix @ values.T).T)


def smeared_kernels(
    green: GreenOperator, mollifier: MollifierSpec, points: NDArray[np.float64]
) -> SmearedKernelSet:
    """Smeared Green's kernels on every pair of ``points``.

    :param green: Green's operator on a scaled domain
    :param mollifier: Mollifier
    :param points: ``(P, d)`` macroscopic points, supports inside the cube
    :returns: The kernel set; ``gee`` is exactly symmetric
    :rtype: SmearedKernelSet
    :raises SupportError: if a support leaves the cube
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, green.op.geom.env.d)
    matrix = smoothing_matrix(green.op, mollifier, points)
    rows = point_rows(green.op, points)
    kernel_points = np.where(
        rows[:, None] >= 0, green.kernel[np.maximum(rows, 0)], 0.0
    )  # g(floor(n x), .)
    g = np.where(rows[None, :] >= 0, kernel_points[:, np.maximum(rows, 0)], 0.0)
    g0e = np.asarray(matrix @ kernel_points.T).T
    gee = np.asarray(matrix @ (matrix @ green.kernel).T)
    gee = 0.5 * (gee + gee.T)
    logger.debug("smeared kernels on %d points, eps=%.3g", len(points), mollifier.epsilon)
    return SmearedKernelSet(points=points, g=g, g0e=g0e, gee=gee, epsilon=mollifier.epsilon)


def smeared_variance(
    green: GreenOperator, mollifier: MollifierSpec, x: Sequence[float]
) -> float:
    """``<rho^eps_x, G_n rho^eps_x>``, the variance of ``phi^eps_n(x)``."""
    matrix = smoothing_matrix(green.op, mollifier, np.asarray([x], dtype=np.float64))
    row = np.asarray(matrix.toarray()).ravel()
    return float(row @ green.kernel @ row)


def smoothing_matrix(
    op: KilledOperator, mollifier: MollifierSpec, points: NDArray[np.float64]
) -> sparse.csr_matrix:
    """Sparse ``(points, rows)`` matrix of Riemann weights ``n^-d rho^eps_x``."""
    domain = op.scaled_domain()
    points = np.asarray(points, dtype=np.float64).reshape(-1, domain.d)
    mollifier.check_support(points)
    data, row_index, col_index = [], [], []
    for i, center in enumerate(points):
        cells, weights = mollifier.riemann_weights(center, domain.n)
        local = op.local_rows(cells - domain.offset)
        keep = local >= 0
        data.append(weights[keep])
        col_index.append(local[keep])
        row_index.append(np.full(np.count_nonzero(keep), i))
    return sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(row_index), np.concatenate(col_index))),
        shape=(len(points), op.size),
    )

