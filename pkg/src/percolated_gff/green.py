"""Killed operators and their Green's kernels.

For a vertex set ``Lambda`` the killed operator is the restriction of
``-L^omega`` to ``Lambda`` intersected with the cluster:

    A[x, x] = mu(x),    A[x, y] = -omega({x, y})  for open neighbours in Lambda.

Dirichlet data is encoded by omitting the exterior columns, so row sums equal
the conductance leaving ``Lambda``. The Green's kernel is ``g = A^-1``, the
expected occupation time of the variable-speed walk killed on exit.
"""

import csv
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import sparse
from scipy.sparse import csgraph
from scipy.sparse import linalg as splinalg

from percolated_gff.cluster import ClusterGeometry
from percolated_gff.domain import ScaledDomain
from percolated_gff.errors import (
    ConfigError,
    EmptyClusterError,
    GeometryError,
    SingularOperatorError,
    ToleranceError,
)

logger = logging.getLogger(__name__)

GREEN_MAGIC = b"PGFFGRN1"
CSV_MAX_ROWS = 200


@dataclass(frozen=True)
class SolverSettings:
    """Linear solver configuration."""

    tol: float = 1e-10  # max residual of A g - I
    direct_limit: int = 200_000  # sparse direct factorisation up to this size
    cg_maxiter: int = 20_000


@dataclass(frozen=True, eq=False)
class KilledOperator:
    """Precision matrix of the killed walk on ``Lambda`` ∩ cluster."""

    geom: ClusterGeometry
    rows: NDArray[np.int64]  # cluster rows of Lambda ∩ cluster, sorted
    matrix: sparse.csr_matrix
    domain: ScaledDomain | None = None

    # Public methods

    def check_nonsingular(self) -> None:
        """Raise :class:`SingularOperatorError` unless every component exits."""
        n_comp, labels = csgraph.connected_components(self.matrix, directed=False)
        exit_mass = np.bincount(labels, weights=self.exit_weights(), minlength=n_comp)
        total = np.bincount(labels, weights=self.matrix.diagonal(), minlength=n_comp)
        closed = np.nonzero(exit_mass <= 1e-12 * total)[0]
        if closed.size:
            raise SingularOperatorError(
                f"{closed.size} component(s) of the domain have no exit edge"
            )

    def exit_weights(self) -> NDArray[np.float64]:
        """Row sums of ``A``: the conductance leaving ``Lambda`` at each row."""
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def local_row(self, site: Sequence[int]) -> int:
        """Position of ``site`` among the rows; raises if it is outside."""
        position = int(self.local_rows(np.asarray([site], dtype=np.int64))[0])
        if position < 0:
            raise GeometryError(f"site {tuple(site)} is not in the domain")
        return position

    def local_rows(self, sites: NDArray[np.int64]) -> NDArray[np.int64]:
        """Positions of ``sites`` among the rows, ``-1`` when outside ``Lambda``."""
        cluster_rows = self.geom.rows_of(sites)
        position = np.searchsorted(self.rows, cluster_rows)
        position = np.clip(position, 0, max(self.size - 1, 0))
        hit = (cluster_rows >= 0) & (self.rows[position] == cluster_rows)
        return np.where(hit, position, -1)

    @property
    def n(self) -> int | None:
        """Scale of the domain, if it is a scaled domain."""
        return None if self.domain is None else self.domain.n

    def scaled_domain(self) -> ScaledDomain:
        """The scaled domain; raises :class:`ConfigError` for an explicit vertex set."""
        if self.domain is None:
            raise ConfigError("this operation needs an operator built on a scaled domain")
        return self.domain

    @property
    def sites(self) -> NDArray[np.int64]:
        """Environment coordinates of the operator rows."""
        return self.geom.vertices[self.rows]

    @property
    def size(self) -> int:
        """Number of rows."""
        return len(self.rows)

    @property
    def theta(self) -> NDArray[np.float64]:
        """Speed measure on the operator rows."""
        return self.geom.theta[self.rows]


@dataclass(frozen=True, eq=False)
class GreenOperator:
    """Dense Green's kernel of a killed operator."""

    op: KilledOperator
    kernel: NDArray[np.float64]
    residual: float = field(default=0.0)

    # Public methods

    @property
    def diagonal(self) -> NDArray[np.float64]:
        """Diagonal ``g(x, x)`` on the operator rows."""
        return np.diag(self.kernel).copy()

    def entry(self, x: Sequence[int], y: Sequence[int]) -> float:
        """``g(x, y)`` for environment sites; 0 when either is outside."""
        local = self.local_rows(np.asarray([x, y], dtype=np.int64))
        if np.any(local < 0):
            return 0.0
        return float(self.kernel[local[0], local[1]])

    def local_rows(self, sites: NDArray[np.int64]) -> NDArray[np.int64]:
        """Positions of ``sites`` in the kernel, ``-1`` when outside ``Lambda``."""
        return self.op.local_rows(sites)

    @property
    def n(self) -> int | None:
        """Scale of the domain, if any."""
        return self.op.n


# Public functions


def build_killed_operator(
    geom: ClusterGeometry,
    domain: ScaledDomain | NDArray[np.int64] | Sequence[Sequence[int]],
) -> KilledOperator:
    """Assemble the killed operator on ``domain`` ∩ cluster.

    :param geom: Cluster geometry
    :param domain: A scaled domain or an explicit ``(k, d)`` array of sites
    :returns: The operator
    :rtype: KilledOperator
    """
    scaled = domain if isinstance(domain, ScaledDomain) else None
    sites = scaled.sites() if scaled is not None else np.asarray(domain, dtype=np.int64)
    sites = sites.reshape(-1, geom.env.d)
    rows = np.unique(geom.rows_of(sites))
    rows = rows[rows >= 0]
    if rows.size == 0:
        raise EmptyClusterError("domain does not intersect the cluster")
    inner = geom.adjacency[rows][:, rows]
    matrix = (sparse.diags(geom.mu[rows]) - inner).tocsr()
    logger.debug("killed operator with %d rows", rows.size)
    return KilledOperator(geom=geom, rows=rows, matrix=matrix, domain=scaled)


def export_green_binary(green: GreenOperator, path: Path) -> Path:
    """Write ``g`` as a 16-byte header (magic, m) and row-major float64 data."""
    m = green.op.size
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(GREEN_MAGIC + struct.pack("<Q", m))
        handle.write(np.ascontiguousarray(green.kernel, dtype="<f8").tobytes())
    return path


def export_green_csv(green: GreenOperator, path: Path) -> Path:
    """Write ``g`` in long CSV form (``x.., y.., g``); only for ``m <= 200``."""
    m = green.op.size
    if m > CSV_MAX_ROWS:
        raise ConfigError(f"CSV export is limited to {CSV_MAX_ROWS} rows, got {m}")
    d = green.op.geom.env.d
    names = [f"x{i + 1}" for i in range(d)] + [f"y{i + 1}" for i in range(d)] + ["g"]
    sites = green.op.sites
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(names)
        for i in range(m):
            for j in range(m):
                row = [int(c) for c in sites[i]] + [int(c) for c in sites[j]]
                writer.writerow(row + [repr(float(green.kernel[i, j]))])
    return path


def load_green_binary(path: Path) -> NDArray[np.float64]:
    """Read a matrix written by :func:`export_green_binary`."""
    data = path.read_bytes()
    if data[:8] != GREEN_MAGIC:
        raise ConfigError(f"{path} is not a Green matrix file")
    (m,) = struct.unpack("<Q", data[8:16])
    return np.frombuffer(data[16:], dtype="<f8").reshape(m, m).astype(np.float64)


def solve_green(op: KilledOperator, settings: SolverSettings | None = None) -> GreenOperator:
    """Solve ``A g(., y) = e_y`` for every ``y``.

    The kernel is symmetrised by averaging with its transpose after checking
    that the raw asymmetry is at most ``10 * tol``.

    :param op: Killed operator
    :param settings: Solver settings
    :returns: The Green's operator
    :rtype: GreenOperator
    :raises SingularOperatorError: if a component of the domain has no exit
    :raises ToleranceError: if the residual or asymmetry exceed tolerance
    """
    settings = settings or SolverSettings()
    columns = np.arange(op.size)
    kernel = solve_green_columns(op, columns, settings)
    residual = float(np.max(np.abs(op.matrix @ kernel - np.eye(op.size))))
    if residual > settings.tol:
        raise ToleranceError(f"Green residual {residual:.3e} exceeds tol {settings.tol}")
    asymmetry = float(np.max(np.abs(kernel - kernel.T)))
    if asymmetry > 10 * settings.tol:
        raise ToleranceError(f"Green asymmetry {asymmetry:.3e} exceeds 10*tol")
    kernel = 0.5 * (kernel + kernel.T)
    logger.info("solved Green on %d rows, residual %.2e", op.size, residual)
    return GreenOperator(op=op, kernel=kernel, residual=residual)


def solve_green_columns(
    op: KilledOperator,
    columns: NDArray[np.int64] | Sequence[int],
    settings: SolverSettings | None = None,
) -> NDArray[np.float64]:
    """Columns ``g(., y)`` for the given operator rows ``y``.

    Sparse direct factorisation up to ``settings.direct_limit`` rows, conjugate
    gradients with a Jacobi preconditioner beyond.

    :returns: Array of shape ``(m, len(columns))``
    :rtype: NDArray[np.float64]
    """
    settings = settings or SolverSettings()
    op.check_nonsingular()
    columns = np.asarray(columns, dtype=np.int64)
    rhs = np.zeros((op.size, columns.size))
    rhs[columns, np.arange(columns.size)] = 1.0
    if op.size <= settings.direct_limit:
        factor = splinalg.splu(op.matrix.tocsc())
        return np.asarray(factor.solve(rhs), dtype=np.float64)
    return _cg_columns(op, rhs, settings)


# Private functions


def _cg_columns(
    op: KilledOperator, rhs: NDArray[np.float64], settings: SolverSettings
) -> NDArray[np.float64]:
    jacobi = sparse.diags(1.0 / op.matrix.diagonal())
    out = np.empty_like(rhs)
    for j in range(rhs.shape[1]):
        solution, info = splinalg.cg(
            op.matrix,
            rhs[:, j],
            rtol=settings.tol,
            maxiter=settings.cg_maxiter,
            M=jacobi,
        )
        if info != 0:
            raise ToleranceError(f"conjugate gradients did not converge (info={info})")
        out[:, j] = solution
    return out
