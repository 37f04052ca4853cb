"""Exact sampling of the inhomogeneous discrete Gaussian free field.

With ``A = L L^T`` the dense Cholesky factorisation of the killed operator,
``phi = L^-T xi`` has covariance ``A^-1 = g``. Replica ``r`` draws ``xi`` from
the stream ``("field", r)`` so any replica can be regenerated on its own.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from percolated_gff.domain import ScaledDomain
from percolated_gff.errors import ProvenanceError, SingularOperatorError
from percolated_gff.green import KilledOperator
from percolated_gff.rng import CounterStream

logger = logging.getLogger(__name__)


class FieldProvenance(NamedTuple):
    """Everything needed to regenerate a field sample."""

    seed: int
    env_id: str
    n: int | None
    replica: int


@dataclass(frozen=True, eq=False)
class FieldSample:
    """One DGFF realisation on the rows of a killed operator; zero elsewhere."""

    values: NDArray[np.float64]
    op: KilledOperator
    provenance: FieldProvenance

    # Public methods

    def on_cells(self, domain: ScaledDomain) -> NDArray[np.float64]:
        """Field value carried by each cell of the ``n^-1``-grid (cell order)."""
        return self.value_at(domain.cell_sites())

    def value_at(self, sites: NDArray[np.int64]) -> NDArray[np.float64]:
        """Values at environment sites, 0 off ``Lambda`` ∩ cluster."""
        local = self.op.local_rows(np.asarray(sites, dtype=np.int64))
        return np.where(local >= 0, self.values[np.maximum(local, 0)], 0.0)


# Public functions


def load_fields(path: Path, op: KilledOperator) -> list[FieldSample]:
    """Read fields written by :func:`save_fields` and attach them to ``op``.

    :raises ProvenanceError: if the sidecar does not match ``op``
    """
    path = path.with_suffix(".npy")
    meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    if meta["env_id"] != op.geom.env.env_id or meta["rows"] != op.size or meta["n"] != op.n:
        raise ProvenanceError(f"fields in {path} were sampled on a different domain")
    values = np.load(path, allow_pickle=False)
    return [
        FieldSample(
            values=row,
            op=op,
            provenance=FieldProvenance(meta["seed"], meta["env_id"], meta["n"], replica),
        )
        for row, replica in zip(values, meta["replicas"])
    ]


def sample_dgff(
    op: KilledOperator, count: int, seed: int = 0, first: int = 0
) -> list[FieldSample]:
    """Draw ``count`` replicas of the DGFF with covariance ``A^-1``.

    :param op: Killed operator
    :param count: Number of replicas
    :param seed: Master seed
    :param first: Index of the first replica
    :returns: Replicas ``first .. first+count-1``
    :rtype: list[FieldSample]
    :raises SingularOperatorError: if ``A`` is not positive definite
    """
    op.check_nonsingular()
    try:
        factor = linalg.cholesky(op.matrix.toarray(), lower=True)
    except linalg.LinAlgError as exc:
        raise SingularOperatorError(f"Cholesky factorisation failed: {exc}") from exc
    stream = CounterStream(seed, "field")
    noise = np.empty((op.size, count))
    for column in range(count):
        noise[:, column] = stream.child(first + column).normals(0, op.size)
    phi = linalg.solve_triangular(factor.T, noise, lower=False)
    env_id = op.geom.env.env_id
    logger.debug("sampled %d DGFF replicas on %d rows", count, op.size)
    return [
        FieldSample(
            values=phi[:, column].copy(),
            op=op,
            provenance=FieldProvenance(seed, env_id, op.n, first + column),
        )
        for column in range(count)
    ]


def save_fields(fields: list[FieldSample], path: Path) -> Path:
    """Write field values as ``.npy`` with a JSON provenance sidecar; returns the array path."""
    if not fields:
        raise ProvenanceError("no fields to save")
    head = fields[0].provenance
    if any(f.op is not fields[0].op or f.provenance.seed != head.seed for f in fields):
        raise ProvenanceError("fields to save must share operator and seed")
    path = path.with_suffix(".npy")
    path.parent.mkdir(parents=True, exist_ok=True)
    np.save(path, np.stack([f.values for f in fields]), allow_pickle=False)
    meta = dict(head._asdict()) | {
        "rows": fields[0].op.size,
        "replicas": [f.provenance.replica for f in fields],
    }
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2), encoding="utf-8")
    return path

