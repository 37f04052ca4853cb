"""Result records shared by all experiments.

One record is one row: ``(experiment, parameters, metric, value, stderr,
seed, wall_time)``. Parameters are echoed as a compact JSON object so the CSV
header is the same for every experiment.
"""

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Iterable, NamedTuple, Sequence

from percolated_gff.errors import ConfigError

FIELDS = ("experiment", "parameters", "metric", "value", "stderr", "seed", "wall_time")


class ResultRecord(NamedTuple):
    """A single metric of one (parameter tuple, seed) run."""

    experiment: str
    parameters: dict[str, Any]
    metric: str
    value: float
    stderr: float
    seed: int
    wall_time: float = 0.0

    # Public methods

    def as_row(self) -> dict[str, Any]:
        """Flat, JSON-compatible mapping with the fixed field order."""
        return {
            "experiment": self.experiment,
            "parameters": _encode_parameters(self.parameters),
            "metric": self.metric,
            "value": _encode_float(self.value),
            "stderr": _encode_float(self.stderr),
            "seed": self.seed,
            "wall_time": round(self.wall_time, 6),
        }


# Public functions


def digest_records(records: Iterable[ResultRecord]) -> str:
    """SHA-256 over every field except the wall time."""
    digest = hashlib.sha256()
    for record in records:
        row = record.as_row()
        del row["wall_time"]
        digest.update(json.dumps(row, sort_keys=True).encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()


def read_records(path: Path) -> list[ResultRecord]:
    """Load records written by :func:`write_records` (CSV or JSON by suffix).

    :raises ConfigError: if the file is missing or has a foreign header
    """
    if not path.is_file():
        raise ConfigError(f"records file not found: {path}")
    with path.open(encoding="utf-8", newline="") as handle:
        if path.suffix == ".json":
            rows = json.load(handle)
        else:
            reader = csv.DictReader(handle)
            if tuple(reader.fieldnames or ()) != FIELDS:
                raise ConfigError(f"{path}: unexpected header {reader.fieldnames}")
            rows = list(reader)
    return [_decode_row(row) for row in rows]


def write_records(records: Sequence[ResultRecord], path: Path, fmt: str = "csv") -> Path:
    """Write records as CSV (header row first) or a JSON array of objects.

    :param records: Records in their final order
    :param path: Output path; the suffix is replaced to match ``fmt``
    :param fmt: ``csv`` or ``json``
    :returns: The path written
    :rtype: Path
    """
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    path = path.with_suffix(f".{fmt}")
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [record.as_row() for record in records]
    with path.open("w", encoding="utf-8", newline="") as handle:
        if fmt == "json":
            json.dump(rows, handle, indent=1)
            handle.write("\n")
        else:
            writer = csv.DictWriter(handle, fieldnames=FIELDS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
    return path


# Private functions


def _decode_row(row: dict[str, Any]) -> ResultRecord:
    return ResultRecord(
        experiment=str(row["experiment"]),
        parameters=json.loads(row["parameters"]),
        metric=str(row["metric"]),
        value=float(row["value"]),
        stderr=float(row["stderr"]),
        seed=int(row["seed"]),
        wall_time=float(row["wall_time"]),
    )


def _encode_float(value: float) -> str:
    # repr keeps every bit; nan/inf stay readable by float()
    return "nan" if math.isnan(value) else repr(float(value))


def _encode_parameters(parameters: dict[str, Any]) -> str:
    def default(value: Any) -> Any:
        if isinstance(value, Path):
            return str(value)
        return repr(value)

    return json.dumps(parameters, sort_keys=True, separators=(",", ":"), default=default)
