"""Experiment configuration files.

The format is flat ``key = value`` text. Blank lines and ``#`` comments are
ignored and lists are comma separated::

    experiment = lclt
    law = bernoulli:p=0.75
    n = 16,32,64
    eps = 0.2
    delta = 0.3
    seeds = 1,2,3
"""

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from percolated_gff.environment import EnvironmentLaw, parse_law
from percolated_gff.errors import ConfigError

logger = logging.getLogger(__name__)

EXPERIMENTS = (
    "covariance-limits",
    "ergodic",
    "gibbs",
    "gmc",
    "green-bounds",
    "heatkernel",
    "lclt",
    "wick-scaling",
)
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class ExperimentConfig:  # pylint: disable=too-many-instance-attributes
    """All parameters of one experiment run.

    Keys not used by an experiment are ignored by it but still validated.
    """

    experiment: str
    d: int = 2
    law: str = "bernoulli:p=1"
    contrast_law: str | None = None  # second law for percolation contrasts
    n: tuple[int, ...] = (16, 32)
    eps: tuple[float, ...] = (0.2,)
    delta: float = 0.3  # distance to the boundary in the LCLT window
    gamma: float = 0.5
    function: str = "exp"  # F for the covariance limits
    potential: str = "exp"  # V for Gibbs reweighting
    k: tuple[int, ...] = (1, 2)
    s: float = 0.5  # order of the H^-s norm in wick-scaling
    test: str = "one"  # test function f (or the GMC region)
    gibbs_test: str = "one"  # cut-off g of the Gibbs interaction
    observable: str = "conductance"  # ergodic sweeps
    replicas: int = 200
    seeds: tuple[int, ...] = (0,)
    walkers: int = 2000
    modes: int = 1024
    resolution: int = 12  # points per axis of macroscopic grids
    radii: tuple[int, ...] = (8, 16, 32)
    diffusivity: float | None = 2.0  # a = diffusivity * I; None calibrates by walks
    out: Path = Path("results.csv")
    format: str = "csv"

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}"
            )
        if self.d not in (2, 3):
            raise ConfigError(f"dimension d={self.d} must be 2 or 3")
        if self.d == 3 and self.experiment not in ("green-bounds", "ergodic", "heatkernel"):
            raise ConfigError(f"experiment {self.experiment} is only defined for d=2")
        _check_monotone("n", self.n, increasing=True)
        _check_monotone("eps", self.eps, increasing=False)
        if any(n < 2 for n in self.n):
            raise ConfigError("every scale n must be at least 2")
        if any(not 0 < e < 1 for e in self.eps):
            raise ConfigError("every eps must lie in (0, 1)")
        if self.experiment == "lclt" and any(e >= self.delta for e in self.eps):
            raise ConfigError(
                f"LCLT window needs eps < delta, got eps={self.eps} delta={self.delta}"
            )
        if self.experiment == "lclt" and self.delta >= 0.5:
            raise ConfigError(f"LCLT window is empty for delta={self.delta} >= 1/2")
        if self.replicas < 2 or self.walkers < 2:
            raise ConfigError("replicas and walkers must be at least 2")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.s < 0:
            raise ConfigError(f"Sobolev order s={self.s} must be non-negative")
        if any(k < 1 for k in self.k):
            raise ConfigError("Wick orders k must be at least 1")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}; expected {FORMATS}")
        self.environment_law()
        if self.contrast_law is not None:
            parse_law(self.contrast_law)

    # Public methods

    def environment_law(self, contrast: bool = False) -> EnvironmentLaw:
        """The (seed-free) law or the contrast law."""
        text = self.contrast_law if contrast else self.law
        if text is None:
            raise ConfigError("no contrast_law configured")
        return parse_law(text)

    def parameters(self) -> dict[str, Any]:
        """Values echoed into every result record."""
        return {
            f.name: getattr(self, f.name)
            for f in dataclasses.fields(self)
            if f.name not in ("out", "format", "seeds", "experiment")
        }

    def replace(self, **changes: Any) -> "ExperimentConfig":
        """Copy with ``changes`` applied (and validated)."""
        return dataclasses.replace(self, **changes)


# Public functions


def load_config(path: Path, overrides: Mapping[str, str] | None = None) -> ExperimentConfig:
    """Read a configuration file; ``overrides`` are raw ``key -> value`` strings.

    :raises ConfigError: if the file is missing or malformed
    """
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    return parse_config(text, source=str(path), overrides=overrides)


def parse_config(
    text: str, source: str = "<string>", overrides: Mapping[str, str] | None = None
) -> ExperimentConfig:
    """Parse ``key = value`` lines into an :class:`ExperimentConfig`."""
    raw: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got {line!r}")
        raw[key.strip()] = value.strip()
    raw.update(overrides or {})
    known = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    values: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"{source}: unknown key {key!r}")
        values[key] = _convert(key, value, known[key].type, source)
    if "experiment" not in values:
        raise ConfigError(f"{source}: missing key 'experiment'")
    return ExperimentConfig(**values)


# Private functions


def _check_monotone(name: str, values: tuple[float, ...], increasing: bool) -> None:
    if not values:
        raise ConfigError(f"{name} list must not be empty")
    pairs = zip(values, values[1:])
    ok = all(a < b for a, b in pairs) if increasing else all(a > b for a, b in pairs)
    if not ok:
        order = "increasing" if increasing else "decreasing"
        raise ConfigError(f"{name} list must be strictly {order}: {values}")


def _convert(key: str, value: str, annotation: Any, source: str) -> Any:
    kind = getattr(annotation, "__name__", None) if isinstance(annotation, type) else None
    text = str(annotation)
    try:
        if text.startswith("tuple[int"):
            return tuple(int(v) for v in value.split(","))
        if text.startswith("tuple[float"):
            return tuple(float(v) for v in value.split(","))
        if text.startswith("float | None"):
            return None if value in ("auto", "none") else float(value)
        if text.startswith("str | None"):
            return value or None
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if annotation is Path:
            return Path(value)
        return value
    except ValueError as exc:
        raise ConfigError(f"{source}: bad value {value!r} for {key}") from exc
