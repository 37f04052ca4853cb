"""Random conductance environments on finite boxes of Z^d.

An :class:`Environment` stores one conductance per nearest-neighbour edge of
the box ``[-L, L]^d``. Edges are kept in ``d`` arrays, one per axis:
``weights[a][x]`` is the conductance of the edge ``{x, x + e_a}``, so each
undirected edge is stored exactly once. The canonical edge index runs over the
axes in order and, within an axis, over the array in C order; it is the
counter used for the random streams.
"""

import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np
from numpy.typing import NDArray

from percolated_gff.errors import ConfigError, LawError
from percolated_gff.rng import CounterStream

logger = logging.getLogger(__name__)

BOND_THRESHOLD_2D = 0.5
LAW_KINDS = ("bernoulli", "bernoulli-pareto", "constant")


@dataclass(frozen=True)
class EnvironmentLaw:
    """I.i.d. law of a single conductance.

    ``bernoulli``: open with probability ``p`` and weight ``w0``.
    ``bernoulli-pareto``: open with probability ``p``; open weights have density
    ``alpha * w0**alpha * w**(-alpha-1)`` on ``[w0, inf)``.
    ``constant``: every edge has weight ``w0``.
    """

    kind: str = "bernoulli"
    p: float = 1.0
    w0: float = 1.0
    alpha: float = math.inf  # Pareto tail index
    seed: int = 0
    p_mom: float | None = None  # moment exponents recorded for the p-q condition
    q_mom: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in LAW_KINDS:
            raise LawError(f"unknown law kind {self.kind!r}; expected {LAW_KINDS}")
        if not 0.0 <= self.p <= 1.0:
            raise LawError(f"bond probability p={self.p} is outside [0, 1]")
        if not self.w0 > 0.0:
            raise LawError(f"base weight w0={self.w0} must be positive")
        if self.kind == "bernoulli-pareto" and not self.alpha > 0.0:
            raise LawError(f"Pareto tail index alpha={self.alpha} must be positive")

    # Public methods

    @property
    def descriptor(self) -> str:
        """Space-free text form, e.g. ``bernoulli:p=0.7:w0=1``."""
        parts = [self.kind]
        if self.kind != "constant":
            parts.append(f"p={self.p!r}")
        parts.append(f"w0={self.w0!r}")
        if self.kind == "bernoulli-pareto":
            parts.append(f"alpha={self.alpha!r}")
        return ":".join(parts)

    def moment(self, s: float) -> float:
        """Analytic ``E[omega(e)^s]`` (closed edges contribute 0 for s > 0).

        :param s: Positive moment order
        :returns: The moment, ``inf`` when it diverges
        :rtype: float
        """
        if self.kind == "constant":
            return float(self.w0**s)
        if self.kind == "bernoulli":
            return float(self.p * self.w0**s)
        if s >= self.alpha:
            return math.inf
        return float(self.p * self.alpha * self.w0**s / (self.alpha - s))

    def moment_exponents(self) -> tuple[float, float]:
        """Return ``(p_mom, q_mom)``, derived from the law unless given explicitly.

        Open weights are bounded below by ``w0``, so inverse moments of every
        order exist on open edges and ``q_mom`` defaults to infinity.
        """
        p_default = self.alpha if self.kind == "bernoulli-pareto" else math.inf
        p_mom = self.p_mom if self.p_mom is not None else p_default
        q_mom = self.q_mom if self.q_mom is not None else math.inf
        return p_mom, q_mom

    def with_seed(self, seed: int) -> "EnvironmentLaw":
        """Copy of the law with another seed."""
        return EnvironmentLaw(
            self.kind, self.p, self.w0, self.alpha, seed, self.p_mom, self.q_mom
        )


@dataclass(frozen=True, eq=False)
class Environment:
    """Conductances on the nearest-neighbour edges of ``[-L, L]^d``."""

    d: int
    L: int
    weights: tuple[NDArray[np.float64], ...]
    law: EnvironmentLaw = field(default_factory=EnvironmentLaw)

    # Public methods

    @property
    def env_id(self) -> str:
        """Short content hash identifying the environment."""
        digest = hashlib.sha256()
        digest.update(f"{self.d} {self.L} {self.law.descriptor}".encode("utf-8"))
        for array in self.weights:
            digest.update(np.ascontiguousarray(array).tobytes())
        return digest.hexdigest()[:16]

    def edge_count(self) -> int:
        """Number of edges of the box."""
        return sum(int(array.size) for array in self.weights)

    def iter_open_edges(self) -> Iterator[tuple[tuple[int, ...], tuple[int, ...], float]]:
        """Yield ``(x, y, weight)`` for every open edge in canonical order."""
        for axis, array in enumerate(self.weights):
            for position in zip(*np.nonzero(array)):
                x = tuple(int(c) - self.L for c in position)
                y = tuple(c + (1 if a == axis else 0) for a, c in enumerate(x))
                yield x, y, float(array[position])

    def open_fraction(self) -> float:
        """Fraction of edges with positive conductance."""
        opened = sum(int(np.count_nonzero(array)) for array in self.weights)
        return opened / self.edge_count()

    @property
    def side(self) -> int:
        """Number of sites per axis, ``2L + 1``."""
        return 2 * self.L + 1

    def weight(self, x: tuple[int, ...], y: tuple[int, ...]) -> float:
        """Conductance of the edge ``{x, y}``; 0 for non-adjacent pairs."""
        diff = [b - a for a, b in zip(x, y)]
        if sorted(abs(c) for c in diff) != [0] * (self.d - 1) + [1]:
            return 0.0
        axis = next(a for a, c in enumerate(diff) if c != 0)
        low = x if diff[axis] == 1 else y
        index = tuple(c + self.L for c in low)
        shape = self.weights[axis].shape
        if any(i < 0 or i >= s for i, s in zip(index, shape)):
            return 0.0
        return float(self.weights[axis][index])


# Public functions


def edge_shapes(d: int, L: int) -> list[tuple[int, ...]]:
    """Array shape of the edge weights along each axis of ``[-L, L]^d``."""
    side = 2 * L + 1
    return [
        tuple(side - 1 if a == axis else side for a in range(d)) for axis in range(d)
    ]


def load_snapshot(path: Path) -> Environment:
    """Read an environment snapshot.

    The header is ``d L law-descriptor seed``. When edge lines follow, the
    open edges are read verbatim; otherwise the environment is regenerated
    from the stored law and seed, which reproduces the weights bit for bit.

    :param path: Snapshot file
    :returns: The environment
    :rtype: Environment
    """
    lines = [
        line
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    ]
    if not lines:
        raise ConfigError(f"empty environment snapshot: {path}")
    header = lines[0].split()
    if len(header) != 4:
        raise ConfigError(f"malformed snapshot header in {path}: {lines[0]!r}")
    d, L = int(header[0]), int(header[1])
    law = parse_law(header[2]).with_seed(int(header[3]))
    if len(lines) == 1:
        return sample_environment(law, d, L)
    weights = [np.zeros(shape) for shape in edge_shapes(d, L)]
    for line in lines[1:]:
        fields = line.split()
        try:
            if len(fields) != 2 * d + 1:
                raise ValueError("wrong field count")
            x = [int(c) for c in fields[:d]]
            y = [int(c) for c in fields[d : 2 * d]]
            weight = float(fields[-1])
        except ValueError as exc:
            raise ConfigError(f"malformed edge line in {path}: {line!r}") from exc
        axis = next((a for a in range(d) if y[a] != x[a]), None)
        diff = [b - a for a, b in zip(x, y)]
        if axis is None or sorted(abs(c) for c in diff) != [0] * (d - 1) + [1]:
            raise ConfigError(f"malformed edge in {path}: {line!r} is not a lattice edge")
        index = tuple(min(a, b) + L for a, b in zip(x, y))
        if any(i < 0 or i >= s for i, s in zip(index, weights[axis].shape)):
            raise ConfigError(f"malformed edge in {path}: {line!r} leaves the box")
        weights[axis][index] = weight
    return Environment(d, L, tuple(weights), law)


def parse_law(text: str) -> EnvironmentLaw:
    """Parse a law descriptor such as ``bernoulli-pareto:p=0.9:alpha=2.5``.

    :param text: Descriptor; ``kind`` followed by ``:key=value`` items
    :returns: The law (seed 0)
    :rtype: EnvironmentLaw
    """
    kind, *items = text.strip().split(":")
    values: dict[str, float] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or key not in ("p", "w0", "alpha", "p_mom", "q_mom"):
            raise LawError(f"bad law item {item!r} in {text!r}")
        try:
            values[key] = float(value)
        except ValueError as exc:
            raise LawError(f"bad number {value!r} in {text!r}") from exc
    return EnvironmentLaw(
        kind=kind,
        p=values.get("p", 1.0),
        w0=values.get("w0", 1.0),
        alpha=values.get("alpha", math.inf),
        p_mom=values.get("p_mom"),
        q_mom=values.get("q_mom"),
    )


def sample_environment(law: EnvironmentLaw, d: int, L: int) -> Environment:
    """Draw every edge of ``[-L, L]^d`` independently from ``law``.

    Edge ``i`` (canonical index) uses position ``i`` of the ``edges/open`` and
    ``edges/weight`` streams of ``law.seed``, so the result is a pure function
    of ``(seed, law, d, L)``.

    :param law: Conductance law, including the seed
    :param d: Dimension, 2 or 3
    :param L: Box half-width, at least 1
    :returns: The sampled environment
    :rtype: Environment
    """
    if d not in (2, 3):
        raise ConfigError(f"dimension d={d} is not supported (use 2 or 3)")
    if L < 1:
        raise ConfigError(f"box half-width L={L} must be at least 1")
    if d == 2 and law.kind != "constant" and law.p <= BOND_THRESHOLD_2D:
        logger.warning(
            "p=%s is not supercritical for d=2 bond percolation (p_c = 1/2)", law.p
        )
    shapes = edge_shapes(d, L)
    total = sum(math.prod(shape) for shape in shapes)
    values = _draw_weights(law, total)
    weights = []
    start = 0
    for shape in shapes:
        size = math.prod(shape)
        weights.append(values[start : start + size].reshape(shape))
        start += size
    logger.debug("sampled %d edges for %s in d=%d, L=%d", total, law.descriptor, d, L)
    return Environment(d, L, tuple(weights), law)


def save_snapshot(env: Environment, path: Path, include_edges: bool = True) -> Path:
    """Write ``env`` in the snapshot text format.

    :param env: Environment to store
    :param path: Target file
    :param include_edges: When False only the header is written and the loader
        regenerates the weights from the seed
    :returns: The written path
    :rtype: Path
    """
    lines = [f"{env.d} {env.L} {env.law.descriptor} {env.law.seed}"]
    if include_edges:
        for x, y, weight in env.iter_open_edges():
            coords = " ".join(str(c) for c in x + y)
            lines.append(f"{coords} {weight!r}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# Private functions


def _draw_weights(law: EnvironmentLaw, count: int) -> NDArray[np.float64]:
    if law.kind == "constant":
        return np.full(count, law.w0)
    opened = CounterStream(law.seed, "edges/open").uniforms(0, count) < law.p
    if law.kind == "bernoulli":
        return np.where(opened, law.w0, 0.0)
    u = CounterStream(law.seed, "edges/weight").uniforms(0, count)
    pareto = law.w0 * u ** (-1.0 / law.alpha)
    return np.where(opened, pareto, 0.0)
