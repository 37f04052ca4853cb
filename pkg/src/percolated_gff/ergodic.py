"""Ergodic averages of local observables over boxes and balls.

An observable is a function of the environment seen from a site. A handful
of named observables cover the quantities the experiments need; any callable
``(geom, sites) -> values`` works as well.
"""

import logging
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import special

from percolated_gff.cluster import ClusterGeometry
from percolated_gff.errors import ConfigError, EmptyRegionError

logger = logging.getLogger(__name__)

Observable = Callable[[ClusterGeometry, NDArray[np.int64]], NDArray[np.float64]]


@dataclass(frozen=True)
class Region:
    """Box (``shape="box"``) or Euclidean ball in macroscopic coordinates.

    The lattice region at scale ``n`` is ``{z : z / n in region}``.
    """

    center: tuple[float, ...]
    radius: float  # half-width for boxes
    shape: str = "box"

    # Public methods

    def sites(self, n: float) -> NDArray[np.int64]:
        """Lattice sites of the region scaled by ``n``."""
        d = len(self.center)
        center = n * np.asarray(self.center)
        reach = n * self.radius
        axes = [
            np.arange(int(np.ceil(c - reach)), int(np.floor(c + reach)) + 1)
            for c in center
        ]
        grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        if self.shape == "ball":
            inside = np.sum((grid - center) ** 2, axis=1) < reach**2
            grid = grid[inside]
        elif self.shape != "box":
            raise ConfigError(f"unknown region shape {self.shape!r}")
        return grid.astype(np.int64).reshape(-1, d)

    def volume(self) -> float:
        """Lebesgue measure of the macroscopic region."""
        d = len(self.center)
        if self.shape == "box":
            return float((2.0 * self.radius) ** d)
        return float(np.pi ** (d / 2) / _gamma_half(d) * self.radius**d)


class ErgodicReport(NamedTuple):
    """Result of a Krengel-Pyke sweep over a family of balls."""

    sup_deviation: float
    drift: float
    averages: list[float]


# Public functions


def ergodic_average(
    geom: ClusterGeometry,
    observable: str | Observable,
    region: Region,
    n: float,
) -> float:
    """Average of ``observable`` over the sites of ``region`` scaled by ``n``.

    :param geom: Cluster geometry (carries the environment)
    :param observable: Named observable or callable
    :param region: Macroscopic region
    :param n: Scale
    :returns: ``sum(h(tau_x omega)) / #sites``
    :rtype: float
    """
    sites = _checked_sites(geom, region, n)
    values = resolve_observable(observable)(geom, sites)
    return float(np.mean(values))


def krengel_pyke_sweep(
    geom: ClusterGeometry,
    observable: str | Observable,
    n: float,
    balls: Sequence[Region],
    reference_mean: float,
) -> ErgodicReport:
    """Uniform ergodic deviation over a family of balls.

    For every ball ``B`` computes ``n^-d * sum_{x in nB} h(tau_x omega)`` and
    compares it with ``|B| * reference_mean``. ``drift`` is the deviation of
    the plain average over the union of all balls.
    """
    h = resolve_observable(observable)
    d = geom.env.d
    deviations = []
    averages = []
    pooled = []
    for ball in balls:
        sites = _checked_sites(geom, ball, n)
        values = h(geom, sites)
        pooled.append(values)
        averages.append(float(np.mean(values)))
        normalised = float(np.sum(values)) / n**d
        deviations.append(abs(normalised - ball.volume() * reference_mean))
    drift = abs(float(np.mean(np.concatenate(pooled))) - reference_mean)
    return ErgodicReport(max(deviations), drift, averages)


def resolve_observable(observable: str | Observable) -> Observable:
    """Look up a named observable: ``one``, ``cluster``, ``conductance``,
    ``mu``, ``nu`` or ``theta``."""
    if callable(observable):
        return observable
    table: dict[str, Observable] = {
        "cluster": _in_cluster,
        "conductance": _forward_conductance,
        "mu": lambda geom, sites: _on_cluster(geom, sites, geom.mu),
        "nu": lambda geom, sites: _on_cluster(geom, sites, geom.nu),
        "one": lambda geom, sites: np.ones(len(sites)),
        "theta": lambda geom, sites: _on_cluster(geom, sites, geom.theta),
    }
    if observable not in table:
        raise ConfigError(f"unknown observable {observable!r}; expected {sorted(table)}")
    return table[observable]


# Private functions


def _checked_sites(geom: ClusterGeometry, region: Region, n: float) -> NDArray[np.int64]:
    sites = region.sites(n)
    if len(sites) == 0:
        raise EmptyRegionError(f"region {region} contains no site at scale {n}")
    if np.any(np.abs(sites) > geom.env.L):
        raise ConfigError(f"region {region} at scale {n} leaves the box")
    return sites


def _forward_conductance(geom: ClusterGeometry, sites: NDArray[np.int64]) -> NDArray[np.float64]:
    env = geom.env
    total = np.zeros(len(sites))
    for axis, weights in enumerate(env.weights):
        inside = sites[:, axis] < env.L
        total[inside] += weights[tuple((sites[inside] + env.L).T)]
    return total


def _gamma_half(d: int) -> float:
    return float(special.gamma(d / 2 + 1))


def _in_cluster(geom: ClusterGeometry, sites: NDArray[np.int64]) -> NDArray[np.float64]:
    return geom.contains(sites).astype(np.float64)


def _on_cluster(
    geom: ClusterGeometry, sites: NDArray[np.int64], values: NDArray[np.float64]
) -> NDArray[np.float64]:
    rows = geom.rows_of(sites)
    out = np.zeros(len(sites))
    out[rows >= 0] = values[rows[rows >= 0]]
    return out
