"""Variable-speed random walks on the cluster.

The walk holds at ``x`` for an ``Exp(mu(x))`` time and then jumps to a
neighbour ``y`` with probability ``omega({x, y}) / mu(x)``. Walker ``w`` at step
``s`` reads positions ``2w`` (holding time) and ``2w + 1`` (jump) of the stream
``child(s)``, so a walker's path does not depend on how walkers are chunked
across worker threads.
"""

import logging
import math
from typing import NamedTuple, Sequence

import numpy as np
from joblib import Parallel, delayed
from numpy.typing import NDArray

from percolated_gff.cluster import ClusterGeometry, project_pi_n
from percolated_gff.errors import ConfigError, EmptyClusterError
from percolated_gff.green import KilledOperator
from percolated_gff.rng import CounterStream

logger = logging.getLogger(__name__)

CHUNK = 4096


class OccupationEstimate(NamedTuple):
    """Monte-Carlo estimate of a killed Green's function entry."""

    estimate: float
    stderr: float
    truncated_fraction: float  # walkers still alive at the horizon
    bias_bound: float  # bound on the mass lost to the horizon
    flagged: bool  # bias_bound > 0.1 * stderr


class SigmaEstimate(NamedTuple):
    """Empirical diffusion matrix with entrywise standard errors."""

    matrix: NDArray[np.float64]
    stderr: NDArray[np.float64]
    samples: int


class WalkOutcome(NamedTuple):
    """State of a batch of walkers when they stop."""

    positions: NDArray[np.int64]  # cluster rows, last position before exit
    occupation: NDArray[np.float64]  # time spent at the target row
    exited: NDArray[np.bool_]
    truncated: NDArray[np.bool_]


# Public functions


def calibrate_sigma(
    geoms: Sequence[ClusterGeometry],
    n: int,
    walkers: int = 2000,
    seed: int = 0,
    threads: int = 1,
) -> SigmaEstimate:
    """Estimate ``Sigma^2`` from the covariance of ``X_{n^2} / n``.

    Walkers start at ``pi_n`` of the box centre of every environment in the
    ensemble and run for time ``n^2`` without killing.

    :param geoms: Ensemble of cluster geometries
    :param n: Scale
    :param walkers: Walkers per environment
    :param seed: Master seed
    :param threads: Worker threads
    :returns: The estimate
    :rtype: SigmaEstimate
    :raises EmptyClusterError: if the ensemble is empty
    """
    if not geoms:
        raise EmptyClusterError("calibrate_sigma needs at least one environment")
    if walkers < 2:
        raise ConfigError("calibrate_sigma needs at least two walkers")
    displacements = []
    for index, geom in enumerate(geoms):
        start_site = project_pi_n(geom, n, [0.0] * geom.env.d)
        start_row = geom.row_of(start_site)
        starts = np.full(walkers, start_row, dtype=np.int64)
        stream = CounterStream(seed, "walk/sigma", (index,))
        outcome = run_walkers(geom, starts, stream, horizon=float(n * n), threads=threads)
        moved = geom.vertices[outcome.positions] - geom.vertices[start_row]
        displacements.append(moved / n)
    y = np.concatenate(displacements).astype(np.float64)
    centred = y - y.mean(axis=0)
    products = centred[:, :, None] * centred[:, None, :]
    count = len(y)
    matrix = products.sum(axis=0) / (count - 1)
    stderr = products.std(axis=0, ddof=1) / math.sqrt(count)
    logger.info("Sigma^2 estimate at n=%d from %d walkers: %s", n, count, matrix.tolist())
    return SigmaEstimate(matrix=matrix, stderr=stderr, samples=count)


def mc_green_oracle(
    op: KilledOperator,
    x: Sequence[int],
    y: Sequence[int],
    walkers: int,
    horizon: float = math.inf,
    seed: int = 0,
    threads: int = 1,
) -> OccupationEstimate:
    """Monte-Carlo occupation time of ``y`` by the walk started at ``x``.

    The walk is killed when it jumps out of the operator's domain. A finite
    ``horizon`` truncates each path; the lost mass is bounded by the fraction
    of surviving walkers times the mean occupation of walkers that reached
    ``y`` (strong Markov property), and a warning is logged when that bound
    exceeds a tenth of the standard error.

    :param op: Killed operator defining the domain
    :param x: Start site
    :param y: Target site
    :param walkers: Number of walkers
    :param horizon: Time cap per walker
    :param seed: Master seed
    :param threads: Worker threads
    :returns: The estimate
    :rtype: OccupationEstimate
    :raises ConfigError: if ``walkers`` is zero or ``x`` is outside the domain
    """
    if walkers <= 0:
        raise ConfigError("mc_green_oracle needs at least one walker")
    geom = op.geom
    x_row = geom.row_of(x)
    y_row = geom.row_of(y)
    inside = np.zeros(geom.size, dtype=bool)
    inside[op.rows] = True
    if x_row < 0 or not inside[x_row]:
        raise ConfigError(f"start site {tuple(x)} is not in the domain")
    if y_row < 0 or not inside[y_row]:
        return OccupationEstimate(0.0, 0.0, 0.0, 0.0, False)
    starts = np.full(walkers, x_row, dtype=np.int64)
    stream = CounterStream(seed, "walk/green")
    outcome = run_walkers(
        geom, starts, stream, horizon=horizon, inside=inside, target=y_row, threads=threads
    )
    occupation = outcome.occupation
    estimate = float(occupation.mean())
    stderr = float(occupation.std(ddof=1) / math.sqrt(walkers)) if walkers > 1 else math.inf
    truncated_fraction = float(outcome.truncated.mean())
    visited = occupation[occupation > 0]
    return_mass = float(visited.mean()) if visited.size else 0.0
    bias_bound = truncated_fraction * return_mass
    flagged = bias_bound > 0.1 * stderr
    if flagged:
        logger.warning(
            "horizon %.3g truncates %.2f%% of walkers; bias bound %.3g > 0.1 stderr",
            horizon,
            100 * truncated_fraction,
            bias_bound,
        )
    return OccupationEstimate(estimate, stderr, truncated_fraction, bias_bound, flagged)


def run_walkers(
    geom: ClusterGeometry,
    starts: NDArray[np.int64],
    stream: CounterStream,
    horizon: float = math.inf,
    inside: NDArray[np.bool_] | None = None,
    target: int = -1,
    threads: int = 1,
) -> WalkOutcome:
    """Run independent walkers until they exit ``inside`` or reach the horizon.

    :param geom: Cluster geometry
    :param starts: Start rows, one per walker
    :param stream: Base stream; step ``s`` uses ``stream.child(s)``
    :param horizon: Time cap
    :param inside: Rows the walk may occupy (all rows if None)
    :param target: Row whose occupation time is recorded
    :param threads: Worker threads
    :returns: Per-walker outcome, in walker order
    :rtype: WalkOutcome
    """
    if math.isinf(horizon) and inside is None:
        raise ConfigError("an unkilled walk needs a finite horizon")
    if inside is None:
        inside = np.ones(geom.size, dtype=bool)
    starts = np.asarray(starts, dtype=np.int64)
    bounds = [(lo, min(lo + CHUNK, len(starts))) for lo in range(0, len(starts), CHUNK)]
    parts = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_run_chunk)(geom, starts[lo:hi], lo, stream, horizon, inside, target)
        for lo, hi in bounds
    )
    if not parts:
        empty = np.zeros(0)
        return WalkOutcome(starts.copy(), empty, empty.astype(bool), empty.astype(bool))
    return WalkOutcome(*(np.concatenate(field) for field in zip(*parts)))


# Private functions


def _jump_slots(
    cumulative: NDArray[np.float64], level: NDArray[np.float64]
) -> NDArray[np.int64]:
    # the last open slot is the first one at which the cumulative rate reaches its total
    last_open = np.argmax(cumulative >= cumulative[:, -1:], axis=1)
    slot = np.sum(cumulative <= level[:, None], axis=1)
    return np.asarray(np.minimum(slot, last_open), dtype=np.int64)


def _run_chunk(
    geom: ClusterGeometry,
    starts: NDArray[np.int64],
    first: int,
    stream: CounterStream,
    horizon: float,
    inside: NDArray[np.bool_],
    target: int,
) -> WalkOutcome:
    neighbours, weights = geom.neighbor_table
    cumulative = np.cumsum(weights, axis=1)
    count = len(starts)
    position = starts.copy()
    clock = np.zeros(count)
    occupation = np.zeros(count)
    exited = np.zeros(count, dtype=bool)
    truncated = np.zeros(count, dtype=bool)
    active = np.ones(count, dtype=bool)
    step = 0
    while active.any():
        draws = stream.child(step).uniforms(2 * first, 2 * count)
        idx = np.nonzero(active)[0]
        here = position[idx]
        rate = geom.mu[here]
        hold = -np.log(draws[2 * idx]) / rate
        remaining = horizon - clock[idx]
        spent = np.minimum(hold, remaining)
        occupation[idx] += np.where(here == target, spent, 0.0)
        clock[idx] += spent
        over = hold >= remaining
        truncated[idx[over]] = True
        active[idx[over]] = False
        jumping = idx[~over]
        if jumping.size:
            level = draws[2 * jumping + 1] * geom.mu[position[jumping]]
            slot = _jump_slots(cumulative[position[jumping]], level)
            nxt = neighbours[position[jumping], slot]
            leaving = ~inside[nxt]
            exited[jumping[leaving]] = True
            active[jumping[leaving]] = False
            position[jumping[~leaving]] = nxt[~leaving]
        step += 1
    return WalkOutcome(position, occupation, exited, truncated)
