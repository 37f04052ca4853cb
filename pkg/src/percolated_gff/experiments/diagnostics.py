"""Fit diagnostics: Green's function bounds, heat kernels and ergodic sweeps."""

import itertools
import logging

import numpy as np

from percolated_gff.bounds import fit_diagonal_growth, fit_green_bounds
from percolated_gff.cluster import chemical_ball, chemical_distances, project_pi_n
from percolated_gff.ergodic import Region, ergodic_average, krengel_pyke_sweep
from percolated_gff.experiments.common import Instance, build_instance
from percolated_gff.experiments.config import ExperimentConfig
from percolated_gff.experiments.records import ResultRecord
from percolated_gff.green import build_killed_operator, solve_green_columns
from percolated_gff.spectral import (
    SpectralData,
    fit_gaussian_regime,
    killed_heat_kernel,
    principal_eigenvalue_check,
    spectral_decompose,
    uniformized_heat_kernel,
)

logger = logging.getLogger(__name__)

GAUSSIAN_PAIRS = 8
SWEEP_OFFSETS = (-0.2, 0.0, 0.2)
SWEEP_RADIUS = 0.15


# Public functions


def gaussian_pairs(
    spec: SpectralData, centre: tuple[int, ...], radius: int
) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Pairs ``(centre, y)`` with ``y`` at chemical distance in ``[radius/4, radius/2]``.

    Up to eight targets, evenly spaced through the sorted candidates.
    """
    geom = spec.op.geom
    distance = chemical_distances(geom, geom.row_of(centre))[spec.op.rows]
    candidates = np.nonzero((distance >= radius / 4) & (distance <= radius / 2))[0]
    if candidates.size == 0:
        return []
    picks = candidates[np.linspace(0, candidates.size - 1, GAUSSIAN_PAIRS).astype(np.int64)]
    return [(centre, geom.site(int(spec.op.rows[p]))) for p in np.unique(picks)]


def reference_mean(instance: Instance, observable: str) -> float:
    """Expected value of a named observable.

    Analytic where the law gives it: ``1`` for ``one``, ``d E[omega]`` for the
    forward conductance and ``theta0`` for cluster membership. Other
    observables are referred to their average over the inner box.
    """
    cfg = instance.cfg
    if observable == "one":
        return 1.0
    if observable == "conductance":
        return cfg.d * instance.env.law.moment(1.0)
    if observable == "cluster":
        return instance.theta0
    inner = instance.geom.inner_half_width
    return ergodic_average(instance.geom, observable, Region((0.0,) * cfg.d, 1.0), inner)


def run_ergodic(cfg: ExperimentConfig, seed: int) -> list[ResultRecord]:
    """Krengel-Pyke sweeps of ``observable`` over a family of balls per scale.

    :param cfg: Configuration (``observable``, ``n``)
    :param seed: Environment seed
    :returns: ``sup_deviation``, ``drift`` and ``average`` per scale
    :rtype: list[ResultRecord]
    """
    instance = build_instance(cfg, seed)
    reference = reference_mean(instance, cfg.observable)
    balls = [
        Region(center, SWEEP_RADIUS, "ball")
        for center in itertools.product(SWEEP_OFFSETS, repeat=cfg.d)
    ]
    window = Region((0.0,) * cfg.d, 0.4)
    records = [instance.record("reference_mean", reference)]
    for n in cfg.n:
        report = krengel_pyke_sweep(instance.geom, cfg.observable, n, balls, reference)
        average = ergodic_average(instance.geom, cfg.observable, window, n)
        records += [
            instance.record("sup_deviation", report.sup_deviation, n=n),
            instance.record("drift", report.drift, n=n),
            instance.record("average", average, n=n),
        ]
    return records


def run_green_bounds(cfg: ExperimentConfig, seed: int) -> list[ResultRecord]:
    """Diagonal growth against ``log n`` and the off-diagonal bound fit.

    :param cfg: Configuration (``n``, ``d``)
    :param seed: Environment seed
    :returns: Records of both fits
    :rtype: list[ResultRecord]
    """
    instance = build_instance(cfg, seed)
    centre = [0.5] * cfg.d
    diagonals = {}
    for n in cfg.n:
        domain = instance.domain(n)
        op = build_killed_operator(instance.geom, domain)
        row = op.local_row(domain.project(instance.geom, centre))
        diagonals[n] = float(solve_green_columns(op, [row])[row, 0])
    growth = fit_diagonal_growth(diagonals)
    report = fit_green_bounds(instance.green(cfg.n[-1]), seed=seed)
    records = [instance.record("diagonal", value, n=n) for n, value in diagonals.items()]
    records += [
        instance.record("diagonal_slope", growth.slope),
        instance.record("diagonal_intercept", growth.intercept),
        instance.record("diagonal_r_squared", growth.r_squared),
        instance.record("bound_slope", report.slope, n=report.n),
        instance.record("bound_r_squared", report.fit.r_squared, n=report.n),
        instance.record("bound_upper_intercept", report.upper_intercept, n=report.n),
        instance.record("bound_exceedance", report.exceedance, n=report.n),
        instance.record("bound_passed", float(report.passed), n=report.n),
    ]
    return records


def run_heatkernel(cfg: ExperimentConfig, seed: int) -> list[ResultRecord]:
    """Principal-eigenvalue scaling over chemical balls and the Gaussian-regime fit.

    The fit uses the largest ball; a uniformisation evaluation of one heat
    kernel entry is reported against the spectral one.

    :param cfg: Configuration (``radii``)
    :param seed: Environment seed
    :returns: Records of both fits
    :rtype: list[ResultRecord]
    """
    instance = build_instance(cfg, seed)
    geom = instance.geom
    centre = project_pi_n(geom, 1.0, [0.0] * cfg.d)
    spectra = {
        radius: spectral_decompose(geom, geom.vertices[chemical_ball(geom, centre, radius)])
        for radius in cfg.radii
    }
    principal = principal_eigenvalue_check(spectra)
    records = [
        instance.record("principal_scaled", value, radius=radius)
        for radius, value in principal.scaled.items()
    ]
    records += [
        instance.record("principal_c", principal.c),
        instance.record("principal_exponent", principal.exponent),
        instance.record("principal_band", principal.band),
    ]
    largest = max(cfg.radii)
    spec = spectra[largest]
    pairs = gaussian_pairs(spec, centre, largest)
    fit = fit_gaussian_regime(spec, geom, pairs)
    records += [
        instance.record("gaussian_slope", fit.slope, radius=largest),
        instance.record("gaussian_r_squared", fit.r_squared, radius=largest),
    ]
    if pairs:
        x, y = pairs[0]
        t = float(max(chemical_distances(geom, geom.row_of(x))[geom.row_of(y)], 1.0) ** 2)
        spectral = killed_heat_kernel(spec, t, x, y)
        uniformized = uniformized_heat_kernel(spec.op, t, x, y)
        records.append(
            instance.record("uniformization_gap", abs(spectral - uniformized), radius=largest)
        )
    return records
