"""Building blocks shared by the experiments.

Every experiment run is a pure function of ``(config, seed)``: the seed picks
one environment on a box large enough for every configured scale, and all
scales of that run are cut out of the same environment.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np
from numpy.typing import NDArray

from percolated_gff.bounds import fit_green_bounds
from percolated_gff.cluster import ClusterGeometry, largest_cluster
from percolated_gff.continuum import ContinuumBasis, continuum_basis
from percolated_gff.domain import ScaledDomain
from percolated_gff.environment import Environment, sample_environment
from percolated_gff.experiments.config import ExperimentConfig
from percolated_gff.experiments.records import ResultRecord
from percolated_gff.green import GreenOperator, build_killed_operator, solve_green
from percolated_gff.walks import calibrate_sigma
from percolated_gff.wick import (
    AnalyticFunction,
    TestFunction,
    admissibility_bound,
    covariance_functional,
    macroscopic_grid,
)

logger = logging.getLogger(__name__)

FINE_RESOLUTION = 128  # grid for the eigen-sum projections of f


@dataclass(frozen=True, eq=False)
class Instance:
    """One sampled environment and its largest cluster."""

    cfg: ExperimentConfig
    seed: int
    env: Environment
    geom: ClusterGeometry

    # Public methods

    def domain(self, n: int) -> ScaledDomain:
        """The lattice image of the unit cube at scale ``n``."""
        return ScaledDomain(n, self.cfg.d)

    def green(self, n: int) -> GreenOperator:
        """Killed Green's operator on ``nD`` ∩ cluster."""
        op = build_killed_operator(self.geom, self.domain(n))
        return solve_green(op)

    def record(
        self, metric: str, value: float, stderr: float = 0.0, **extra: Any
    ) -> ResultRecord:
        """A result row echoing the configuration plus ``extra`` parameters."""
        parameters = self.cfg.parameters()
        parameters.update(extra)
        return ResultRecord(
            experiment=self.cfg.experiment,
            parameters=parameters,
            metric=metric,
            value=float(value),
            stderr=float(stderr),
            seed=self.seed,
        )

    @property
    def theta0(self) -> float:
        """Empirical cluster density of the inner box."""
        return self.geom.theta0_hat


# Public functions


def admissible_gamma(
    function: AnalyticFunction,
    instance: Instance,
    basis: ContinuumBasis,
    green: GreenOperator,
) -> float:
    """The admissibility threshold for ``|gamma|`` from fitted surrogates.

    ``C_Sigma`` is the log coefficient of the continuum kernel and ``C_HK`` the
    slope of the Green's bound fit at the largest scale.
    """
    report = fit_green_bounds(green, seed=instance.seed)
    c_hk = max(report.slope, 1e-12)
    return admissibility_bound(function.beta, instance.theta0, basis.log_coefficient, c_hk)


def box_half_width(cfg: ExperimentConfig) -> int:
    """Half-width of the environment box serving every scale and radius."""
    width = max(ScaledDomain(n, cfg.d).required_half_width() for n in cfg.n)
    if cfg.experiment in ("heatkernel", "green-bounds"):
        width = max(width, int(math.ceil(max(cfg.radii) / 0.875)) + 2)
    return width


def build_instance(cfg: ExperimentConfig, seed: int, contrast: bool = False) -> Instance:
    """Sample the environment of one run and extract its largest cluster.

    :param cfg: Configuration
    :param seed: Environment seed
    :param contrast: Use ``contrast_law`` instead of ``law``
    :returns: The instance
    :rtype: Instance
    """
    law = cfg.environment_law(contrast).with_seed(seed)
    env = sample_environment(law, cfg.d, box_half_width(cfg))
    geom = largest_cluster(env)
    logger.info(
        "seed %d: %s, L=%d, cluster %d sites, theta0=%.4f",
        seed,
        law.descriptor,
        env.L,
        geom.size,
        geom.theta0_hat,
    )
    return Instance(cfg=cfg, seed=seed, env=env, geom=geom)


def continuum_form(
    basis: ContinuumBasis,
    test: TestFunction,
    transform: AnalyticFunction,
    scale: float,
    resolution: int,
) -> float:
    """``<f, H(scale G^Sigma) f>`` for a series ``H`` with ``H(0) = 0``.

    The linear term is the eigen-sum ``sum_k lambda_k^-1 <f, e_k>^2``; the
    higher terms are a double Riemann sum with the diagonal clamped to its
    nearest-neighbour value, the kernel being singular there.
    """
    coefficients = transform.coefficients
    fine, fine_area = macroscopic_grid(FINE_RESOLUTION)
    projections = (test(fine) @ basis.eigenfunctions(fine)) * fine_area
    linear = coefficients[1] * scale * float(np.sum(projections**2 / basis.eigenvalues))
    if not any(coefficients[2:]):
        return linear
    points, area = macroscopic_grid(resolution)
    f = test(points)
    on = f != 0
    higher = replace(transform, coefficients=(0.0, 0.0) + tuple(coefficients[2:]))
    kernel = basis.green_matrix(points[on])
    return linear + covariance_functional(kernel, higher.evaluate, scale, f[on], area, "clamp")


def diffusivity(cfg: ExperimentConfig, instance: Instance) -> NDArray[np.float64]:
    """The matrix ``a`` of the continuum limit.

    A configured scalar gives ``a = diffusivity * I``. Otherwise ``Sigma^2`` is
    calibrated by walks at the largest scale and replaced by the multiple of
    the identity with the same trace, the law being invariant under lattice
    symmetries.
    """
    d = cfg.d
    if cfg.diffusivity is not None:
        return cfg.diffusivity * np.eye(d)
    estimate = calibrate_sigma(
        [instance.geom], cfg.n[-1], walkers=cfg.walkers, seed=instance.seed
    )
    return float(np.trace(estimate.matrix)) / d * np.eye(d)


def instance_basis(cfg: ExperimentConfig, instance: Instance) -> ContinuumBasis:
    """Continuum eigenbasis for the run's diffusivity."""
    return continuum_basis(diffusivity(cfg, instance), cfg.modes)


def window_points(resolution: int, delta: float) -> NDArray[np.float64]:
    """Grid points at distance at least ``delta`` from the boundary of the cube."""
    points, _ = macroscopic_grid(resolution)
    inside = np.all((points >= delta) & (points <= 1.0 - delta), axis=1)
    return points[inside]
