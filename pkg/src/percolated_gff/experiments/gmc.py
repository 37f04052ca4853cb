"""Gaussian multiplicative chaos mass of a region.

The mass ``M_n(A) = <:exp(gamma Phi_n):, 1_A>`` has mean equal to the cluster
census ``n^-d #(cluster cells in A)``, close to ``theta0 |A|``, and second
moment ``n^-2d sum_{x,y in A} exp(gamma^2 g_n(x, y))``.
"""

import logging
import math

import numpy as np

from percolated_gff.experiments.common import (
    admissible_gamma,
    build_instance,
    instance_basis,
)
from percolated_gff.experiments.config import ExperimentConfig
from percolated_gff.experiments.records import ResultRecord
from percolated_gff.field import sample_dgff
from percolated_gff.wick import (
    WickFunctional,
    cell_centers,
    exp_function,
    lattice_covariance,
    parse_test_function,
    tested_functionals,
)

logger = logging.getLogger(__name__)


# Public functions


def run_gmc(cfg: ExperimentConfig, seed: int) -> list[ResultRecord]:
    """Mean and second moment of the GMC mass of ``test`` across scales.

    :param cfg: Configuration (``gamma``, ``test`` as the region, ``replicas``)
    :param seed: Environment and field seed
    :returns: ``mean``, census targets, ``second_moment`` and its quadrature target
    :rtype: list[ResultRecord]
    """
    instance = build_instance(cfg, seed)
    region = parse_test_function(cfg.test)
    function = exp_function()
    greens = {n: instance.green(n) for n in cfg.n}
    basis = instance_basis(cfg, instance)
    bound = admissible_gamma(function, instance, basis, greens[cfg.n[-1]])
    admissible = abs(cfg.gamma) < bound
    if not admissible:
        logger.warning("gamma=%.4g is outside the admissibility box %.4g", cfg.gamma, bound)
    functional = WickFunctional(function, cfg.gamma, region, admissible)
    records = [
        instance.record("gamma_bound", bound, admissible=admissible),
        instance.record(
            "mean_target", instance.theta0 * region.measure(), admissible=admissible
        ),
    ]
    for n, green in greens.items():
        fields = sample_dgff(green.op, cfg.replicas, seed=seed)
        masses = tested_functionals(fields, green, functional)
        count = len(masses)
        census = float(region(cell_centers(green.op)).sum()) / n**cfg.d
        second = masses**2
        mean_error = float(masses.std(ddof=1)) / math.sqrt(count)
        second_error = float(second.std(ddof=1)) / math.sqrt(count)
        target = lattice_covariance(green, np.exp, cfg.gamma**2, region)
        ratio = float(second.mean()) / target if target > 0 else 0.0
        tags = {"n": n, "admissible": admissible}
        logger.info("gmc n=%d: mean %.4g, census %.4g", n, masses.mean(), census)
        records += [
            instance.record("mean", float(masses.mean()), mean_error, **tags),
            instance.record("census", census, **tags),
            instance.record("second_moment", float(second.mean()), second_error, **tags),
            instance.record("second_moment_target", target, **tags),
            instance.record("second_moment_ratio", ratio, **tags),
        ]
    return records
