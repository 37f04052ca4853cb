"""Scaling of Wick powers with the cluster density.

For ``:Phi_n^k:`` tested against ``f`` the variance tends to
``k! theta0^(2-k) <f, (G^Sigma)^k f>`` with the kernel power taken pointwise:
percolation damps the field for ``k = 1``, is invisible at ``k = 2`` and
amplifies higher orders. Orders ``k != l`` are uncorrelated. The mean
``H^-s`` norm of the first replicas is reported per scale.
"""

import logging
import math
from itertools import combinations

import numpy as np
from numpy.typing import NDArray

from percolated_gff.errors import ConfigError
from percolated_gff.experiments.common import (
    Instance,
    build_instance,
    continuum_form,
    instance_basis,
)
from percolated_gff.experiments.config import ExperimentConfig
from percolated_gff.experiments.records import ResultRecord
from percolated_gff.field import sample_dgff
from percolated_gff.wick import (
    WickFunctional,
    lattice_covariance,
    monomial,
    parse_test_function,
    percolated_field_scale,
    polynomial,
    sobolev_minus_s_norm,
    tested_functionals,
    tested_mode_coefficients,
)

logger = logging.getLogger(__name__)

MAX_ORDER = 4
SOBOLEV_REPLICAS = 16  # replicas entering the mean H^-s norm


# Public functions


def run_wick_scaling(cfg: ExperimentConfig, seed: int) -> list[ResultRecord]:
    """Monte-Carlo variances of Wick powers against their scaling limits.

    With ``contrast_law`` set, the ``k = 1`` variance of the contrast run is
    divided by that of the main run and reported next to the ratio of the
    cluster densities.

    :param cfg: Configuration (``k``, ``n``, ``test``, ``replicas``)
    :param seed: Environment and field seed
    :returns: Records per law, scale and order
    :rtype: list[ResultRecord]
    :raises ConfigError: for orders above 4
    """
    if max(cfg.k) > MAX_ORDER:
        raise ConfigError(f"Wick orders must lie in 1..{MAX_ORDER}, got {cfg.k}")
    main = build_instance(cfg, seed)
    records, first_order = _law_records(main, "main")
    if cfg.contrast_law is None:
        return records
    contrast = build_instance(cfg, seed, contrast=True)
    contrast_records, contrast_first = _law_records(contrast, "contrast")
    records += contrast_records
    for n in cfg.n:
        if n in first_order and first_order[n] > 0:
            ratio = contrast_first[n] / first_order[n]
            records.append(main.record("damping_ratio", ratio, n=n))
            records.append(
                main.record("density_ratio", contrast.theta0 / main.theta0, n=n)
            )
    return records


def sample_variance(values: NDArray[np.float64]) -> tuple[float, float]:
    """Unbiased variance and its standard error from the fourth central moment."""
    centred = values - values.mean()
    squares = centred**2
    count = len(values)
    return float(squares.sum() / (count - 1)), float(squares.std(ddof=1) / math.sqrt(count))


# Private functions


def _law_records(
    instance: Instance, role: str
) -> tuple[list[ResultRecord], dict[int, float]]:
    cfg = instance.cfg
    test = parse_test_function(cfg.test)
    basis = instance_basis(cfg, instance)
    theta0 = instance.theta0
    records = [instance.record("theta0", theta0, law_role=role)]
    first_order: dict[int, float] = {}
    targets = {}
    for k in cfg.k:
        power = polynomial([0.0] * k + [math.factorial(k)])
        form = continuum_form(basis, test, power, 1.0, cfg.resolution)
        targets[k] = theta0 ** (2 - k) * form
        scale = percolated_field_scale(k, theta0)
        records.append(instance.record("percolated_scale", scale, k=k, law_role=role))
    for n in cfg.n:
        green = instance.green(n)
        fields = sample_dgff(green.op, cfg.replicas, seed=instance.seed)
        values = {
            k: tested_functionals(fields, green, WickFunctional(monomial(k), 1.0, test))
            for k in cfg.k
        }
        for k in cfg.k:
            variance, stderr = sample_variance(values[k])
            oracle = lattice_covariance(
                green, lambda a, k=k: math.factorial(k) * a**k, 1.0, test
            )
            target = targets[k]
            ratio = variance / target if target != 0 else 0.0
            tags = {"n": n, "k": k, "law_role": role}
            logger.info("k=%d n=%d %s: variance %.4g, target %.4g", k, n, role, variance, target)
            records += [
                instance.record("variance", variance, stderr, **tags),
                instance.record("oracle", oracle, **tags),
                instance.record("target", target, **tags),
                instance.record("ratio", ratio, **tags),
            ]
            if k == 1:
                first_order[n] = variance
        norms = [
            sobolev_minus_s_norm(tested_mode_coefficients(f, basis), basis.eigenvalues, cfg.s)
            for f in fields[:SOBOLEV_REPLICAS]
        ]
        sizes = np.array([norm.value for norm in norms])
        tail = float(np.mean([norm.tail_bound for norm in norms]))
        spread = float(sizes.std(ddof=1) / math.sqrt(len(sizes)))
        records += [
            instance.record("sobolev_norm", float(sizes.mean()), spread, n=n, law_role=role),
            instance.record("sobolev_tail", tail, n=n, law_role=role),
        ]
        for k, l in combinations(cfg.k, 2):
            product = (values[k] - values[k].mean()) * (values[l] - values[l].mean())
            records.append(
                instance.record(
                    "cross_covariance",
                    float(product.mean()),
                    float(product.std(ddof=1) / math.sqrt(len(product))),
                    n=n,
                    k=k,
                    l=l,
                    law_role=role,
                )
            )
    return records, first_order
