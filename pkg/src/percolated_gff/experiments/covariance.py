"""Second moments of tested Wick functionals and their continuum limits.

With ``H = F_2 - a0^2`` and the empirical density ``theta0`` the run emits,
for each scale and mollifier radius:

* ``<f, H(gamma^2 G_n) f>`` against ``theta0^2 <f, H(gamma^2 G^Sigma / theta0) f>``,
* ``<f, H((gamma / theta0)^2 G^{eps,eps}_n) f>`` against
  ``<f, H(gamma^2 G^{Sigma,eps,eps} / theta0) f>``,
* ``<f, H(gamma^2 G^{0,eps}_n / theta0) f>`` against
  ``theta0 <f, H(gamma^2 G^{Sigma,0,eps} / theta0) f>``,

the absolute gaps, the three targets as eps goes to 0 and the
mollifier-removal distance between the smeared and unsmeared functionals.
"""

import logging

from percolated_gff.continuum import (
    ContinuumBasis,
    continuum_cross_covariance,
    continuum_smeared_covariance,
)
from percolated_gff.errors import SupportError
from percolated_gff.experiments.common import (
    Instance,
    admissible_gamma,
    build_instance,
    continuum_form,
    instance_basis,
)
from percolated_gff.experiments.config import ExperimentConfig
from percolated_gff.experiments.records import ResultRecord
from percolated_gff.green import GreenOperator
from percolated_gff.mollifier import MollifierSpec
from percolated_gff.wick import (
    AnalyticFunction,
    TestFunction,
    WickFunctional,
    analytic_by_name,
    covariance_functional,
    lattice_covariance,
    mollifier_removal_gap,
    parse_test_function,
    smeared_covariance,
    smeared_cross_covariance,
    support_grid,
)

logger = logging.getLogger(__name__)


# Public functions


def run_covariance_limits(cfg: ExperimentConfig, seed: int) -> list[ResultRecord]:
    """Discrete second moments, their continuum targets and the gaps.

    Every record carries ``admissible``, whether ``|gamma|`` lies below the
    fitted admissibility threshold.

    :param cfg: Configuration (``function``, ``gamma``, ``test``, ``n``, ``eps``)
    :param seed: Environment seed
    :returns: Records per scale and mollifier radius
    :rtype: list[ResultRecord]
    """
    instance = build_instance(cfg, seed)
    basis = instance_basis(cfg, instance)
    function = analytic_by_name(cfg.function)
    h = function.centred_f2()
    test = parse_test_function(cfg.test)
    theta0 = instance.theta0
    g2 = cfg.gamma**2
    greens = {n: instance.green(n) for n in cfg.n}
    bound = admissible_gamma(function, instance, basis, greens[cfg.n[-1]])
    admissible = abs(cfg.gamma) < bound
    if not admissible:
        logger.warning("gamma=%.4g is outside the admissibility box %.4g", cfg.gamma, bound)
    limit = continuum_form(basis, test, h, g2 / theta0, cfg.resolution)
    target = theta0**2 * limit
    records = [
        instance.record("gamma_bound", bound, admissible=admissible),
        instance.record("limit_nosmear", target, admissible=admissible),
        instance.record("limit_smeared", limit, admissible=admissible),
        instance.record("limit_cross", theta0 * limit, admissible=admissible),
    ]
    for n, green in greens.items():
        value = lattice_covariance(green, h.evaluate, g2, test)
        records += _triple(instance, "nosmear", value, target, n=n, admissible=admissible)
        for eps in cfg.eps:
            records += _smeared_records(
                instance, basis, green, function, test, eps, admissible
            )
    return records


# Private functions


def _smeared_records(
    instance: Instance,
    basis: ContinuumBasis,
    green: GreenOperator,
    function: AnalyticFunction,
    test: TestFunction,
    eps: float,
    admissible: bool,
) -> list[ResultRecord]:
    cfg = instance.cfg
    mollifier = MollifierSpec(eps, cfg.d)
    try:
        points, area, f = support_grid(test, mollifier, cfg.resolution)
    except SupportError as exc:
        logger.info("skipping smeared limits at eps=%.3g: %s", eps, exc)
        return []
    theta0 = instance.theta0
    g2 = cfg.gamma**2
    h = function.centred_f2().evaluate
    tags = {"n": green.n, "eps": eps, "admissible": admissible}
    smeared = smeared_covariance(green, mollifier, h, g2 / theta0**2, test, cfg.resolution)
    smeared_target = covariance_functional(
        continuum_smeared_covariance(basis, mollifier, points), h, g2 / theta0, f, area, "exact"
    )
    cross = smeared_cross_covariance(green, mollifier, h, g2 / theta0, test, cfg.resolution)
    cross_target = theta0 * covariance_functional(
        continuum_cross_covariance(basis, mollifier, points), h, g2 / theta0, f, area, "exact"
    )
    gap = mollifier_removal_gap(
        green, mollifier, WickFunctional(function, cfg.gamma, test), theta0, cfg.resolution
    )
    records = _triple(instance, "smeared", smeared, smeared_target, **tags)
    records += _triple(instance, "cross", cross, cross_target, **tags)
    records.append(instance.record("mollifier_removal", max(gap, 0.0), **tags))
    return records


def _triple(
    instance: Instance, name: str, value: float, target: float, **tags: object
) -> list[ResultRecord]:
    gap = abs(value - target)
    logger.info(
        "%s n=%s: value %.5g, target %.5g, gap %.3g", name, tags.get("n"), value, target, gap
    )
    return [
        instance.record(f"{name}_value", value, **tags),
        instance.record(f"{name}_target", target, **tags),
        instance.record(f"{name}_gap", gap, **tags),
    ]
