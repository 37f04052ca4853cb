"""Self-normalised importance reweighting towards a Gibbs measure.

The interacting measure has density ``exp(-<:V(gamma Phi_n):, g>)`` with
respect to the free field. For ``V = exp`` (the exponential interaction) the
Wick exponential is positive, so with ``g >= 0`` every weight lies in
``(0, 1]``.
"""

import logging
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

from percolated_gff.errors import ConfigError, WeightUnderflowError
from percolated_gff.field import FieldSample
from percolated_gff.green import GreenOperator
from percolated_gff.wick.analytic import AnalyticFunction
from percolated_gff.wick.functionals import TestFunction, WickFunctional, tested_functionals

logger = logging.getLogger(__name__)

DEGENERATE_ESS_FRACTION = 0.01


class GibbsEstimate(NamedTuple):
    """Reweighted expectation with its diagnostics."""

    estimate: float
    ess: float  # (sum w)^2 / sum w^2
    free_mean: float
    weights: NDArray[np.float64]


# Public functions


def gibbs_reweight(
    fields: Sequence[FieldSample],
    green: GreenOperator,
    potential: AnalyticFunction,
    gamma: float,
    test: TestFunction,
    observable: Callable[[FieldSample], float],
) -> GibbsEstimate:
    """Estimate ``E_mu[observable]`` from free-field replicas.

    :param fields: Free-field replicas on the operator of ``green``
    :param green: Green's operator (Wick variances)
    :param potential: The interaction ``V``
    :param gamma: Coupling
    :param test: The spatial cut-off ``g``
    :param observable: Function of a field replica
    :returns: Estimate, effective sample size and the raw weights
    :rtype: GibbsEstimate
    :raises WeightUnderflowError: if every weight underflows to zero
    """
    if len(fields) < 2:
        raise ConfigError("gibbs_reweight needs at least two replicas")
    energy = tested_functionals(fields, green, WickFunctional(potential, gamma, test))
    weights = np.exp(-energy)
    total = float(weights.sum())
    if total == 0.0 or not np.isfinite(total):
        raise WeightUnderflowError("all importance weights underflowed")
    values = np.array([observable(f) for f in fields], dtype=np.float64)
    ess = total**2 / float(np.sum(weights**2))
    if ess < DEGENERATE_ESS_FRACTION * len(fields):
        logger.warning("degenerate importance weights: ESS %.1f of %d", ess, len(fields))
    return GibbsEstimate(
        estimate=float(np.sum(weights * values) / total),
        ess=ess,
        free_mean=float(values.mean()),
        weights=weights,
    )
