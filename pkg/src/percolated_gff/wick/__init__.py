"""Wick calculus for the percolated field.

Hermite polynomials with variance, analytic functions with their ``F_2``
transform, tested nonlinear functionals with their second-moment
evaluators, Gibbs reweighting and negative Sobolev norms.

Everything public is re-exported here, e.g.
``from percolated_gff.wick import hermite, tested_functional``.
"""

# Analytic functions
from .analytic import (
    AnalyticFunction,
    admissibility_bound,
    analytic_by_name,
    constant_function,
    cos_function,
    cosh_function,
    exp_function,
    f2_transform,
    monomial,
    parse_analytic,
    polynomial,
    sin_function,
    sinh_function,
    wick_analytic,
    wick_exponential,
)

# Tested functionals
from .functionals import (
    TestFunction,
    WickFunctional,
    cell_centers,
    continuum_tested_functional,
    covariance_functional,
    gmc_integral,
    lattice_covariance,
    macroscopic_grid,
    mollifier_removal_gap,
    parse_test_function,
    percolated_field_scale,
    smeared_covariance,
    smeared_cross_covariance,
    smeared_tested_functional,
    support_grid,
    tested_functional,
    tested_functionals,
)

# Gibbs reweighting
from .gibbs import GibbsEstimate, gibbs_reweight

# Hermite polynomials
from .hermite import (
    WickCovarianceReport,
    hermite,
    hermite_explicit,
    hermite_table,
    wick_covariance_check,
)

# Sobolev norms and fractional kernels
from .sobolev import (
    FractionalKernel,
    SobolevNorm,
    fractional_kernel_bound,
    fractional_kernel_eval,
    sobolev_minus_s_norm,
    tested_mode_coefficients,
)

__all__ = [
    # Analytic functions
    "AnalyticFunction",
    "admissibility_bound",
    "analytic_by_name",
    "constant_function",
    "cos_function",
    "cosh_function",
    "exp_function",
    "f2_transform",
    "monomial",
    "parse_analytic",
    "polynomial",
    "sin_function",
    "sinh_function",
    "wick_analytic",
    "wick_exponential",
    # Tested functionals
    "TestFunction",
    "WickFunctional",
    "cell_centers",
    "continuum_tested_functional",
    "covariance_functional",
    "gmc_integral",
    "lattice_covariance",
    "macroscopic_grid",
    "mollifier_removal_gap",
    "parse_test_function",
    "percolated_field_scale",
    "smeared_covariance",
    "smeared_cross_covariance",
    "smeared_tested_functional",
    "support_grid",
    "tested_functional",
    "tested_functionals",
    # Gibbs reweighting
    "GibbsEstimate",
    "gibbs_reweight",
    # Hermite polynomials
    "WickCovarianceReport",
    "hermite",
    "hermite_explicit",
    "hermite_table",
    "wick_covariance_check",
    # Sobolev norms and fractional kernels
    "FractionalKernel",
    "SobolevNorm",
    "fractional_kernel_bound",
    "fractional_kernel_eval",
    "sobolev_minus_s_norm",
    "tested_mode_coefficients",
]
