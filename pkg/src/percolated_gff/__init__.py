"""Inhomogeneous discrete Gaussian free fields on random-conductance clusters.

The pipeline runs environment -> largest cluster -> killed operator on a
scaled domain -> Green's function -> field samples -> Wick functionals, with
continuum counterparts for every limit. Sub-packages:
:mod:`percolated_gff.wick` (Wick calculus) and
:mod:`percolated_gff.experiments` (config-driven runs).
"""

from importlib.metadata import PackageNotFoundError, version

from percolated_gff.cluster import ClusterGeometry, largest_cluster
from percolated_gff.domain import ScaledDomain
from percolated_gff.environment import Environment, EnvironmentLaw, parse_law, sample_environment
from percolated_gff.field import FieldSample, sample_dgff
from percolated_gff.green import GreenOperator, KilledOperator, build_killed_operator, solve_green

try:
    __version__ = version("percolated-gff")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

__all__ = [
    "ClusterGeometry",
    "Environment",
    "EnvironmentLaw",
    "FieldSample",
    "GreenOperator",
    "KilledOperator",
    "ScaledDomain",
    "build_killed_operator",
    "largest_cluster",
    "parse_law",
    "sample_dgff",
    "sample_environment",
    "solve_green",
]
