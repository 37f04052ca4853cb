"""Config-driven experiments producing :class:`ResultRecord` rows.

Each experiment is a function ``run_<name>(cfg, seed) -> list[ResultRecord]``
registered in :data:`REGISTRY`; :func:`run_experiment` runs all seeds.
"""

# Configuration
from .config import EXPERIMENTS, ExperimentConfig, load_config, parse_config

# Individual experiments
from .covariance import run_covariance_limits
from .diagnostics import run_ergodic, run_green_bounds, run_heatkernel
from .gibbs import run_gibbs
from .gmc import run_gmc
from .lclt import run_lclt

# Result records
from .records import ResultRecord, digest_records, read_records, write_records

# Runner
from .runner import REGISTRY, run_experiment, run_to_file

# Wick scaling experiment
from .scaling import run_wick_scaling

__all__ = [
    # Configuration
    "EXPERIMENTS",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    # Individual experiments
    "run_covariance_limits",
    "run_ergodic",
    "run_gibbs",
    "run_gmc",
    "run_green_bounds",
    "run_heatkernel",
    "run_lclt",
    "run_wick_scaling",
    # Result records
    "ResultRecord",
    "digest_records",
    "read_records",
    "write_records",
    # Runner
    "REGISTRY",
    "run_experiment",
    "run_to_file",
]
