"""Experiment registry and the seed-parallel runner.

Seeds are independent tasks; they run on a joblib thread pool and their
records are concatenated in the configured seed order, so the output does
not depend on the number of workers.
"""

import logging
import time
from pathlib import Path
from typing import Callable

from joblib import Parallel, delayed

from percolated_gff.errors import ConfigError
from percolated_gff.experiments.config import ExperimentConfig
from percolated_gff.experiments.covariance import run_covariance_limits
from percolated_gff.experiments.diagnostics import (
    run_ergodic,
    run_green_bounds,
    run_heatkernel,
)
from percolated_gff.experiments.gibbs import run_gibbs
from percolated_gff.experiments.gmc import run_gmc
from percolated_gff.experiments.lclt import run_lclt
from percolated_gff.experiments.records import ResultRecord, write_records
from percolated_gff.experiments.scaling import run_wick_scaling

logger = logging.getLogger(__name__)

Experiment = Callable[[ExperimentConfig, int], list[ResultRecord]]

REGISTRY: dict[str, Experiment] = {
    "covariance-limits": run_covariance_limits,
    "ergodic": run_ergodic,
    "gibbs": run_gibbs,
    "gmc": run_gmc,
    "green-bounds": run_green_bounds,
    "heatkernel": run_heatkernel,
    "lclt": run_lclt,
    "wick-scaling": run_wick_scaling,
}


# Public functions


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list[ResultRecord]:
    """Run every seed of ``cfg`` and merge the records in seed order.

    :param cfg: Configuration
    :param threads: Worker threads for the seed tasks
    :returns: All records
    :rtype: list[ResultRecord]
    """
    if threads < 1:
        raise ConfigError(f"threads={threads} must be at least 1")
    experiment = REGISTRY[cfg.experiment]
    logger.info(
        "running %s over %d seeds on %d threads", cfg.experiment, len(cfg.seeds), threads
    )
    batches = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_run_seed)(experiment, cfg, seed) for seed in cfg.seeds
    )
    return [record for batch in batches for record in batch]


def run_to_file(cfg: ExperimentConfig, threads: int = 1) -> Path:
    """Run ``cfg`` and write the records to ``cfg.out`` in ``cfg.format``."""
    records = run_experiment(cfg, threads)
    path = write_records(records, cfg.out, cfg.format)
    logger.info("wrote %d records to %s", len(records), path)
    return path


# Private functions


def _run_seed(experiment: Experiment, cfg: ExperimentConfig, seed: int) -> list[ResultRecord]:
    start = time.perf_counter()
    records = experiment(cfg, seed)
    elapsed = time.perf_counter() - start
    return [record._replace(wall_time=elapsed) for record in records]
