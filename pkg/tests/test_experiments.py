"""Tests for the config-driven experiments and the seed-parallel runner."""

import math
from pathlib import Path

import pytest

from percolated_gff.errors import ConfigError
from percolated_gff.experiments import (
    ExperimentConfig,
    ResultRecord,
    digest_records,
    parse_config,
    read_records,
    run_experiment,
    run_to_file,
)

OPEN = "law = bernoulli:p=1\n"
ERGODIC = OPEN + "experiment = ergodic\nobservable = conductance\nn = 8,16\nseeds = 0,1,2\n"


def _metrics(records: list[ResultRecord]) -> dict[str, list[ResultRecord]]:
    table: dict[str, list[ResultRecord]] = {}
    for record in records:
        table.setdefault(record.metric, []).append(record)
    return table


def _run(text: str) -> dict[str, list[ResultRecord]]:
    return _metrics(run_experiment(parse_config(text)))


class TestDiagnostics:
    """Test the lattice diagnostics."""

    def test_ergodic_open_lattice(self) -> None:
        """Test that the forward conductance of the open lattice averages to d."""
        table = _run(ERGODIC)
        assert [r.value for r in table["reference_mean"]] == [2.0, 2.0, 2.0]
        assert all(r.value == 0.0 for r in table["drift"])
        assert all(r.value == 2.0 for r in table["average"])

    def test_green_bounds(self) -> None:
        """Test logarithmic diagonal growth and the bound fit on the open lattice."""
        table = _run(OPEN + "experiment = green-bounds\nn = 6,8,12\nradii = 4,6,8")
        assert [r.parameters["n"] for r in table["diagonal"]] == [6, 8, 12]
        assert table["diagonal_slope"][0].value > 0
        assert table["bound_passed"][0].value == 1.0

    @pytest.mark.slow
    def test_heatkernel(self) -> None:
        """Test the principal-eigenvalue band and the uniformisation agreement."""
        table = _run(OPEN + "experiment = heatkernel\nn = 8\nradii = 3,6,9")
        assert len(table["principal_scaled"]) == 3
        assert 0 < table["principal_band"][0].value < 4
        assert table["uniformization_gap"][0].value < 1e-8


class TestFieldExperiments:
    """Test the experiments built on sampled fields."""

    @pytest.mark.slow
    def test_covariance_limits(self) -> None:
        """Test the record layout and the admissibility tag."""
        table = _run(
            OPEN + "experiment = covariance-limits\nn = 8,12\neps = 0.3\ngamma = 0.3\n"
            "test = bump:0.5,0.5,0.15\nmodes = 256\nresolution = 8\n"
        )
        assert table["gamma_bound"][0].value > 0.3
        assert all(r.parameters["admissible"] is True for r in table["nosmear_value"])
        assert len(table["nosmear_gap"]) == 2
        assert table["limit_cross"][0].value == pytest.approx(table["limit_smeared"][0].value)

    def test_gibbs_weights(self) -> None:
        """Test that the exponential interaction keeps every weight in (0, 1]."""
        table = _run(OPEN + "experiment = gibbs\nn = 8\nreplicas = 40\ngamma = 0.5\n")
        assert table["weights_in_unit_interval"][0].value == 1.0
        assert 1.0 <= table["ess"][0].value <= 40.0

    def test_gmc_census(self) -> None:
        """Test that the mean GMC mass matches the lattice census of the region."""
        table = _run(
            OPEN + "experiment = gmc\nn = 8\nreplicas = 400\ngamma = 0.3\n"
            "test = box:0.25,0.25,0.75,0.75\nmodes = 256\n"
        )
        mean = table["mean"][0]
        assert abs(mean.value - table["census"][0].value) < 5 * mean.stderr

    @pytest.mark.slow
    def test_lclt(self) -> None:
        """Test one calibration constant per eps and a gap per scale."""
        table = _run(
            OPEN + "experiment = lclt\nn = 8,16\neps = 0.25,0.2\ndelta = 0.3\n"
            "resolution = 10\nmodes = 256\n"
        )
        assert len(table["calibration"]) == 2
        assert len(table["sup_gap"]) == 4
        assert all(math.isfinite(r.value) for r in table["sup_gap"])

    def test_wick_scaling_contrast(self) -> None:
        """Test the damping and density ratios of a contrast run."""
        table = _run(
            OPEN + "experiment = wick-scaling\ncontrast_law = bernoulli:p=0.8\nn = 8\n"
            "k = 1,2\nreplicas = 50\nmodes = 256\ntest = bump:0.5,0.5,0.3\n"
        )
        assert len(table["theta0"]) == 2
        assert table["density_ratio"][0].value < 1.0
        assert table["percolated_scale"][0].value == 1.0
        assert len(table["cross_covariance"]) == 2
        assert len(table["sobolev_norm"]) == 2
        assert all(r.value > 0 for r in table["sobolev_norm"])

    def test_wick_scaling_order_limit(self) -> None:
        """Test that Wick orders above four are refused."""
        cfg = parse_config(OPEN + "experiment = wick-scaling\nk = 1,5\nn = 8")
        with pytest.raises(ConfigError):
            run_experiment(cfg)


class TestRunner:
    """Test the seed-parallel runner."""

    def test_invalid_threads(self) -> None:
        """Test that at least one worker is required."""
        with pytest.raises(ConfigError):
            run_experiment(parse_config(ERGODIC), threads=0)

    def test_run_to_file(self, tmp_path: Path) -> None:
        """Test that records land in the configured file and format."""
        cfg = parse_config(ERGODIC).replace(out=tmp_path / "ergodic", format="json")
        path = run_to_file(cfg)
        assert path == tmp_path / "ergodic.json"
        assert len(read_records(path)) == 3 * (1 + 3 * 2)

    def test_thread_count_invariance(self) -> None:
        """Test that the records do not depend on the number of threads."""
        cfg: ExperimentConfig = parse_config(ERGODIC)
        serial = run_experiment(cfg, threads=1)
        parallel = run_experiment(cfg, threads=3)
        assert digest_records(serial) == digest_records(parallel)
        assert [r.seed for r in parallel] == sorted(r.seed for r in parallel)
