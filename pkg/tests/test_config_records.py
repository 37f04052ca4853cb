"""Tests for experiment configuration files and result records."""

import math
from pathlib import Path
from typing import Callable

import pytest

from percolated_gff.errors import ConfigError
from percolated_gff.experiments import (
    ResultRecord,
    digest_records,
    load_config,
    parse_config,
    read_records,
    write_records,
)

RECORDS = [
    ResultRecord("lclt", {"n": (8, 16), "eps": 0.2}, "ratio", 1.01, 0.02, 0, 1.5),
    ResultRecord("lclt", {"n": (8, 16), "eps": 0.2}, "ratio", math.nan, 0.0, 1, 2.5),
]


class TestParseConfig:
    """Test the ``key = value`` configuration format."""

    def test_comments_and_lists(self) -> None:
        """Test comments, blank lines, list values and the 'auto' diffusivity."""
        cfg = parse_config(
            "# LCLT run\nexperiment = lclt\n\nn = 8, 16 ,32\neps = 0.2,0.1  # two widths\n"
            "diffusivity = auto\n"
        )
        assert cfg.n == (8, 16, 32)
        assert cfg.eps == (0.2, 0.1)
        assert cfg.diffusivity is None

    def test_eps_must_stay_inside_window(self) -> None:
        """Test that the LCLT window needs eps < delta."""
        with pytest.raises(ConfigError):
            parse_config("experiment = lclt\neps = 0.3\ndelta = 0.3")

    def test_load_missing_file(self, tmp_path: Path) -> None:
        """Test that a missing file names its path."""
        with pytest.raises(ConfigError, match="missing.cfg"):
            load_config(tmp_path / "missing.cfg")

    def test_load_with_overrides(self, write_config: Callable[[str], Path]) -> None:
        """Test that overrides replace file values."""
        path = write_config("experiment = gmc\ngamma = 0.5\n")
        cfg = load_config(path, {"gamma": "1.5", "seeds": "3,4"})
        assert cfg.gamma == 1.5
        assert cfg.seeds == (3, 4)

    def test_malformed_line(self) -> None:
        """Test that a line without '=' is rejected with its line number."""
        with pytest.raises(ConfigError, match=":2:"):
            parse_config("experiment = gmc\ngamma 0.5")

    def test_missing_experiment(self) -> None:
        """Test that the experiment key is required."""
        with pytest.raises(ConfigError):
            parse_config("gamma = 0.5")

    def test_monotone_lists(self) -> None:
        """Test that n must increase and eps must decrease."""
        with pytest.raises(ConfigError):
            parse_config("experiment = wick-scaling\nn = 16,8")
        with pytest.raises(ConfigError):
            parse_config("experiment = wick-scaling\neps = 0.1,0.2")

    def test_parameters_exclude_run_keys(self) -> None:
        """Test that output and seed keys are not echoed into records."""
        parameters = parse_config("experiment = gibbs\nseeds = 1,2").parameters()
        assert not {"out", "format", "seeds", "experiment"} & set(parameters)
        assert parameters["gamma"] == 0.5

    def test_sobolev_order(self) -> None:
        """Test that a negative Sobolev order is rejected."""
        with pytest.raises(ConfigError):
            parse_config("experiment = wick-scaling\ns = -0.5")

    def test_three_dimensional_scope(self) -> None:
        """Test that d = 3 is limited to the lattice diagnostics."""
        assert parse_config("experiment = green-bounds\nd = 3").d == 3
        with pytest.raises(ConfigError):
            parse_config("experiment = gmc\nd = 3")

    def test_unknown_key(self) -> None:
        """Test that unknown keys are rejected."""
        with pytest.raises(ConfigError, match="colour"):
            parse_config("experiment = gmc\ncolour = red")


class TestRecords:
    """Test CSV and JSON result files."""

    def test_csv_round_trip(self, tmp_path: Path) -> None:
        """Test that CSV records read back field by field."""
        path = write_records(RECORDS, tmp_path / "out.txt")
        assert path.suffix == ".csv"
        loaded = read_records(path)
        assert loaded[0] == RECORDS[0]._replace(parameters={"eps": 0.2, "n": [8, 16]})
        assert math.isnan(loaded[1].value)
        assert ",nan," in path.read_text(encoding="utf-8")

    def test_digest_ignores_wall_time(self) -> None:
        """Test that the digest only depends on reproducible fields."""
        shifted = [r._replace(wall_time=r.wall_time + 10) for r in RECORDS]
        assert digest_records(shifted) == digest_records(RECORDS)
        changed = [RECORDS[0]._replace(seed=5), RECORDS[1]]
        assert digest_records(changed) != digest_records(RECORDS)

    def test_foreign_header(self, tmp_path: Path) -> None:
        """Test that a CSV file with another header is rejected."""
        path = tmp_path / "other.csv"
        path.write_text("a,b\n1,2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            read_records(path)

    def test_json_records(self, tmp_path: Path) -> None:
        """Test the JSON array format."""
        path = write_records(RECORDS, tmp_path / "out", "json")
        assert path.name == "out.json"
        loaded = read_records(path)
        assert [r.metric for r in loaded] == ["ratio", "ratio"]
        assert digest_records(loaded) == digest_records(read_records(path))

    def test_unknown_format(self, tmp_path: Path) -> None:
        """Test that only csv and json are written."""
        with pytest.raises(ConfigError):
            write_records(RECORDS, tmp_path / "out", "xml")
