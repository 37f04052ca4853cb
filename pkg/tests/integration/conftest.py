"""
Shared pytest fixtures for command-line tests.

Commands run in-process through :func:`percolated_gff.cli.main`, which returns
the exit code instead of raising ``SystemExit``.
"""

from pathlib import Path
from typing import Callable

import pytest

from percolated_gff.cli import main

CliResult = tuple[int, str, str]


@pytest.fixture
def cli_runner(capsys: pytest.CaptureFixture[str]) -> Callable[[list[str]], CliResult]:
    """
    Factory fixture for running CLI commands.

    Returns:
        Callable: Runs the arguments and returns ``(exit code, stdout, stderr)``
    """

    def run_command(args: list[str]) -> CliResult:
        capsys.readouterr()
        code = main(args)
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run_command


@pytest.fixture
def ergodic_config(tmp_path: Path) -> Path:
    """
    A cheap ergodic-sweep configuration writing into ``tmp_path``.

    Returns:
        Path: The configuration file
    """
    path = tmp_path / "ergodic.cfg"
    path.write_text(
        "experiment = ergodic\n"
        "law = bernoulli:p=0.8\n"
        "n = 8,16\n"
        "seeds = 1,2\n"
        f"out = {tmp_path / 'ergodic'}\n",
        encoding="utf-8",
    )
    return path
