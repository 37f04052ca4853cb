"""Command-line interface for percolated-gff.

The entry point is configured in pyproject.toml and maps the
``percolated-gff`` command to :func:`main`.

Usage examples:
    $ percolated-gff env sample --d 2 --L 16 --p 0.7 --seed 3 --out env.txt
    $ percolated-gff green solve --d 2 --L 8 --p 1 --out green.bin
    $ percolated-gff experiment run lclt.cfg --threads 8 --format json
    $ percolated-gff records digest results.csv

Exit codes: 0 on success, 2 for configuration and geometry errors (and
command-line usage errors), 3 for numeric failures.
"""

import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Sequence

import click
import numpy as np
from numpy.typing import NDArray

from percolated_gff.bounds import fit_green_bounds
from percolated_gff.cluster import largest_cluster
from percolated_gff.domain import ScaledDomain
from percolated_gff.environment import (
    Environment,
    load_snapshot,
    parse_law,
    sample_environment,
    save_snapshot,
)
from percolated_gff.errors import ConfigError, GeometryError, NumericError
from percolated_gff.experiments import (
    ResultRecord,
    digest_records,
    load_config,
    read_records,
    run_to_file,
    write_records,
)
from percolated_gff.field import sample_dgff, save_fields
from percolated_gff.green import (
    GreenOperator,
    build_killed_operator,
    export_green_binary,
    export_green_csv,
    solve_green,
)
from percolated_gff.mollifier import MollifierSpec
from percolated_gff.smeared import smear_fields, smeared_kernels

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

F = Callable[..., Any]


@click.group()
@click.option("-v", "--verbose", count=True, help="INFO with -v, DEBUG with -vv.")
def cli(verbose: int) -> None:
    """Inhomogeneous Gaussian free fields on random-conductance clusters."""
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr, format=LOG_FORMAT, force=True)


@cli.group()
def env() -> None:
    """Sample and inspect environments."""


@cli.group()
def green() -> None:
    """Solve killed Green's functions."""


@cli.group()
def field() -> None:
    """Sample and smear discrete free fields."""


@cli.group()
def experiment() -> None:
    """Run configured experiments."""


@cli.group()
def records() -> None:
    """Inspect result files."""


# Public functions


def lattice_options(command: F) -> F:
    """Shared options selecting the box, the law, the scale and the seed."""
    options = [
        click.option("--d", "d", type=int, default=2, show_default=True),
        click.option("--L", "half_width", type=int, required=True, help="Box half-width."),
        click.option("--law", default=None, help="Law, e.g. bernoulli:p=0.7."),
        click.option("--p", type=float, default=None, help="Bond probability."),
        click.option("--n", "n", type=int, default=None, help="Scale (largest fitting)."),
        click.option("--seed", type=int, default=0, show_default=True),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def main(argv: Sequence[str] | None = None) -> int:
    """Main CLI entry point; returns the exit code instead of raising.

    Library errors are reported as one line on stderr: configuration and
    geometry errors exit with 2, numeric failures with 3.

    :param argv: Arguments without the program name; ``sys.argv[1:]`` if None
    :returns: Exit code
    :rtype: int
    """
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        cli.main(args=args, prog_name="percolated-gff", standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"Error: {exc.format_message()}", err=True)
        return EXIT_CONFIG
    except (ConfigError, GeometryError) as exc:
        click.echo(f"Error: {exc}", err=True)
        return EXIT_CONFIG
    except NumericError as exc:
        click.echo(f"Numeric failure: {exc}", err=True)
        return EXIT_NUMERIC
    except click.ClickException as exc:
        click.echo(f"Error: {exc.format_message()}", err=True)
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted.", err=True)
        return 1
    return 0


@env.command("inspect")
@click.argument("path", type=click.Path(path_type=Path))
def env_inspect(path: Path) -> None:
    """Print a summary of an environment snapshot."""
    if not path.is_file():
        raise ConfigError(f"snapshot not found: {path}")
    environment = load_snapshot(path)
    geom = largest_cluster(environment)
    click.echo(f"env_id        {environment.env_id}")
    click.echo(f"law           {environment.law.descriptor} seed={environment.law.seed}")
    click.echo(f"box           d={environment.d} L={environment.L}")
    click.echo(f"edges         {environment.edge_count()}")
    click.echo(f"open fraction {environment.open_fraction():.6f}")
    click.echo(f"cluster       {geom.size} sites")
    click.echo(f"theta0        {geom.theta0_hat:.6f}")


@env.command("sample")
@click.option("--d", "d", type=int, default=2, show_default=True, help="Dimension.")
@click.option("--L", "half_width", type=int, required=True, help="Box half-width.")
@click.option("--law", default=None, help="Law descriptor, e.g. bernoulli:p=0.7.")
@click.option("--p", type=float, default=None, help="Bond probability (overrides --law).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("env.txt"))
@click.option("--header-only", is_flag=True, help="Store only law and seed.")
def env_sample(
    d: int,
    half_width: int,
    law: str | None,
    p: float | None,
    seed: int,
    out: Path,
    header_only: bool,
) -> None:
    """Sample an environment and write its snapshot."""
    environment = _sample(d, half_width, law, p, seed)
    click.echo(str(save_snapshot(environment, out, include_edges=not header_only)))


@experiment.command("run")
@click.argument("config", type=click.Path(path_type=Path))
@click.option("--seed", "seeds", type=int, multiple=True, help="Override the seed list.")
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None)
def experiment_run(
    config: Path, seeds: tuple[int, ...], out: Path | None, threads: int, fmt: str | None
) -> None:
    """Run the experiment described by CONFIG and write its records."""
    overrides = {}
    if seeds:
        overrides["seeds"] = ",".join(str(s) for s in seeds)
    if out is not None:
        overrides["out"] = str(out)
    if fmt is not None:
        overrides["format"] = fmt
    cfg = load_config(config, overrides)
    click.echo(str(run_to_file(cfg, threads)))


@field.command("sample")
@lattice_options
@click.option("--replicas", type=int, default=10, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("fields.npy"))
def field_sample(
    d: int,
    half_width: int,
    law: str | None,
    p: float | None,
    n: int | None,
    seed: int,
    replicas: int,
    out: Path,
) -> None:
    """Sample DGFF replicas on the scaled domain and save them."""
    solved = _solve(d, half_width, law, p, n, seed)
    fields = sample_dgff(solved.op, replicas, seed=seed)
    click.echo(str(save_fields(fields, out)))


@field.command("smear")
@lattice_options
@click.option("--replicas", type=int, default=200, show_default=True)
@click.option("--eps", type=float, default=0.2, show_default=True)
@click.option("--points", default="0.5,0.5", show_default=True, help="x1,x2;y1,y2;...")
@click.option("--kernels", type=click.Path(path_type=Path), default=None)
@click.option("--out", type=click.Path(path_type=Path), default=Path("smeared.csv"))
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def field_smear(
    d: int,
    half_width: int,
    law: str | None,
    p: float | None,
    n: int | None,
    seed: int,
    replicas: int,
    eps: float,
    points: str,
    kernels: Path | None,
    out: Path,
    fmt: str,
) -> None:
    """Empirical variance of smeared replicas against <rho, G rho> at each point."""
    solved = _solve(d, half_width, law, p, n, seed)
    mollifier = MollifierSpec(eps, d)
    centres = _parse_points(points, d)
    kernel_set = smeared_kernels(solved, mollifier, centres)
    values = smear_fields(sample_dgff(solved.op, replicas, seed=seed), mollifier, centres)
    parameters = {"law": solved.op.geom.env.law.descriptor, "n": solved.n, "eps": eps}
    rows = []
    for i, centre in enumerate(centres):
        tags = {**parameters, "point": [float(c) for c in centre]}
        squares = (values[:, i] - values[:, i].mean()) ** 2
        stderr = float(squares.std(ddof=1)) / np.sqrt(replicas)
        empirical = float(squares.sum()) / (replicas - 1)
        exact = float(kernel_set.gee[i, i])
        rows += [
            ResultRecord("field-smear", tags, "empirical_variance", empirical, stderr, seed),
            ResultRecord("field-smear", tags, "smeared_variance", exact, 0.0, seed),
        ]
    if kernels is not None:
        kernel_set.to_csv(kernels)
    click.echo(str(write_records(rows, out, fmt)))


@green.command("bounds")
@lattice_options
@click.option("--sources", type=int, default=24, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("bounds.csv"))
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")
def green_bounds(
    d: int,
    half_width: int,
    law: str | None,
    p: float | None,
    n: int | None,
    seed: int,
    sources: int,
    out: Path,
    fmt: str,
) -> None:
    """Fit the Green's function bound shape and write the report as records."""
    solved = _solve(d, half_width, law, p, n, seed)
    report = fit_green_bounds(solved, sources=sources, seed=seed)
    parameters = {"law": solved.op.geom.env.law.descriptor, "n": report.n, "d": report.d}
    values = {
        "slope": report.slope,
        "intercept": report.fit.intercept,
        "r_squared": report.fit.r_squared,
        "upper_intercept": report.upper_intercept,
        "exceedance": report.exceedance,
        "residual_std": report.residual_std,
        "passed": float(report.passed),
    }
    rows = [
        ResultRecord("green-bounds", parameters, metric, value, 0.0, seed)
        for metric, value in values.items()
    ]
    click.echo(str(write_records(rows, out, fmt)))


@green.command("solve")
@lattice_options
@click.option("--out", type=click.Path(path_type=Path), default=Path("green.bin"))
@click.option("--format", "fmt", type=click.Choice(["bin", "csv"]), default="bin")
def green_solve(
    d: int,
    half_width: int,
    law: str | None,
    p: float | None,
    n: int | None,
    seed: int,
    out: Path,
    fmt: str,
) -> None:
    """Solve g on the scaled domain and export it (binary or long CSV)."""
    solved = _solve(d, half_width, law, p, n, seed)
    path = export_green_csv(solved, out) if fmt == "csv" else export_green_binary(solved, out)
    click.echo(str(path))


@records.command("digest")
@click.argument("path", type=click.Path(path_type=Path))
def records_digest(path: Path) -> None:
    """Print the SHA-256 digest of a result file, wall time excluded."""
    click.echo(digest_records(read_records(path)))


# Private functions


def _largest_scale(d: int, half_width: int) -> int:
    """Largest scale whose domain fits the box."""
    n = 2
    if ScaledDomain(n, d).required_half_width() > half_width:
        raise ConfigError(f"box half-width L={half_width} is too small for any scale")
    while ScaledDomain(n + 1, d).required_half_width() <= half_width:
        n += 1
    return n


def _parse_points(text: str, d: int) -> NDArray[np.float64]:
    try:
        points = [[float(c) for c in item.split(",")] for item in text.split(";") if item]
    except ValueError as exc:
        raise ConfigError(f"malformed point list {text!r}") from exc
    if not points or any(len(point) != d for point in points):
        raise ConfigError(f"every point needs {d} coordinates: {text!r}")
    return np.asarray(points, dtype=np.float64)


def _sample(d: int, half_width: int, law: str | None, p: float | None, seed: int) -> Environment:
    parsed = parse_law(law or "bernoulli:p=1")
    if p is not None:
        parsed = replace(parsed, p=p)
    return sample_environment(parsed.with_seed(seed), d, half_width)


def _solve(
    d: int, half_width: int, law: str | None, p: float | None, n: int | None, seed: int
) -> GreenOperator:
    environment = _sample(d, half_width, law, p, seed)
    geom = largest_cluster(environment)
    scale = _largest_scale(d, half_width) if n is None else n
    domain = ScaledDomain(scale, d)
    if domain.required_half_width() > half_width:
        raise ConfigError(f"scale n={scale} does not fit the box half-width L={half_width}")
    return solve_green(build_killed_operator(geom, domain))
