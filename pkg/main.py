import sys
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import typer

from config import RunConfig, parse_config
from errors import ConfigError
from experiments import get_experiment
from lab_compat import ExecutionContext
from version import get_version_string

logging.basicConfig(stream=sys.stderr, level=logging.INFO)
logger = logging.getLogger(__name__)

app = typer.Typer(add_completion=False, help="Monte Carlo and kernel-quadrature lab for Ginibre linear statistics")

EXIT_FAILURE = 1
EXIT_USAGE = 2


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def format_envelope(result: dict) -> str:
    # Wrap the experiment result into the canonical top-level contract
    # { success: bool, data: {...}, error: null|string }
    wrapped = {
        "success": bool(result.get("success", False)),
        "data": result,
        "error": None if result.get("success") else result.get("error"),
    }
    return json.dumps(wrapped, ensure_ascii=False, default=_json_default)


def _version_callback(value: bool) -> None:
    if value:
        typer.echo(get_version_string())
        raise typer.Exit()


@app.callback()
def main_options(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", help="key = value run configuration file"),
    threads: Optional[int] = typer.Option(None, help="Monte Carlo worker threads"),
    seed: Optional[int] = typer.Option(None, help="Master seed"),
    no_timestamp: bool = typer.Option(False, "--no-timestamp", help="Leave the generation time out of reports"),
    timing: bool = typer.Option(False, "--timing", help="Add wall-clock statistics to reports"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
    quiet: bool = typer.Option(False, "--quiet", help="Warnings and errors only"),
    version: bool = typer.Option(False, "--version", callback=_version_callback, is_eager=True, help="Show version and exit"),
):
    """Global options shared by every subcommand."""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif quiet:
        logging.getLogger().setLevel(logging.WARNING)
    ctx.obj = {
        "config_path": config,
        "overrides": {
            "threads": threads,
            "master_seed": seed,
            "timestamp": False if no_timestamp else None,
            "timing": True if timing else None,
        },
    }


def _resolve(ctx: typer.Context, name: str, flags: Dict[str, Any]) -> RunConfig:
    state = ctx.obj or {}
    path = state.get("config_path")
    base = parse_config(str(path)) if path else RunConfig()
    return base.with_overrides(subcommand=name, **state.get("overrides", {})).with_overrides(**flags)


def _run(ctx: typer.Context, name: str, **flags: Any) -> None:
    try:
        cfg = _resolve(ctx, name, flags)
    except ConfigError as e:
        typer.echo(json.dumps({"success": False, "data": None, "error": str(e)}), err=True)
        raise typer.Exit(EXIT_USAGE)

    try:
        result = get_experiment(name).execute(ExecutionContext(), config=cfg)
    except Exception as e:
        logger.exception(f"{name} crashed")
        error = {"success": False, "data": None, "error": str(e)}
        typer.echo(json.dumps(error), err=True)
        raise typer.Exit(EXIT_FAILURE)

    output = format_envelope(result)
    if not result.get("success"):
        typer.echo(output, err=True)
        raise typer.Exit(EXIT_FAILURE)
    # CSV owns stdout when written there
    typer.echo(output, err="-" in (cfg.output, cfg.stats_output, cfg.matrix_output))
    if result.get("passed") is False:
        raise typer.Exit(EXIT_FAILURE)


@app.command()
def sample(
    ctx: typer.Context,
    atom: Optional[str] = typer.Option(None, help="complex-gaussian | real-gaussian | matched-discrete-real | matched-discrete-complex"),
    dim: Optional[int] = typer.Option(None, help="Matrix dimension"),
    count: Optional[int] = typer.Option(None, help="Number of samples"),
    output: Optional[str] = typer.Option(None, help="Spectra CSV path ('-' for stdout)"),
    matrix_output: Optional[str] = typer.Option(None, help="Matrix entries CSV path ('-' for stdout)"),
):
    """Sample matrices and emit spectra (sample_index,re,im,is_real) and entries (sample_index,i,j,re,im)."""
    _run(ctx, "sample", atom=atom, dim=dim, count=count, output=output, matrix_output=matrix_output)


@app.command()
def clt(
    ctx: typer.Context,
    case: Optional[str] = typer.Option(None, help="bulk | line | ginue"),
    atom: Optional[str] = typer.Option(None, help="Atom distribution (case default when omitted)"),
    dim: Optional[int] = typer.Option(None, help="Matrix dimension"),
    count: Optional[int] = typer.Option(None, help="Number of samples (>= 1000)"),
    family: Optional[str] = typer.Option(None, help="Test-function family"),
    center_re: Optional[float] = typer.Option(None, help="Real part of the bump center"),
    center_im: Optional[float] = typer.Option(None, help="Imaginary part of the bump center"),
    radius: Optional[float] = typer.Option(None, help="Bump radius"),
    degree: Optional[int] = typer.Option(None, help="Degree k of Re z^k"),
    normalization: Optional[str] = typer.Option(None, help="none | n_quarter"),
    quarter_dim: Optional[str] = typer.Option(None, help="half | full: n in n^{-1/4}"),
    tolerance: Optional[float] = typer.Option(None, help="Relative variance tolerance"),
    stats_output: Optional[str] = typer.Option(None, help="Raw statistics CSV path ('-' for stdout)"),
):
    """Monte Carlo linear statistics against the limiting normal law."""
    _run(
        ctx, "clt", case=case, atom=atom, dim=dim, count=count, family=family, center_re=center_re,
        center_im=center_im, radius=radius, degree=degree, normalization=normalization,
        quarter_dim=quarter_dim, tolerance=tolerance, stats_output=stats_output,
    )


@app.command()
def universality(
    ctx: typer.Context,
    atom: Optional[str] = typer.Option(None, help="First atom distribution"),
    atom_b: Optional[str] = typer.Option(None, help="Second atom distribution"),
    variance_b: Optional[float] = typer.Option(None, help="Entry variance of the second atom"),
    dim: Optional[int] = typer.Option(None, help="Matrix dimension"),
    count: Optional[int] = typer.Option(None, help="Samples per ensemble"),
    center_re: Optional[float] = typer.Option(None, help="Real part of the bump center"),
    center_im: Optional[float] = typer.Option(None, help="Imaginary part of the bump center"),
    radius: Optional[float] = typer.Option(None, help="Bump radius"),
    ks_max: Optional[float] = typer.Option(None, help="Largest accepted KS statistic"),
):
    """Compare two ensembles' linear-statistic cumulants."""
    _run(
        ctx, "universality", atom=atom, atom_b=atom_b, variance_b=variance_b, dim=dim, count=count,
        center_re=center_re, center_im=center_im, radius=radius, ks_max=ks_max,
    )


@app.command("kernel-table")
def kernel_table(
    ctx: typer.Context,
    regime: Optional[str] = typer.Option(None, help="complex-complex | real-real"),
    half_dim: Optional[int] = typer.Option(None, help="n for a 2n x 2n matrix"),
    grid: Optional[str] = typer.Option(None, help="Comma-separated kernel-coordinate points"),
    output: Optional[str] = typer.Option(None, help="CSV path ('-' for stdout)"),
):
    """Tabulate S, D, I over a grid (x,y,S,D,I)."""
    _run(ctx, "kernel-table", regime=regime, half_dim=half_dim, grid=grid, output=output)


@app.command()
def variance(
    ctx: typer.Context,
    regime: Optional[str] = typer.Option(None, help="complex-complex | real-real"),
    half_dim: Optional[int] = typer.Option(None, help="n for a 2n x 2n matrix"),
    count: Optional[int] = typer.Option(None, help="Monte Carlo samples"),
    center_re: Optional[float] = typer.Option(None, help="Real part of the bump center"),
    center_im: Optional[float] = typer.Option(None, help="Imaginary part of the bump center"),
    radius: Optional[float] = typer.Option(None, help="Bump radius"),
    pair_nodes: Optional[int] = typer.Option(None, help="Nodes per axis for double integrals"),
    costin_lebowitz: Optional[bool] = typer.Option(None, "--costin-lebowitz/--no-costin-lebowitz", help="Also evaluate kernel cumulants"),
):
    """Finite-n kernel variance vs prediction vs Monte Carlo."""
    _run(
        ctx, "variance", regime=regime, half_dim=half_dim, count=count, center_re=center_re,
        center_im=center_im, radius=radius, pair_nodes=pair_nodes, costin_lebowitz=costin_lebowitz,
    )


@app.command()
def verify(
    ctx: typer.Context,
    suite: Optional[str] = typer.Option(None, help="all | pfaffian | quaternion | combinatorics | specialfn | eigensolver"),
):
    """Run the exact-identity suites."""
    _run(ctx, "verify", suite=suite)


@app.command()
def classical(
    ctx: typer.Context,
    z_re: Optional[float] = typer.Option(None, help="Real part of z"),
    z_im: Optional[float] = typer.Option(None, help="Imaginary part of z"),
    dim: Optional[int] = typer.Option(None, help="Number of classical positions"),
    grid_points: Optional[int] = typer.Option(None, help="Density grid size"),
    output: Optional[str] = typer.Option(None, help="Profile CSV path ('-' for stdout)"),
):
    """Export p_c and the classical positions gamma_j(z)."""
    _run(ctx, "classical", z_re=z_re, z_im=z_im, dim=dim, grid_points=grid_points, output=output)


def run(argv=None) -> int:
    """Invoke the CLI and return its exit code instead of exiting."""
    try:
        code = app(args=list(sys.argv[1:] if argv is None else argv), standalone_mode=False)
    except typer.Exit as e:
        return e.exit_code
    except Exception as e:
        # click usage errors carry their own exit code (2)
        code = getattr(e, "exit_code", EXIT_FAILURE)
        show = getattr(e, "show", None)
        if callable(show):
            show()
        return code
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    app()
