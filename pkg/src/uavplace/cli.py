"""Command line entry point.

Commands:
  uavplace gen      Generate a scenario (users, candidate grids) and save it
  uavplace solve    Place the UAVs at the configured SINR threshold
  uavplace sweep    Solve over a range of thresholds, or over many seeds
  uavplace export   Write plot-ready CSV/JSON tables from a saved run

Exit codes: 0 feasible, 2 infeasible but a best-effort result was written,
1 error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import ScenarioConfig, load_config
from .errors import UavPlacementError
from .radio import write_gain_tables, write_matrix_csv
from .scenario import (build_scenario, default_outdir, export, load_run, prepare, run_seed_sweep,
                       run_solve, run_sweep, save_run, scenario_record)

EXIT_FEASIBLE, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2

config_option = click.option(
    "-c", "--config", "config_path", type=click.Path(exists=True, dir_okay=False),
    default=None, help="Scenario config file; defaults reproduce the reference setup.",
)
outdir_option = click.option(
    "-o", "--outdir", type=click.Path(file_okay=False), default=None,
    help="Output directory (default: $UAVPLACE_OUTDIR or ./uavplace-out).",
)
method_option = click.option("--method", type=click.Choice(["lp", "brute"]), default="lp", show_default=True)


def _config(path) -> ScenarioConfig:
    return load_config(path) if path else ScenarioConfig()


def _outdir(path) -> Path:
    return Path(path) if path else default_outdir()


@click.group()
@click.version_option(version=__version__, prog_name="uavplace")
def cli():
    """Multi-UAV base-station placement from predefined candidate grids."""


@cli.command()
@config_option
@outdir_option
@click.option("--print-config", is_flag=True, help="Print the effective config and exit.")
def gen(config_path, outdir, print_config):
    """Generate users and candidate grids and save scenario.json."""
    cfg = _config(config_path)
    if print_config:
        click.echo(cfg.to_text(), nl=False)
        return
    sc = build_scenario(cfg)
    out = _outdir(outdir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "scenario.json"
    path.write_text(json.dumps(scenario_record(sc), indent=2) + "\n", encoding="utf-8")
    click.echo(f"{sc.space.size} combinations ({sc.raw_space.size} before filtering); wrote {path}")


@cli.command()
@config_option
@outdir_option
@method_option
@click.option("--threshold-db", type=float, default=None, help="Override gamma_th_db from the config.")
@click.option("--dump-tables", is_flag=True, help="Also write S and the gain tables as CSV.")
def solve(config_path, outdir, method, threshold_db, dump_tables):
    """Place every UAV so each user meets the SINR threshold."""
    cfg = _config(config_path)
    if threshold_db is not None:
        cfg = cfg.replace(gamma_th_db=threshold_db)
    solved = prepare(cfg)
    art = run_solve(cfg, method, solved)

    out = _outdir(outdir)
    save_run(art, out)
    for what in ("placement", "sinr"):
        export(art, "csv", what, out)
    if dump_tables:
        write_matrix_csv(out / "sinr_matrix.csv", solved.S, seed=art.seed, config_hash=art.config_hash)
        write_gain_tables(out / "gain_tables.csv", solved.tables, seed=art.seed, config_hash=art.config_hash)

    p = art.placement
    status = "feasible" if p["feasible"] else "INFEASIBLE (best effort)"
    click.echo(f"{status}: combination {p['combination']}, min SINR {p['min_sinr_db']:.3f} dB "
               f"vs threshold {p['threshold_db']:.3f} dB; {p['feasible_count']} feasible combinations")
    if p["relaxation_gap"]:
        click.echo(f"LP rounded to {p['lp_index']}, which fails the exact check; substituted max-min combination")
    for j, pos in enumerate(p["positions"], start=1):
        click.echo(f"  UAV {j}: x={pos[0]:.2f} y={pos[1]:.2f} z={pos[2]:.2f}")
    click.echo(f"wrote {out}")
    sys.exit(EXIT_FEASIBLE if p["feasible"] else EXIT_INFEASIBLE)


@cli.command()
@config_option
@outdir_option
@method_option
@click.option("--from-db", type=float, default=-6.38, show_default=True)
@click.option("--to-db", type=float, default=-10.0, show_default=True)
@click.option("--steps", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--seeds", type=click.IntRange(min=1), default=None,
              help="Instead of a threshold sweep, solve N seeds starting at the config seed.")
def sweep(config_path, outdir, method, from_db, to_db, steps, seeds):
    """Sweep the SINR threshold (or the user drop) on one config."""
    cfg = _config(config_path)
    out = _outdir(outdir)
    if seeds:
        base = cfg.effective_seed
        art = run_seed_sweep(cfg, range(base, base + seeds), method)
        export(art, "csv", "scatter", out)
    else:
        thresholds = np.linspace(from_db, to_db, steps).tolist()
        art = run_sweep(cfg, thresholds, method)
        export(art, "csv", "sweep", out)
    path = save_run(art, out)
    n_ok = sum(rec["feasible"] for rec in art.sweep)
    click.echo(f"{n_ok}/{len(art.sweep)} runs feasible; wrote {path}")
    sys.exit(EXIT_FEASIBLE if n_ok == len(art.sweep) else EXIT_INFEASIBLE)


@cli.command(name="export")
@click.argument("run", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--what", type=click.Choice(["placement", "sinr", "sweep", "scatter"]), required=True)
@outdir_option
def export_cmd(run, fmt, what, outdir):
    """Export a table from a saved run-solve.json / run-sweep.json / run-scatter.json."""
    art = load_run(run)
    out = Path(outdir) if outdir else Path(run).parent
    click.echo(f"wrote {export(art, fmt, what, out)}")


def main():
    try:
        cli(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_ERROR)
    except click.exceptions.Abort:
        sys.exit(EXIT_ERROR)
    except (UavPlacementError, OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)


if __name__ == "__main__":
    main()
