"""
Flask CLI Command Extensions

Every laboratory operation is a `flask <command>`; errors are mapped to exit
codes by shearlab.common.error_handlers.
"""
import json
from pathlib import Path

import click

from shearlab import app, config
from shearlab.common import status
from shearlab.common.error_handlers import handle_errors
from shearlab.common.tables import write_table
from shearlab.exceptions import DataValidationError
from shearlab.models import load_config
from shearlab import runner
from shearlab.spectral import Basis, DEFAULT_ORACLE_POINTS, coefficient_sweep


def _floats(text: str, name: str):
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as error:
        raise DataValidationError(f"{name} must be a comma separated list of numbers: {text!r}") from error


def config_options(command):
    """--config, --override and --out shared by the scenario commands"""
    command = click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
                           help="Directory for the run artifacts")(command)
    command = click.option("--override", "overrides", multiple=True, metavar="KEY=VALUE",
                           help="Dotted config override, repeatable")(command)
    command = click.option("--config", "config_path", type=click.Path(dir_okay=False), required=True,
                           help="Scenario JSON file")(command)
    return command


######################################################################
# Run a scenario
# Usage:
#   flask simulate --config scenarios/finite_h2_stable.json
######################################################################
@app.cli.command("simulate")
@config_options
@click.option("--threads", type=int, default=config.THREADS, show_default=True)
@click.option("--strict", is_flag=True, help="Exit non-zero when a check fails")
@handle_errors
def simulate(config_path, overrides, out_dir, threads, strict):
    """Evolves every mode of a scenario and writes CSVs, summary and manifest"""
    scenario = load_config(config_path, overrides)
    result = runner.run(scenario, out_dir, threads, strict)
    for line in result.summary:
        click.echo(line)
    click.echo(f"artifacts written to {result.out_dir}")
    return result.exit_code


@app.cli.command("show-config")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), required=True)
@click.option("--override", "overrides", multiple=True, metavar="KEY=VALUE")
@handle_errors
def show_config(config_path, overrides):
    """Prints the scenario with every default filled in"""
    scenario = load_config(config_path, overrides)
    click.echo(json.dumps(scenario.serialize(), indent=2, sort_keys=True))
    return status.EXIT_OK


@app.cli.command("blowup-probe")
@config_options
@click.option("--horizons", default="25,50,100", show_default=True)
@click.option("--strict", is_flag=True)
@handle_errors
def blowup_probe(config_path, overrides, out_dir, horizons, strict):
    """Fits dy W(t, 0) against log t and follows the H2 ratio across horizons"""
    scenario = load_config(config_path, overrides)
    target = out_dir or runner.resolve_out_dir(scenario)
    result = runner.blowup_probe(scenario, _floats(horizons, "horizons"), target, strict)
    for line in result.lines:
        click.echo(line)
    return result.exit_code


@app.cli.command("decay-report")
@click.option("--run", "run_dir", type=click.Path(file_okay=False, exists=True), required=True)
@click.option("--window", default=None, help="t_min,t_max (default [T/10, T])")
@handle_errors
def decay_report(run_dir, window):
    """Power-law fits of the velocity norms and scattering residuals of a finished run"""
    bounds = tuple(_floats(window, "window")) if window else None
    for row in runner.decay_report(run_dir, bounds):
        click.echo(
            f"k={row['k']:.6g} {row['quantity']}: exponent {row['exponent']:.4f} r2 {row['r_squared']:.4f}"
        )
    return status.EXIT_OK


@app.cli.command("energy-report")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False, exists=True), required=True)
@click.option("--tolerance", type=float, default=config.MONOTONICITY_FLOOR, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@handle_errors
def energy_report(csv_path, tolerance, out_path):
    """Counts steps where a weighted energy increases beyond the relative tolerance"""
    rows = runner.energy_report(csv_path, tolerance)
    for row in rows:
        click.echo(f"{row['quantity']}: {row['violations']} violations, {row['max_relative_violation']:.6g}")
    if out_path:
        write_table(rows, Path(out_path), list(rows[0]))
    return status.EXIT_OK


@app.cli.command("oracle")
@click.option("--k", "wavenumber", type=float, default=1.0, show_default=True)
@click.option("--width", type=float, default=1.0, show_default=True)
@click.option("--t-max", type=float, default=100.0, show_default=True)
@click.option("--samples", type=int, default=200, show_default=True)
@click.option("--cc-strength", type=float, default=0.1, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=config.OUTPUT_DIR)
@handle_errors
def oracle(wavenumber, width, t_max, samples, cc_strength, out_dir):
    """Couette multiplier decay curves and constant-coefficient propagator values"""
    if wavenumber == 0 or samples < 2 or not t_max > 1.0:
        raise DataValidationError("oracle needs k != 0, samples >= 2 and t-max > 1")
    times = [1.0 + (t_max - 1.0) * index / (samples - 1) for index in range(samples)]
    decay, propagator, fits = runner.oracle_tables(wavenumber, width, times, cc_strength)
    out = Path(out_dir)
    write_table(decay, out / "oracle_decay.csv", ["t", "v1_norm", "v2_norm"])
    write_table(propagator, out / "oracle_propagator.csv", ["k", "eta", "t", "re", "im", "abs"])
    for name, fit in fits.items():
        click.echo(f"{name}: exponent {fit.exponent:.4f} r2 {fit.r_squared:.4f}")
    return status.EXIT_OK


@app.cli.command("verify-basis")
@click.option("--basis", type=click.Choice(["exp", "sin"]), default="exp", show_default=True)
@click.option("--index-max", type=int, default=10, show_default=True)
@click.option("--ks", default="1,2", show_default=True)
@click.option("--times", default="0,1,5,10", show_default=True)
@click.option("--n-points", type=int, default=DEFAULT_ORACLE_POINTS, show_default=True)
@click.option("--threads", type=int, default=config.THREADS, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=config.OUTPUT_DIR)
@click.option("--strict", is_flag=True, help="Fail when analytic and numeric disagree beyond 1e-6")
@handle_errors
def verify_basis(basis, index_max, ks, times, n_points, threads, out_dir, strict):
    """Compares analytic, printed and numerically solved stream-function coefficients"""
    chosen = Basis(basis)
    indices = range(1, index_max + 1) if chosen is Basis.SIN else range(-index_max, index_max + 1)
    records, summary = coefficient_sweep(
        _floats(ks, "ks"), _floats(times, "times"), indices, chosen, n_points, threads
    )
    rows = [
        {
            "n": record.n, "m": record.m, "k": record.k, "t": record.t,
            "analytic_re": record.analytic.real, "analytic_im": record.analytic.imag,
            "printed_re": record.printed.real, "printed_im": record.printed.imag,
            "numeric_re": record.numeric.real, "numeric_im": record.numeric.imag,
            "disc_an_num": record.disc_an_num, "disc_an_printed": record.disc_an_printed,
        }
        for record in records
    ]
    if rows:
        write_table(rows, Path(out_dir) / f"verify_basis_{basis}.csv", list(rows[0]))
    click.echo(
        f"{summary.count} coefficients: max analytic/numeric {summary.max_an_num:.3e}, "
        f"max analytic/printed {summary.max_an_printed:.3e}"
    )
    if strict and summary.max_an_num > 1.0e-6:
        return status.EXIT_CHECKS_FAILED
    return status.EXIT_OK
