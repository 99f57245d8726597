"""
Command-line interface for deltawell
Run with: deltawell [--log-level LEVEL] COMMAND [options]

Commands: density, survival, lambda, verify, scan
"""
from __future__ import annotations

import dataclasses
import functools
import json
import logging
import os
from pathlib import Path

import click
import numpy as np
import pandas as pd
from dotenv import load_dotenv

from . import __version__
from .config import LOG_LEVEL_ENV, load_run_config
from .errors import ConfigError, ConvergenceError, DeltaWellError, UnsupportedError
from .export import fit_trailer, write_gnuplot, write_table
from .observables import (CLOSED_FORM, DecayCurve, asymptotic_slope, decay_curve, decay_rate,
                          fit_exponential, lambda_peak, large_l_limit, quadrature_curve,
                          survival_closed_form, survival_quadrature)
from .propagator import WaveField, region_two_centroid
from .spectral import GAUSSIAN
from .verify import run_checks

logger = logging.getLogger(__name__)

EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CONVERGENCE = 3
EXIT_VERIFY = 4

SLOPE_TIMES = np.geomspace(50.0, 1000.0, 40)


def run_options(command):
    """Options shared by every command; each mirrors a config-file key"""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="key=value run-config file (default: $DELTAWELL_CONFIG)"),
        click.option("--L", "L", type=float, default=None, help="well length [3]"),
        click.option("--V0", "V0", type=float, default=None, help="barrier strength [1]"),
        click.option("--K", "K", type=float, default=None, help="gaussian spectral width [0.5]"),
        click.option("--sf", type=str, default=None, help="gaussian | square | table:<path>"),
        click.option("--x-grid", "x_grid", type=str, default=None, help="min:max:n[:log]"),
        click.option("--t-grid", "t_grid", type=str, default=None, help="min:max:n[:log]"),
        click.option("--upper", type=float, default=None, help="upper limit of the survival region"),
        click.option("--fit-window", "fit_window", type=str, default=None, help="lo:hi"),
        click.option("--out", type=click.Path(), default=None, help="output file or directory"),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None),
        click.option("--tol-abs", "tol_abs", type=float, default=None),
        click.option("--tol-rel", "tol_rel", type=float, default=None),
        click.option("--gnuplot", is_flag=True, default=False, help="also write a gnuplot script"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def handle_errors(command):
    """Map library errors onto exit codes"""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConfigError as error:
            raise click.UsageError(str(error)) from error
        except ConvergenceError as error:
            click.echo(f"❌ {error}", err=True)
            raise SystemExit(EXIT_CONVERGENCE) from error
        except DeltaWellError as error:
            click.echo(f"❌ {error}", err=True)
            raise SystemExit(EXIT_FAILURE) from error
    return wrapper


def _load(options):
    config_path = options.pop("config_path", None)
    options["format"] = options.pop("fmt", None)
    # an unset flag must not override the config file
    options["gnuplot"] = True if options.get("gnuplot") else None
    return load_run_config(config_path, **options)


def _output_path(config, default_stem):
    return Path(config.out) if config.out else Path(f"{default_stem}.{config.format}")


def _build_field(config):
    return WaveField.build(config.potential, config.spectral_function(),
                           tol_abs=config.tol_abs, tol_rel=config.tol_rel)


def _emit(frame, path, meta, config, plotted, title, trailer=None, log_scale=False):
    write_table(frame, path, meta, config.format, trailer=trailer)
    if config.gnuplot and config.format == "csv":
        write_gnuplot(path, frame.columns, plotted, title, log_scale=log_scale)
    click.echo(f"✅ Wrote {path}", err=True)


@click.group()
@click.version_option(__version__, prog_name="deltawell")
@click.option("--log-level", default=None, help="DEBUG, INFO, WARNING (default: $DELTAWELL_LOG_LEVEL or WARNING)")
def main(log_level):
    """Exact wavefunctions and survival probabilities for a wall plus a delta barrier."""
    load_dotenv()
    level = (log_level or os.environ.get(LOG_LEVEL_ENV) or "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@run_options
@click.option("--times", type=str, default=None, help="comma-separated snapshot times")
@handle_errors
def density(**options):
    """Density snapshots psi(x, t) on the x grid, one file per time."""
    config = _load(options)
    wf = _build_field(config)
    x = config.x_grid.values()
    out_dir = Path(config.out) if config.out else Path("density")
    click.echo(f"🚀 {len(config.times)} snapshots, mode={wf.mode}, c1={wf.c1:.12g}", err=True)
    for t in config.times:
        psi = wf.psi(x, t)
        frame = pd.DataFrame({
            "x": x,
            "t": np.full_like(x, t),
            "re_psi": psi.real,
            "im_psi": psi.imag,
            "density": np.abs(psi) ** 2,
        })
        meta = {**config.metadata(), "c1": wf.c1, "mode": wf.mode, "t": float(t)}
        try:
            meta["centroid_region_II"] = region_two_centroid(wf, t)
        except UnsupportedError:
            logger.info("no region II centroid for t=%g", t)
        path = out_dir / f"density_t{t:.3f}.{config.format}"
        _emit(frame, path, meta, config, ["density"], f"density t={t:g}")


@main.command()
@run_options
@click.option("--with-quadrature", is_flag=True, default=False,
              help="add a p_in_quadrature column integrated from the density")
@handle_errors
def survival(with_quadrature, **options):
    """Survival probability P_in(t) and lambda(t) on the t grid."""
    config = _load(options)
    cfg, sf = config.potential, config.spectral_function()
    times = config.t_grid.values()
    closed = sf.kind == GAUSSIAN and config.upper is None
    if closed:
        curve = DecayCurve(times=times, p_in=survival_closed_form(times, config.K, cfg),
                           lam=decay_rate(times, config.K, cfg), source=CLOSED_FORM)
    else:
        curve = quadrature_curve(_build_field(config), times, upper=config.upper)
    frame = curve.to_frame()
    if with_quadrature and closed:
        frame["p_in_quadrature"] = survival_quadrature(times, _build_field(config))

    trailer = None
    if config.fit_window:
        result = fit_exponential(curve, config.fit_window)
        frame["p_fit"] = result.a * np.exp(-result.b * times)
        trailer = fit_trailer(result)
        click.echo(f"📈 fit a={result.a:.6g} b={result.b:.6g} chi2/dof={result.chi2_per_dof:.3e}", err=True)

    meta = {**config.metadata(), "source": curve.source,
            "upper": config.upper if config.upper is not None else cfg.L}
    _emit(frame, _output_path(config, "survival"), meta, config,
          [name for name in ("p_in", "p_fit") if name in frame], "survival probability", trailer)


@main.command("lambda")
@run_options
@handle_errors
def lambda_command(**options):
    """Decay rate lambda(t) = -d ln P_in / dt on the t grid."""
    config = _load(options)
    cfg, sf = config.potential, config.spectral_function()
    times = config.t_grid.values()
    if sf.kind == GAUSSIAN and config.upper is None:
        lam, source = decay_rate(times, config.K, cfg), CLOSED_FORM
    else:
        curve = quadrature_curve(_build_field(config), times, upper=config.upper)
        lam, source = curve.lam, curve.source
    frame = pd.DataFrame({"t": times, "lambda": lam})
    _emit(frame, _output_path(config, "lambda"), {**config.metadata(), "source": source}, config,
          ["lambda"], "decay rate")


@main.command()
@run_options
@handle_errors
def verify(**options):
    """Run the invariant suite and write a pass/fail JSON report."""
    config = _load(options)
    report = run_checks(config)
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if config.out:
        Path(config.out).parent.mkdir(parents=True, exist_ok=True)
        Path(config.out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)
    for check in report.checks:
        mark = "✅" if check.passed else "❌"
        click.echo(f"{mark} {check.name}: {check.measured:.3e} (tolerance {check.tolerance:.1e})", err=True)
    if not report.passed:
        raise SystemExit(EXIT_VERIFY)


@main.command()
@run_options
@click.option("--param", type=click.Choice(["K", "L", "V0"]), required=True, help="parameter to vary")
@click.option("--values", "values", type=str, required=True, help="comma-separated values")
@handle_errors
def scan(param, values, **options):
    """Decay characteristics for a sweep of K, L or V0 (gaussian spectrum)."""
    config = _load(options)
    try:
        sweep = [float(value) for value in values.split(",") if value.strip()]
    except ValueError as error:
        raise ConfigError("values", f"cannot parse {values!r}") from error
    if not sweep:
        raise ConfigError("values", "needs at least one value")

    rows = []
    for value in sweep:
        point = dataclasses.replace(config, **{param: value})
        cfg, K = point.potential, point.K
        peak = lambda_peak(K, cfg)
        rows.append({
            param: value,
            "p_in0": survival_closed_form(0.0, K, cfg),
            "large_L_limit": large_l_limit(K, cfg.V0),
            "lambda_peak": peak.height,
            "t_peak": peak.t_peak,
            "asymptotic_slope": asymptotic_slope(decay_curve(K, cfg, SLOPE_TIMES), SLOPE_TIMES[0]),
        })
    frame = pd.DataFrame(rows)
    meta = {key: item for key, item in config.metadata().items() if key != param}
    meta["param"] = param
    _emit(frame, _output_path(config, "scan"), meta, config, ["p_in0", "lambda_peak"], f"scan over {param}")


if __name__ == "__main__":
    main()
