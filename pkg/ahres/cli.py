"""Command line interface."""

import csv
import functools
import io
import json
import logging
import os
import pathlib
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import click
import numpy as np

from ahres.base import AhresError, ConfigError, DomainError
from ahres.checks import FLOW_SUITES, SUITES, run_suites
from ahres.config import RunConfig, parse_config, resolve_threads
from ahres.extension import derive_extended_coeffs
from ahres.flow import Stops, integrate_bicharacteristic
from ahres.solver import resonances_in_window, sweep_norm_estimate
from ahres.symbols import CompactifiedPhasePoint
from ahres.utils import canonical_json, parse_complex

logger = logging.getLogger(__name__)

LOG_LEVELS = [logging.WARNING, logging.INFO, logging.DEBUG]


def write_atomic(path, text):
    """Write text to a temporary file in the target directory and rename it into place."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=".{}.".format(path.name))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, str(path))
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def csv_text(header, rows, provenance=None):
    """CSV table with floats in their shortest round trip representation.

    With `provenance`, the table starts with ``# config_hash=...`` and
    ``# version=...`` comment lines.
    """
    buffer = io.StringIO()
    if provenance is not None:
        for key in ("config_hash", "version"):
            buffer.write("# {}={}\n".format(key, provenance[key]))
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()


def handle_errors(f):
    """Map errors to exit codes, 2 for invalid input (including a plain ValueError) and 1 for numerical failure."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (ConfigError, DomainError) as err:
            click.echo(json.dumps(err.to_dict(), sort_keys=True), err=True)
            sys.exit(2)
        except AhresError as err:
            click.echo(json.dumps(err.to_dict(), sort_keys=True), err=True)
            sys.exit(1)
        except ValueError as err:
            payload = {"error": err.__class__.__name__, "message": str(err), "details": {}}
            click.echo(json.dumps(payload, sort_keys=True), err=True)
            sys.exit(2)

    return wrapper


def load_config(config_path, seed=None):
    """Read the configuration file (defaults if None) and apply the seed override."""
    if config_path is None:
        config = RunConfig()
    else:
        config = parse_config(pathlib.Path(config_path).read_text(encoding="utf-8"))
    if seed is not None:
        config = replace(config, seed=seed)
    return config


def common_options(f):
    """Attach ``--config``, ``--out``, ``--seed`` and ``--threads``."""
    operators = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="JSON run configuration."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Output directory."),
        click.option("--seed", type=int, default=None, help="Random seed, overrides the configuration."),
        click.option("--threads", type=int, default=None, help="Worker threads, 0 means all cores."),
    ]
    for op in operators[::-1]:
        f = op(f)
    return f


@click.group()
@click.option("-v", "--verbose", count=True, help="Increase logging verbosity.")
def cli(verbose):
    """Resonances of even asymptotically hyperbolic metrics by the extension method."""
    logging.basicConfig(level=LOG_LEVELS[min(verbose, 2)],
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


@cli.command()
@common_options
@click.option("--plot", is_flag=True, help="Also write resonances.png.")
@handle_errors
def resonances(config_path, out_dir, seed, threads, plot):
    """Compute resonances in the configured window."""
    config = load_config(config_path, seed)
    threads = resolve_threads(threads)
    model = config.model.build()
    solver = config.solver

    result = resonances_in_window(model, list(config.modes), solver.window["re"], solver.window["im"],
                                  N=config.grid.N, absorption=config.absorption, method=solver.method,
                                  n_nodes=solver.n_nodes, probe_rank=solver.probe_rank, rng_seed=config.seed,
                                  filter_tol=solver.filter_tol, residual_tol=solver.residual_tol, threads=threads)

    payload = result.to_dict()
    payload["model"] = model.to_dict()
    payload["provenance"] = config.provenance(N=config.grid.N, absorption_mode=config.absorption.mode,
                                              notes=list(result.notes))
    text = canonical_json(payload)

    if out_dir is None:
        click.echo(text, nl=False)
        return
    write_atomic(pathlib.Path(out_dir) / "resonances.json", text)
    if plot:
        from ahres.visualization import plot_resonances

        ax = plot_resonances(result)
        ax.figure.savefig(str(pathlib.Path(out_dir) / "resonances.png"))
    logger.info("Wrote %d resonances to %s", len(result.entries), out_dir)


@cli.command()
@common_options
@handle_errors
def sweep(config_path, out_dir, seed, threads):
    """Measure resolvent norms along a line in the lower half plane."""
    config = load_config(config_path, seed)
    threads = resolve_threads(threads)
    model = config.model.build()
    config.check_sweep(model)
    sw = config.sweep

    result = sweep_norm_estimate(model, sw.im_sigma, sw.re_values, s=sw.s, absorption=config.absorption,
                                 source_center=sw.source["center"], source_width=sw.source["width"],
                                 oscillation=sw.oscillation, dual_order=sw.dual_order, mode_index=sw.mode,
                                 n_min=sw.n_min, threads=threads)

    header = ["re_sigma", "im_sigma", "ratio", "s", "N"]
    fit = result.to_dict()
    fit["provenance"] = config.provenance(absorption_mode=config.absorption.mode)
    table = csv_text(header, [[row[k] for k in header] for row in result.rows], fit["provenance"])

    if out_dir is None:
        click.echo(table, nl=False)
        click.echo(canonical_json(fit), nl=False)
        return
    write_atomic(pathlib.Path(out_dir) / "sweep.csv", table)
    write_atomic(pathlib.Path(out_dir) / "fit.json", canonical_json(fit))


def parse_seed_point(text):
    """Parse ``mu,y,nu,eta_hat,sgn`` into a compactified phase point."""
    parts = text.split(",")
    if len(parts) != 5:
        raise ConfigError("Seed point needs five comma separated values mu,y,nu,eta_hat,sgn.", "/flow/seed")
    try:
        mu, y, nu, eta_hat = (float(p) for p in parts[:4])
        sgn = int(float(parts[4]))
    except ValueError:
        raise ConfigError("Seed point has non-numeric entries: {}.".format(text), "/flow/seed")
    if sgn not in (-1, 1) or nu < 0:
        raise ConfigError("Seed point needs nu >= 0 and sgn in {-1, 1}.", "/flow/seed")
    return CompactifiedPhasePoint(mu, y, nu, eta_hat, sgn)


@cli.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON run configuration.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--seed", "seed_points", required=True, multiple=True,
              help="Start point mu,y,nu,eta_hat,sgn, may be repeated.")
@click.option("--kind", type=click.Choice(["classical", "semi"]), default="classical", show_default=True)
@click.option("--z", "z_text", default="1", show_default=True, help="Semiclassical spectral parameter a+bi.")
@click.option("--direction", type=click.Choice(["1", "-1"]), default="1", show_default=True)
@click.option("--threads", type=int, default=None, help="Worker threads over the seeds, 0 means all cores.")
@click.option("--plot", is_flag=True, help="Also write trajectory.png.")
@click.option("--animate", is_flag=True, help="Also write trajectory.gif tracing out the first trajectory.")
@handle_errors
def flow(config_path, out_dir, seed_points, kind, z_text, direction, threads, plot, animate):
    """Integrate bicharacteristics and emit them as one CSV table."""
    config = load_config(config_path)
    threads = resolve_threads(threads)
    starts = [parse_seed_point(text) for text in seed_points]
    try:
        z = parse_complex(z_text)
    except ValueError as err:
        raise ConfigError(str(err), "/flow/z")
    coeffs = derive_extended_coeffs(config.model.build())
    stops = Stops(config.flow.eps0, config.flow.eps1, config.flow.max_time)
    flow_kind = "semiclassical" if kind == "semi" else "classical"

    def run(start):
        return integrate_bicharacteristic(coeffs, start, int(direction), flow_kind, z, stops)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trajectories = list(pool.map(run, starts))
    else:
        trajectories = [run(start) for start in starts]

    rows = [[i] + row for i, traj in enumerate(trajectories) for row in traj.to_rows().tolist()]
    table = csv_text(["seed", "time", "mu", "y", "nu", "eta_hat"], rows, config.provenance())
    for i, traj in enumerate(trajectories):
        logger.info("Trajectory %d terminated with %s", i, traj.terminal.value)
    if out_dir is None:
        click.echo(table, nl=False)
        return
    write_atomic(pathlib.Path(out_dir) / "trajectory.csv", table)
    if plot:
        from ahres.visualization import plot_trajectory

        ax = None
        for traj in trajectories:
            ax = plot_trajectory(traj, ax=ax)
        ax.figure.savefig(str(pathlib.Path(out_dir) / "trajectory.png"))
    if animate:
        from matplotlib.animation import PillowWriter

        from ahres.visualization import create_animation

        fps = 12
        ani = create_animation(trajectories[0], fps=fps)
        ani.save(str(pathlib.Path(out_dir) / "trajectory.gif"), writer=PillowWriter(fps=fps))


def check_command():
    """Define the check subcommand with one flag per suite."""
    operators = [
        cli.command(name="check"),
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="JSON run configuration."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Output directory."),
        click.option("--seed", type=int, default=None, help="Random seed, overrides the configuration."),
        click.option("--threads", type=int, default=None, help="Worker threads, 0 means all cores."),
        click.option("--all", "run_all", is_flag=True, help="Run every suite."),
        click.option("--flow", "run_flow", is_flag=True, help="Run the dynamics suites."),
    ]
    operators += [
        click.option("--{}".format(name), "suite_{}".format(name.replace("-", "_")), is_flag=True,
                     help="Run the {} suite.".format(name))
        for name in SUITES
    ]

    @handle_errors
    def f(config_path, out_dir, seed, threads, run_all, run_flow, **flags):
        """Run invariant suites and emit a JSON report."""
        config = load_config(config_path, seed)
        threads = resolve_threads(threads)
        names = [name for name in SUITES if run_all or flags["suite_{}".format(name.replace("-", "_"))]
                 or (run_flow and name in FLOW_SUITES)]
        if not names:
            raise ConfigError("No suite selected, use --all or a suite flag.", "/check")

        report = run_suites(config, names, threads)
        report["provenance"] = config.provenance()
        text = canonical_json(report)
        if out_dir is None:
            click.echo(text, nl=False)
        else:
            write_atomic(pathlib.Path(out_dir) / "check.json", text)
        if not report["passed"]:
            sys.exit(1)

    for op in operators[::-1]:
        f = op(f)
    return f


check = check_command()
