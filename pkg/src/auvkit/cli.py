"""Command-line entry point.

Subcommands: hull, trim, linearize, simulate, compare.  Speeds are accepted
in knots and angles printed in degrees (data-sheet conventions); everything
internal is SI/radians.  Exit codes: 0 success, 2 usage, 3 numeric failure
(non-convergence or divergence), 4 configuration error.
"""

from __future__ import annotations

import functools
import json
import math
import os
import sys
import time

import click
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import control, linearize, report, sim, trim as trim_mod
from .errors import (ConfigError, ConvergenceError, DomainError,
                     SimulationDivergedError)
from .hull import hull_profile
from .params import (KNOT, VehicleParams, load_params, params_from_mapping,
                     params_to_mapping)

EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_CONFIG = 4


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except (ConvergenceError, SimulationDivergedError) as exc:
            click.echo(f"numeric failure: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)
        except DomainError as exc:
            click.echo(f"usage error: {exc}", err=True)
            sys.exit(EXIT_USAGE)
    return wrapper


def common_options(fn):
    fn = click.option("--config", "config_path", type=click.Path(exists=True),
                      default=None, help="Vehicle parameter file (TOML).")(fn)
    fn = click.option("--out-dir", default=".", show_default=True,
                      help="Directory for output files.")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Override the scenario RNG seed.")(fn)
    fn = click.option("--force", is_flag=True,
                      help="Allow overwriting existing outputs.")(fn)
    return fn


def _load_vehicle(config_path):
    if config_path is None:
        return VehicleParams().validate()
    return load_params(config_path)


def _prepare_out(out_dir):
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


@click.group()
@click.version_option(report.tool_version(), prog_name="auvkit")
def main():
    """Torpedo-AUV dynamics, trim, linear analysis and control scenarios."""


@main.command("hull")
@common_options
@click.option("--samples", type=int, default=200, show_default=True,
              help="Number of profile sample points (>= 2).")
@handle_errors
def cmd_hull(config_path, out_dir, seed, force, samples):
    """Sample the hull radius profile to CSV."""
    params = _load_vehicle(config_path)
    out_dir = _prepare_out(out_dir)
    xi, r = hull_profile(params.hull, samples)
    path = os.path.join(out_dir, "hull.csv")
    report.ensure_writable(path, force)
    lines = ["xi_m,r_m"] + [f"{x!r},{y!r}" for x, y in zip(xi, r)]
    report.atomic_write_text(path, "\n".join(lines) + "\n")
    click.echo(f"wrote {path} ({samples} samples, length {params.hull.l} m)")


_TRIM_ROWS = (
    ("Body-frame surge velocity", "u", "m/s", lambda d, U: d.state(U).nu[0]),
    ("Body-frame sway velocity", "v", "m/s", lambda d, U: d.state(U).nu[1]),
    ("Body-frame heave velocity", "w", "m/s", lambda d, U: d.state(U).nu[2]),
    ("Earth-frame roll", "phi", "deg", lambda d, U: math.degrees(d.phi)),
    ("Earth-frame pitch", "theta", "deg", lambda d, U: math.degrees(d.theta)),
    ("Propeller rotation rate", "n", "rpm", lambda d, U: d.n_rpm),
    ("Angle of attack", "alpha", "deg", lambda d, U: math.degrees(d.alpha)),
    ("Angle of sideslip", "beta", "deg", lambda d, U: math.degrees(d.beta)),
    ("Propeller inflow rate", "u_p", "m/s", lambda d, U: d.u_p),
    ("Stern angle 1", "delta_s1", "deg", lambda d, U: math.degrees(d.delta_s1)),
    ("Stern angle 2", "delta_s2", "deg", lambda d, U: math.degrees(d.delta_s2)),
    ("Rudder angle 1", "delta_r1", "deg", lambda d, U: math.degrees(d.delta_r1)),
    ("Rudder angle 2", "delta_r2", "deg", lambda d, U: math.degrees(d.delta_r2)),
)


def trim_to_dict(result, U):
    d = result.decision
    values = {sym: fn(d, U) for _, sym, _, fn in _TRIM_ROWS}
    return {
        "speed_mps": U,
        "values": values,
        "units": {sym: unit for _, sym, unit, _ in _TRIM_ROWS},
        "residual_norm": result.residual_norm,
        "iterations": result.iterations,
        "converged": result.converged,
        "clamped": result.clamped,
    }


@main.command("trim")
@common_options
@click.option("--speed-knots", type=float, required=True,
              help="Commanded total speed in knots.")
@click.option("--roll-mode", type=click.Choice(["free", "zero"]),
              default="free", show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.option("--max-iter", type=int, default=100, show_default=True)
@handle_errors
def cmd_trim(config_path, out_dir, seed, force, speed_knots, roll_mode, tol,
             max_iter):
    """Solve level flight at the commanded speed."""
    params = _load_vehicle(config_path)
    out_dir = _prepare_out(out_dir)
    U = speed_knots * KNOT
    if U <= 0:
        raise DomainError("speed must be positive")
    result = trim_mod.solve_trim(U, params, tol=tol, max_iter=max_iter,
                                 roll_mode=roll_mode)
    click.echo(f"Level flight of AUV at {speed_knots:g} knots "
               f"(U = {U:.4f} m/s, {result.iterations} iterations, "
               f"residual {result.residual_norm:.2e})")
    click.echo(f"{'Variable':<28}{'Symbol':<10}{'Units':<7}{'Value':>12}")
    for label, sym, unit, fn in _TRIM_ROWS:
        click.echo(f"{label:<28}{sym:<10}{unit:<7}{fn(result.decision, U):>12.4f}")
    path = os.path.join(out_dir, f"trim_{speed_knots:g}kn.json")
    report.ensure_writable(path, force)
    report.atomic_write_text(path, json.dumps(trim_to_dict(result, U), indent=2) + "\n")
    click.echo(f"wrote {path}")
    if not result.converged:
        sys.exit(EXIT_NUMERIC)


def _print_ss(name, ss):
    click.echo(f"{name}: states {ss.state_labels}, input {ss.input_labels}")
    with np.printoptions(precision=5, suppress=True):
        click.echo(f"A =\n{ss.A}")
        click.echo(f"B =\n{ss.B}")


def _print_tf(name, tf):
    num = ", ".join(f"{c:.5g}" for c in tf.num)
    den = ", ".join(f"{c:.5g}" for c in tf.den)
    click.echo(f"{name}: num [{num}]  den [{den}]")


@main.command("linearize")
@common_options
@click.option("--speed-knots", type=float, default=4.0, show_default=True)
@click.option("--subsystem", type=click.Choice(["depth", "yaw", "speed", "all"]),
              default="all", show_default=True)
@click.option("--compare-numeric", is_flag=True,
              help="Add the numeric-Jacobian comparison table.")
@handle_errors
def cmd_linearize(config_path, out_dir, seed, force, speed_knots, subsystem,
                  compare_numeric):
    """Emit linear subsystem models at an operating speed."""
    params = _load_vehicle(config_path)
    _prepare_out(out_dir)
    U = speed_knots * KNOT
    if U <= 0:
        raise DomainError("speed must be positive")
    wants = ("depth", "yaw", "speed") if subsystem == "all" else (subsystem,)

    if "depth" in wants:
        ss = linearize.depth_pitch_model(U, params)
        _print_ss("depth-pitch", ss)
        gz, gth, gout = linearize.depth_transfer_functions(U, params)
        _print_tf("G_theta", gth)
        _print_tf("G_z_outer", gout)
        _print_tf("G_z", gz)
    if "yaw" in wants:
        ss, gpsi, gy = linearize.yaw_model(U, params)
        _print_ss("yaw", ss)
        _print_tf("G_psi", gpsi)
        _print_tf("G_y", gy)
    if "speed" in wants:
        gu = linearize.speed_model(U, params)
        _print_tf("G_u", gu)

    click.echo("\nderived vs printed reference constants:")
    for line in linearize.compare_with_paper(U, params).lines():
        click.echo("  " + line)

    if compare_numeric:
        result = trim_mod.solve_trim(U, params)
        state = result.decision.state(U)
        cmd = result.decision.command()
        click.echo("\nanalytic vs reduced numeric Jacobian "
                   "(tolerance max(5% rel, 0.02 abs)):")
        analytic = {
            "depth": linearize.depth_pitch_model(U, params),
            "yaw": linearize.yaw_model(U, params)[0],
        }
        gu = linearize.speed_model(U, params, n_trim_rps=result.decision.n_rpm / 60.0)
        analytic["speed"] = linearize.StateSpaceModel(
            np.array([[-gu.den[1] / gu.den[0]]]),
            np.array([[gu.num[0] / gu.den[0]]]), ("u",), ("n",))
        for name in wants:
            numeric = linearize.reduced_jacobian(name, state, cmd, params)
            ok, worst = linearize.block_agreement(analytic[name], numeric)
            click.echo(f"  {name:<6} {'OK' if ok else 'MISMATCH'} "
                       f"(worst tolerance use {worst:.2f}x)")
            with np.printoptions(precision=5, suppress=True):
                click.echo(f"    analytic A:\n{analytic[name].A}")
                click.echo(f"    numeric  A:\n{numeric.A}")


def _scenario_from_file(path):
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    name = os.path.splitext(os.path.basename(path))[0]
    return data, name


def _run_and_write(scenario, params, scenario_mapping, out_dir, stem, seed,
                   force, plots, command):
    t0 = time.time()
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    metrics_path = os.path.join(out_dir, f"{stem}_metrics.json")
    manifest_path = os.path.join(out_dir, f"{stem}_manifest.json")
    for p in (csv_path, metrics_path, manifest_path):
        report.ensure_writable(p, force)

    def progress(t, total):
        print(f"\r{stem}: t = {t:7.1f}/{total:.0f} s", end="", file=sys.stderr)

    try:
        log, metrics = sim.run_scenario(scenario, params, progress=progress)
    except SimulationDivergedError as exc:
        print(file=sys.stderr)
        if exc.partial_log is not None and len(exc.partial_log):
            partial = csv_path + ".partial"
            report.write_log_csv(exc.partial_log, partial)
            click.echo(f"kept partial log in {partial}", err=True)
        raise
    print(file=sys.stderr)

    report.write_log_csv(log, csv_path)
    report.write_metrics(metrics, metrics_path)
    outputs = [csv_path, metrics_path]
    if plots:
        outputs += report.render_scenario_figures(
            log, out_dir, stem, has_lawnmow=scenario.lawnmow is not None,
            has_current=scenario.current.U0 > 0 or scenario.current.mu > 0)
    report.write_manifest(manifest_path, command, scenario.seed,
                          params_to_mapping(params), scenario_mapping,
                          outputs, time.time() - t0)
    click.echo(f"wrote {csv_path}")
    click.echo(f"wrote {metrics_path} "
               f"(rmse_y={metrics.rmse_y:.4g}, rmse_z={metrics.rmse_z:.4g}, "
               f"rmse_u={metrics.rmse_u:.4g})")
    click.echo(f"wrote {manifest_path}")
    return log, metrics


@main.command("simulate")
@common_options
@click.argument("scenario_path", required=False,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--from-manifest", "manifest_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Reproduce a previous run from its manifest.")
@click.option("--plots/--no-plots", default=True, show_default=True,
              help="Render figures next to the CSV output.")
@handle_errors
def cmd_simulate(config_path, out_dir, seed, force, scenario_path,
                 manifest_path, plots):
    """Run one closed-loop scenario file (TOML)."""
    out_dir = _prepare_out(out_dir)
    if manifest_path is not None:
        doc = report.read_manifest(manifest_path)
        params = params_from_mapping(doc["config"])
        mapping = doc["scenario"]
        stem = doc.get("stem") or "rerun"
        scenario = sim.scenario_from_mapping(mapping, name=stem)
    elif scenario_path is not None:
        mapping, stem = _scenario_from_file(scenario_path)
        params = _load_vehicle(config_path)
        vehicle_overrides = mapping.get("vehicle")
        if vehicle_overrides:
            params = params_from_mapping(vehicle_overrides, base=params)
        scenario = sim.scenario_from_mapping(mapping, name=stem)
    else:
        raise DomainError("provide a scenario file or --from-manifest")
    if seed is not None:
        import dataclasses
        scenario = dataclasses.replace(scenario, seed=seed)
        mapping = dict(mapping)
        mapping.setdefault("sim", {})
        mapping["sim"] = dict(mapping["sim"], seed=seed)
    _run_and_write(scenario, params, mapping, out_dir, scenario.name,
                   scenario.seed, force, plots, command="simulate")


def _compare_cell(args):
    mapping, params_mapping, mode, name = args
    params = params_from_mapping(params_mapping)
    mapping = json.loads(json.dumps(mapping))  # deep copy
    mapping.setdefault("controller", {})["mode"] = mode
    scenario = sim.scenario_from_mapping(mapping, name=name)
    try:
        _, metrics = sim.run_scenario(scenario, params)
        return metrics.as_dict()
    except SimulationDivergedError:
        return None


@main.command("compare")
@common_options
@click.argument("sweep_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Parallel scenario evaluations.")
@click.option("--plots/--no-plots", default=True, show_default=True)
@handle_errors
def cmd_compare(config_path, out_dir, seed, force, sweep_path, jobs, plots):
    """Run a perturbation sweep for both controller modes and tabulate RMSE."""
    out_dir = _prepare_out(out_dir)
    with open(sweep_path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{sweep_path}: {exc}") from exc
    sweep = doc.get("sweep", {})
    base_scenario = doc.get("scenario", {})
    kind = sweep.get("kind", "coefficient")
    modes = list(sweep.get("modes", ["conventional", "smc"]))
    metric = sweep.get("metric", "rmse_y")
    params = _load_vehicle(config_path)
    if seed is not None:
        base_scenario = dict(base_scenario)
        base_scenario.setdefault("sim", {})
        base_scenario["sim"] = dict(base_scenario["sim"], seed=seed)

    cells = []
    if kind == "coefficient":
        coeff = sweep.get("coefficient")
        if not coeff:
            raise ConfigError("sweep.coefficient is required for kind='coefficient'")
        levels = [float(v) for v in sweep.get("levels_pct", [])]
        labels = [f"{lv:+g}%" for lv in levels]
        for lv in levels:
            mapping = json.loads(json.dumps(base_scenario))
            mapping.setdefault("perturbations", {}).setdefault("scale", {})
            mapping["perturbations"]["scale"][coeff] = 1.0 + lv / 100.0
            cells.append(mapping)
    elif kind == "buoyancy":
        grams = [float(v) for v in sweep.get("grams", [])]
        labels = [f"{g:g}g" for g in grams]
        from .params import GRAVITY
        nominal = params.rb.B - params.rb.W
        for g in grams:
            mapping = json.loads(json.dumps(base_scenario))
            delta = GRAVITY * g / 1000.0 - nominal
            mapping.setdefault("perturbations", {})["buoyancy_delta_N"] = delta
            cells.append(mapping)
    else:
        raise ConfigError(f"unknown sweep kind {kind!r}")

    pmap = params_to_mapping(params)
    tasks = [(cell, pmap, mode, f"{kind}_{label}_{mode}")
             for mode in modes for cell, label in zip(cells, labels)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_compare_cell, tasks))
    else:
        results = [_compare_cell(t) for t in tasks]

    table = {}
    idx = 0
    for mode in modes:
        row = []
        for _ in labels:
            res = results[idx]
            idx += 1
            row.append(res[metric] if res is not None else "DIVERGED")
        table[mode] = row

    header = ["controller"] + labels
    lines = [",".join(header)]
    click.echo("  ".join(f"{h:>14}" for h in header))
    for mode, row in table.items():
        cellstr = [f"{v:.4f}" if isinstance(v, float) else str(v) for v in row]
        click.echo("  ".join(f"{c:>14}" for c in [mode] + cellstr))
        lines.append(",".join([mode] + cellstr))
    csv_path = os.path.join(out_dir, "compare_table.csv")
    report.ensure_writable(csv_path, force)
    report.atomic_write_text(csv_path, "\n".join(lines) + "\n")
    outputs = [csv_path]
    if plots and labels:
        fig_path = os.path.join(out_dir, "compare_table.png")
        report.render_compare_figure(labels, table, fig_path, metric=metric,
                                     title=f"{kind} sweep")
        outputs.append(fig_path)
    manifest_path = os.path.join(out_dir, "compare_manifest.json")
    report.write_manifest(manifest_path, "compare",
                          base_scenario.get("sim", {}).get("seed", 1),
                          pmap, doc, outputs, 0.0)
    click.echo(f"wrote {csv_path}")
    if any(res is None for res in results):
        click.echo("some sweep cells diverged", err=True)
        sys.exit(EXIT_NUMERIC)


if __name__ == "__main__":
    main()
