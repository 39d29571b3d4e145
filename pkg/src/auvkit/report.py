"""Output writing: delimited telemetry, metrics summaries, run manifests and
matplotlib figures rendered alongside the delimited output.

The CSV column set and order follow sim.LOG_CHANNELS and are stable; floats
are written with repr-level precision so a re-run with the same seed is
bit-identical.  Figures are a convenience report layer; the CSV remains the
machine-readable contract.
"""

from __future__ import annotations

import json
import os
import time

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from importlib import metadata as _metadata

from .errors import ConfigError
from .sim import LOG_CHANNELS, Metrics, TimeSeriesLog


def tool_version():
    try:
        return _metadata.version("auvkit")
    except _metadata.PackageNotFoundError:  # pragma: no cover
        return "0.0.0+unpackaged"


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def atomic_write_text(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def ensure_writable(path, force):
    if os.path.exists(path) and not force:
        raise ConfigError(f"refusing to overwrite {path} (use --force)")


def write_log_csv(log: TimeSeriesLog, path):
    lines = [",".join(LOG_CHANNELS)]
    n = len(log)
    cols = [log.data[name] for name in LOG_CHANNELS]
    for i in range(n):
        lines.append(",".join(_fmt(col[i]) for col in cols))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_metrics(metrics: Metrics, path):
    atomic_write_text(path, json.dumps(metrics.as_dict(), indent=2) + "\n")


def write_manifest(path, command, seed, config_snapshot, scenario_snapshot,
                   outputs, runtime_s):
    doc = {
        "tool": "auvkit",
        "version": tool_version(),
        "command": command,
        "seed": seed,
        "config": config_snapshot,
        "scenario": scenario_snapshot,
        "outputs": outputs,
        "runtime_s": runtime_s,
        "created_unix": time.time(),
    }
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")
    return doc


def read_manifest(path):
    with open(path) as fh:
        return json.load(fh)


# figures ----------------------------------------------------------------------


def render_timeseries_figure(log: TimeSeriesLog, path, title=""):
    t = log.column("t_s")
    fig, axes = plt.subplots(4, 1, figsize=(9, 10), sharex=True)
    axes[0].plot(t, log.column("z_ref_m"), "r-", lw=1, label="z ref")
    axes[0].plot(t, log.column("z_m"), "b-", lw=1, label="z")
    axes[0].set_ylabel("depth [m]")
    axes[0].invert_yaxis()
    axes[0].legend(loc="best", fontsize=8)
    axes[1].plot(t, log.column("u_ref_mps"), "r-", lw=1, label="u ref")
    axes[1].plot(t, log.column("u_mps"), "b-", lw=1, label="u")
    axes[1].set_ylabel("speed [m/s]")
    axes[1].legend(loc="best", fontsize=8)
    axes[2].plot(t, log.column("phi_deg"), "b-", lw=1, label="roll")
    axes[2].plot(t, log.column("theta_deg"), "g-", lw=1, label="pitch")
    axes[2].set_ylabel("attitude [deg]")
    axes[2].legend(loc="best", fontsize=8)
    axes[3].plot(t, log.column("delta_s1_deg"), lw=0.8, label="stern 1")
    axes[3].plot(t, log.column("delta_r1_deg"), lw=0.8, label="rudder 1")
    axes[3].plot(t, log.column("n_rpm") / 100.0, lw=0.8, label="rpm/100")
    axes[3].set_ylabel("actuation")
    axes[3].set_xlabel("time [s]")
    axes[3].legend(loc="best", fontsize=8)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_xy_figure(log: TimeSeriesLog, path, title=""):
    fig, ax = plt.subplots(figsize=(7, 6))
    ax.plot(log.column("x_m"), log.column("y_ref_m"), "r--", lw=1.2,
            label="desired")
    ax.plot(log.column("x_m"), log.column("y_m"), "b-", lw=1.0, label="actual")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_current_figure(log: TimeSeriesLog, path):
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(log.column("t_s"), log.column("Uc_mps"), "b-", lw=1)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("U_c [m/s]")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_scenario_figures(log: TimeSeriesLog, out_dir, stem, has_lawnmow,
                            has_current):
    paths = []
    p = os.path.join(out_dir, f"{stem}_timeseries.png")
    render_timeseries_figure(log, p, title=stem)
    paths.append(p)
    if has_lawnmow:
        p = os.path.join(out_dir, f"{stem}_xy.png")
        render_xy_figure(log, p, title=stem)
        paths.append(p)
    if has_current:
        p = os.path.join(out_dir, f"{stem}_current.png")
        render_current_figure(log, p)
        paths.append(p)
    return paths


def render_compare_figure(levels, rows, path, metric="rmse_y", title=""):
    """Bar chart of a sweep table: rows = {controller: [values per level]}."""
    fig, ax = plt.subplots(figsize=(7, 4))
    x = np.arange(len(levels))
    width = 0.8 / max(len(rows), 1)
    for i, (name, values) in enumerate(rows.items()):
        vals = [v if isinstance(v, (int, float)) and np.isfinite(v) else 0.0
                for v in values]
        ax.bar(x + i * width, vals, width, label=name)
    ax.set_xticks(x + width * (len(rows) - 1) / 2)
    ax.set_xticklabels([str(lv) for lv in levels])
    ax.set_ylabel(metric)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
