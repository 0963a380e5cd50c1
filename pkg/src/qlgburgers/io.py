"""CSV and manifest output.

Snapshot files carry one row per site with header ``t,x[,y],rho,u,f0,f1``
and are named ``{run_id}_t{step}.csv``; all floats are written with 17
significant digits so a round trip through text is exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

__all__ = [
    "read_trace_1d",
    "read_trace_2d",
    "snapshot_filename",
    "write_density_snapshot_1d",
    "write_manifest",
    "write_rows_csv",
    "write_snapshot_1d",
    "write_snapshot_2d",
]


def fmt(x) -> str:
    return format(float(x), ".17g")


def snapshot_filename(run_id: str, step: int) -> str:
    return f"{run_id}_t{step}.csv"


def write_snapshot_1d(path, fld) -> None:
    """Write one 1D field snapshot (columns t,x,rho,u,f0,f1)."""
    t = fld.t * fld.grid.dt
    xs = fld.grid.positions()
    rho = fld.f0 + fld.f1
    u = fld.f1 - fld.f0
    with open(path, "w", newline="") as fh:
        fh.write("t,x,rho,u,f0,f1\n")
        for i in range(fld.grid.n_x):
            fh.write(
                f"{fmt(t)},{fmt(xs[i])},{fmt(rho[i])},{fmt(u[i])},{fmt(fld.f0[i])},{fmt(fld.f1[i])}\n"
            )


def write_snapshot_2d(path, fld) -> None:
    """Write one 2D field snapshot (columns t,x,y,rho,u,f0,f1)."""
    t = fld.t * fld.grid.dt
    ds = fld.grid.ds
    rho = fld.f0 + fld.f1
    u = fld.f1 - fld.f0
    with open(path, "w", newline="") as fh:
        fh.write("t,x,y,rho,u,f0,f1\n")
        for i in range(fld.grid.n_x):
            for j in range(fld.grid.n_y):
                fh.write(
                    f"{fmt(t)},{fmt(i * ds)},{fmt(j * ds)},{fmt(rho[i, j])},"
                    f"{fmt(u[i, j])},{fmt(fld.f0[i, j])},{fmt(fld.f1[i, j])}\n"
                )


def write_density_snapshot_1d(path, xs, rho, t) -> None:
    """Write a density-only snapshot (columns t,x,rho), e.g. analytic output."""
    with open(path, "w", newline="") as fh:
        fh.write("t,x,rho\n")
        for i in range(len(xs)):
            fh.write(f"{fmt(t)},{fmt(xs[i])},{fmt(rho[i])}\n")


def write_rows_csv(path, header, rows) -> None:
    """Write rows of mixed values; floats get 17 significant digits."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for v in row:
                if v is None:
                    cells.append("")
                elif isinstance(v, (int, np.integer)) and not isinstance(v, bool):
                    cells.append(str(int(v)))
                elif isinstance(v, (float, np.floating)):
                    cells.append(fmt(v))
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")


def read_trace_1d(directory, run_id: str):
    """Read the snapshots written by a 1D run back into arrays.

    Returns (steps, xs, rho) with rho of shape (n_snapshots, n_x),
    ordered by step.
    """
    directory = Path(directory)
    found = []
    for path in directory.glob(f"{run_id}_t*.csv"):
        stem = path.stem
        try:
            step = int(stem[len(run_id) + 2 :])
        except ValueError:
            continue
        found.append((step, path))
    if not found:
        raise FileNotFoundError(f"no snapshots matching {run_id}_t*.csv under {directory}")
    found.sort()
    steps, xs, rhos = [], None, []
    for step, path in found:
        data = np.genfromtxt(path, delimiter=",", names=True)
        data = np.atleast_1d(data)
        if xs is None:
            xs = np.asarray(data["x"], dtype=float)
        rhos.append(np.asarray(data["rho"], dtype=float))
        steps.append(step)
    return np.asarray(steps), xs, np.stack(rhos)


def read_trace_2d(directory, run_id: str, n_x: int, n_y: int):
    """Read 2D snapshots back; returns (steps, rho) with shape (n, n_x, n_y)."""
    directory = Path(directory)
    found = []
    for path in directory.glob(f"{run_id}_t*.csv"):
        try:
            step = int(path.stem[len(run_id) + 2 :])
        except ValueError:
            continue
        found.append((step, path))
    if not found:
        raise FileNotFoundError(f"no snapshots matching {run_id}_t*.csv under {directory}")
    found.sort()
    steps, rhos = [], []
    for step, path in found:
        data = np.genfromtxt(path, delimiter=",", names=True)
        rho = np.asarray(data["rho"], dtype=float).reshape(n_x, n_y)
        rhos.append(rho)
        steps.append(step)
    return np.asarray(steps), np.stack(rhos)


def write_manifest(path, resolved_config, version: str, timings, extra=None) -> None:
    """Write the run manifest: resolved config, version and timings."""
    manifest = {
        "config": resolved_config,
        "version": version,
        "timings_seconds": {k: round(v, 6) for k, v in timings.items()},
    }
    if extra:
        manifest.update(extra)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
