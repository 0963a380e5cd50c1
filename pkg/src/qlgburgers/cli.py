"""Command-line front end.

One command per simulator or experiment; each reads a YAML config,
validates it strictly (unknown keys are rejected), writes its CSV
artifacts plus a ``manifest.json`` with the fully resolved config,
package version and stage timings into the output directory.

Exit codes: 0 success, 1 configuration/validation error (the message
names the offending key), 2 runtime divergence of the reference solver
(the divergence step is recorded in the manifest).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import yaml

__all__ = ["main"]

_THREAD_ENV_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Config schema.  Leaves are (type, default); REQUIRED marks a mandatory
# key, and enums are validated with _choice after resolution.

REQUIRED = object()

_GRID_1D = {"n_x": (int, REQUIRED), "length_x": (float, REQUIRED)}
_GRID_2D = {"n_x": (int, REQUIRED), "n_y": (int, REQUIRED), "ds": (float, 1.0)}
_COLLISION = {"theta": (float, REQUIRED), "zeta": (float, 0.0), "xi": (float, 0.0)}
_INITIAL = {"rho_b": (float, REQUIRED), "rho_a": (float, REQUIRED), "mode": (str, "equilibrium")}
_VSET = {
    "name": (str, ""),
    "shifts": (list, None),
    "basis": (list, None),
}
_FDM = {"substeps": (object, "auto"), "c_s": (object, None), "nu": (object, None)}

SCHEMAS = {
    "simulate1d": {
        "model": (str, "d1q2"),
        "run_id": (str, REQUIRED),
        "grid": _GRID_1D,
        "collision": _COLLISION,
        "initial": _INITIAL,
        "steps": (int, REQUIRED),
        "snapshot_stride": (int, 1),
        "collision_path": (str, "closed_form"),
        "streaming": (str, "standard"),
    },
    "simulate2d": {
        "model": (str, "d2q2"),
        "run_id": (str, REQUIRED),
        "grid": _GRID_2D,
        "collision": _COLLISION,
        "initial": _INITIAL,
        "velocity_set": _VSET,
        "steps": (int, REQUIRED),
        "snapshot_stride": (int, 1),
        "collision_path": (str, "closed_form"),
        "streaming": (str, "standard"),
    },
    "fdm1d": {
        "model": (str, "fdm1d"),
        "run_id": (str, REQUIRED),
        "grid": _GRID_1D,
        "collision": _COLLISION,
        "initial": _INITIAL,
        "steps": (int, REQUIRED),
        "snapshot_stride": (int, 1),
        "fdm": _FDM,
    },
    "fdm2d": {
        "model": (str, "fdm2d"),
        "run_id": (str, REQUIRED),
        "grid": _GRID_2D,
        "collision": _COLLISION,
        "initial": _INITIAL,
        "velocity_set": _VSET,
        "steps": (int, REQUIRED),
        "snapshot_stride": (int, 1),
        "fdm": _FDM,
    },
    "analytic": {
        "model": (str, "analytic"),
        "run_id": (str, REQUIRED),
        "grid": _GRID_1D,
        "collision": _COLLISION,
        "initial": _INITIAL,
        "steps": (int, REQUIRED),
        "snapshot_stride": (int, 1),
        "analytic": {"l_trunc": (int, 80), "nu_variant": (str, "corrected")},
    },
    "viscosity-sweep": {
        "model": (str, "viscosity-sweep"),
        "run_id": (str, REQUIRED),
        "collision": {"zeta": (float, 0.0), "xi": (float, 0.0)},
        "sweep": {
            "theta_start": (float, 0.05),
            "theta_stop": (float, REQUIRED),
            "count": (int, 30),
            "T": (int, 200),
            "n_x": (int, 64),
            "rho_a": (float, 0.005),
            "rho_b": (float, 1.0),
            "variant": (str, "pde_consistent"),
        },
    },
    "steepness-sweep": {
        "model": (str, "steepness-sweep"),
        "run_id": (str, REQUIRED),
        "collision": {"zeta": (float, 0.0), "xi": (float, 0.0)},
        "steepness": {
            "theta_start": (float, 0.2),
            "theta_stop": (float, REQUIRED),
            "count": (int, 12),
            "T_values": (list, [200]),
            "n_x_values": (list, [64]),
            "length_x": (float, 2.0),
            "rho_a": (float, 0.4),
            "rho_b": (float, 1.0),
        },
    },
    "compare-analytic": {
        "model": (str, "compare-analytic"),
        "run_id": (str, REQUIRED),
        "grid": _GRID_1D,
        "collision": _COLLISION,
        "initial": _INITIAL,
        "analytic": {"l_trunc": (int, 80)},
        "compare": {"input": (str, REQUIRED), "input_run_id": (str, REQUIRED)},
    },
    "compare-2d": {
        "model": (str, "compare-2d"),
        "run_id": (str, REQUIRED),
        "grid": _GRID_2D,
        "collision": _COLLISION,
        "initial": _INITIAL,
        "velocity_set": _VSET,
        "steps": (int, REQUIRED),
        "snapshot_stride": (int, 1),
        "collision_path": (str, "closed_form"),
        "streaming": (str, "standard"),
        "fdm": {"substeps": (object, "auto")},
    },
}

_CHOICES = {
    "initial.mode": ("equilibrium", "symmetric"),
    "collision_path": ("closed_form", "quantum"),
    "streaming": ("standard", "reversed"),
    "analytic.nu_variant": ("corrected", "yepez"),
    "sweep.variant": ("pde_consistent", "literal"),
}


def _resolve(cfg, schema, path=""):
    if not isinstance(cfg, dict):
        raise ConfigError(f"config section '{path or '<root>'}' must be a mapping")
    out = {}
    for key in cfg:
        if key not in schema:
            where = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown config key '{where}'")
    for key, spec in schema.items():
        where = f"{path}.{key}" if path else key
        if isinstance(spec, dict):
            sub = cfg.get(key, {})
            out[key] = _resolve(sub if sub is not None else {}, spec, where)
            continue
        typ, default = spec
        if key in cfg and cfg[key] is not None:
            val = cfg[key]
            if typ is float and isinstance(val, (int, float)) and not isinstance(val, bool):
                val = float(val)
            elif typ is int:
                if isinstance(val, bool) or not isinstance(val, int):
                    raise ConfigError(f"config key '{where}' must be an integer, got {val!r}")
            elif typ is not object and not isinstance(val, typ):
                raise ConfigError(
                    f"config key '{where}' must be {typ.__name__}, got {type(val).__name__}"
                )
            out[key] = val
        elif default is REQUIRED:
            raise ConfigError(f"missing required config key '{where}'")
        else:
            out[key] = default
    return out


def _check_choices(resolved):
    def walk(d, path=""):
        for k, v in d.items():
            where = f"{path}.{k}" if path else k
            if isinstance(v, dict):
                walk(v, where)
            elif where in _CHOICES and v not in _CHOICES[where]:
                raise ConfigError(
                    f"config key '{where}' must be one of {_CHOICES[where]}, got {v!r}"
                )

    walk(resolved)


def _apply_overrides(cfg, overrides):
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override '{item}' is not of the form key=value")
        key, _, raw = item.partition("=")
        value = yaml.safe_load(raw)
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override '{key}' descends into a non-mapping")
        node[parts[-1]] = value
    return cfg


# ---------------------------------------------------------------------------
# Builders from resolved config sections.


def _build_params(section):
    from .collision import CollisionParams

    try:
        return CollisionParams(
            theta=section["theta"], zeta=section["zeta"], xi=section["xi"]
        )
    except ValueError as exc:
        raise ConfigError(f"config key 'collision.theta' invalid: {exc}") from exc


def _build_vset(section):
    from .lattice import VelocitySet2D, velocity_set_by_name

    if section["name"]:
        if section["shifts"] is not None or section["basis"] is not None:
            raise ConfigError("config key 'velocity_set' must give either name or shifts, not both")
        try:
            return velocity_set_by_name(section["name"])
        except ValueError as exc:
            raise ConfigError(f"config key 'velocity_set.name' invalid: {exc}") from exc
    if section["shifts"] is None:
        raise ConfigError("config key 'velocity_set' needs a name or explicit shifts")
    basis = section["basis"] if section["basis"] is not None else ((1.0, 0.0), (0.0, 1.0))
    try:
        return VelocitySet2D(
            shifts=tuple(tuple(s) for s in section["shifts"]),
            basis=tuple(tuple(b) for b in basis),
            name="custom",
        )
    except ValueError as exc:
        raise ConfigError(f"config key 'velocity_set' invalid: {exc}") from exc


def _vset_manifest(vset):
    c0, c1 = vset.cartesian()
    return {
        "name": vset.name,
        "shifts": [list(map(int, s)) for s in vset.shifts],
        "basis": [list(map(float, b)) for b in vset.basis],
        "cartesian": [list(map(float, c0)), list(map(float, c1))],
    }


class _Stopwatch:
    def __init__(self):
        self.timings = {}

    def stage(self, name):
        return _Stage(self, name)


class _Stage:
    def __init__(self, watch, name):
        self.watch = watch
        self.name = name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.watch.timings[self.name] = time.perf_counter() - self.t0
        return False


# ---------------------------------------------------------------------------
# Commands.


def _cmd_simulate1d(resolved, outdir, watch):
    from .collision import predicted_coefficients_1d
    from .io import snapshot_filename, write_snapshot_1d
    from .lattice import Grid1D, init_cosine_1d, step_1d

    grid = Grid1D(n_x=resolved["grid"]["n_x"], length_x=resolved["grid"]["length_x"])
    params = _build_params(resolved["collision"])
    ini = resolved["initial"]
    reversed_streaming = resolved["streaming"] == "reversed"
    with watch.stage("simulate"):
        fld = init_cosine_1d(grid, ini["rho_b"], ini["rho_a"], params, init=ini["mode"])
        write_snapshot_1d(outdir / snapshot_filename(resolved["run_id"], 0), fld)
        for t in range(1, resolved["steps"] + 1):
            fld = step_1d(
                fld,
                params,
                collision=resolved["collision_path"],
                reversed_streaming=reversed_streaming,
            )
            if t % resolved["snapshot_stride"] == 0:
                write_snapshot_1d(outdir / snapshot_filename(resolved["run_id"], t), fld)
    coeffs = predicted_coefficients_1d(params, grid.dx, grid.dt)
    return {
        "predicted_coefficients": {
            "c_s": coeffs.c_s,
            "nu": coeffs.nu,
            "nu_yepez": coeffs.nu_yepez,
        }
    }


def _cmd_simulate2d(resolved, outdir, watch):
    from .io import snapshot_filename, write_snapshot_2d
    from .lattice import Grid2D, init_cosine_2d, predicted_coefficients_2d, step_2d

    grid = Grid2D(
        n_x=resolved["grid"]["n_x"], n_y=resolved["grid"]["n_y"], ds=resolved["grid"]["ds"]
    )
    params = _build_params(resolved["collision"])
    vset = _build_vset(resolved["velocity_set"])
    ini = resolved["initial"]
    reversed_streaming = resolved["streaming"] == "reversed"
    with watch.stage("simulate"):
        fld = init_cosine_2d(grid, ini["rho_b"], ini["rho_a"], params, init=ini["mode"])
        write_snapshot_2d(outdir / snapshot_filename(resolved["run_id"], 0), fld)
        for t in range(1, resolved["steps"] + 1):
            fld = step_2d(
                fld,
                params,
                vset,
                collision=resolved["collision_path"],
                reversed_streaming=reversed_streaming,
            )
            if t % resolved["snapshot_stride"] == 0:
                write_snapshot_2d(outdir / snapshot_filename(resolved["run_id"], t), fld)
    coeffs = predicted_coefficients_2d(vset, params, grid.ds, grid.dt)
    return {
        "velocity_set": _vset_manifest(vset),
        "predicted_coefficients": {
            "a": list(map(float, coeffs.a)),
            "b": list(map(float, coeffs.b)),
            "D": [list(map(float, row)) for row in coeffs.D],
        },
    }


def _fdm_coeffs_1d(resolved, grid, params):
    from .collision import predicted_coefficients_1d

    coeffs = predicted_coefficients_1d(params, grid.dx, grid.dt)
    c_s = resolved["fdm"]["c_s"]
    nu = resolved["fdm"]["nu"]
    return (
        float(c_s) if c_s is not None else coeffs.c_s,
        float(nu) if nu is not None else coeffs.nu,
    )


def _cmd_fdm1d(resolved, outdir, watch):
    from .experiments import run_fdm_1d
    from .io import snapshot_filename, write_density_snapshot_1d
    from .lattice import Grid1D

    grid = Grid1D(n_x=resolved["grid"]["n_x"], length_x=resolved["grid"]["length_x"])
    params = _build_params(resolved["collision"])
    ini = resolved["initial"]
    c_s, nu = _fdm_coeffs_1d(resolved, grid, params)
    substeps = resolved["fdm"]["substeps"]
    substeps = 1 if substeps in (None, "auto") else int(substeps)
    with watch.stage("solve"):
        trace, div_step = run_fdm_1d(
            grid,
            c_s,
            nu,
            ini["rho_b"],
            ini["rho_a"],
            resolved["steps"],
            stride=resolved["snapshot_stride"],
            substeps=substeps,
        )
    xs = grid.positions()
    for k, step in enumerate(trace.steps):
        write_density_snapshot_1d(
            outdir / snapshot_filename(resolved["run_id"], int(step)),
            xs,
            trace.rho[k],
            float(step) * grid.dt,
        )
    return {"c_s": c_s, "nu": nu, "substeps": substeps, "divergence_step": div_step}


def _cmd_fdm2d(resolved, outdir, watch):
    from .experiments import run_fdm_2d
    from .fdm import substeps_auto
    from .io import snapshot_filename, write_rows_csv
    from .lattice import Grid2D, predicted_coefficients_2d

    grid = Grid2D(
        n_x=resolved["grid"]["n_x"], n_y=resolved["grid"]["n_y"], ds=resolved["grid"]["ds"]
    )
    params = _build_params(resolved["collision"])
    vset = _build_vset(resolved["velocity_set"])
    ini = resolved["initial"]
    # Solve on the index grid: streaming shifts act there, so the
    # comparison with the lattice gas is site-by-site.
    coeffs = predicted_coefficients_2d(vset.index_space(), params, grid.ds, grid.dt)
    substeps = resolved["fdm"]["substeps"]
    if substeps in (None, "auto"):
        substeps = substeps_auto(coeffs, grid.ds, grid.dt)
    with watch.stage("solve"):
        trace, div_step = run_fdm_2d(
            grid,
            coeffs,
            ini["rho_b"],
            ini["rho_a"],
            resolved["steps"],
            stride=resolved["snapshot_stride"],
            substeps=int(substeps),
        )
    for k, step in enumerate(trace.steps):
        rows = []
        t = float(step) * grid.dt
        for i in range(grid.n_x):
            for j in range(grid.n_y):
                rows.append((t, i * grid.ds, j * grid.ds, trace.rho[k, i, j]))
        write_rows_csv(
            outdir / snapshot_filename(resolved["run_id"], int(step)),
            ("t", "x", "y", "rho"),
            rows,
        )
    return {
        "velocity_set": _vset_manifest(vset),
        "substeps": int(substeps),
        "divergence_step": div_step,
        "index_space_coefficients": {
            "a": list(map(float, coeffs.a)),
            "b": list(map(float, coeffs.b)),
            "D": [list(map(float, row)) for row in coeffs.D],
        },
    }


def _cmd_analytic(resolved, outdir, watch):
    from .analytic import cole_hopf_density
    from .experiments import analytic_config_for
    from .io import snapshot_filename, write_density_snapshot_1d
    from .lattice import Grid1D

    grid = Grid1D(n_x=resolved["grid"]["n_x"], length_x=resolved["grid"]["length_x"])
    params = _build_params(resolved["collision"])
    ini = resolved["initial"]
    cfg = analytic_config_for(
        grid,
        params,
        ini["rho_b"],
        ini["rho_a"],
        nu_variant=resolved["analytic"]["nu_variant"],
        l_trunc=resolved["analytic"]["l_trunc"],
    )
    xs = grid.positions()
    with watch.stage("evaluate"):
        for step in range(0, resolved["steps"] + 1, resolved["snapshot_stride"]):
            t = step * grid.dt
            rho = cole_hopf_density(xs, t, cfg)
            write_density_snapshot_1d(
                outdir / snapshot_filename(resolved["run_id"], step), xs, rho, t
            )
    return {"nu": cfg.nu, "bessel_argument": cfg.amplitude, "l_trunc": cfg.l_trunc}


def _cmd_viscosity_sweep(resolved, outdir, watch):
    import numpy as np

    from .experiments import viscosity_sweep
    from .io import write_rows_csv

    sw = resolved["sweep"]
    thetas = np.linspace(sw["theta_start"], sw["theta_stop"], sw["count"])
    with watch.stage("sweep"):
        rows = viscosity_sweep(
            thetas,
            sw["T"],
            n_x=sw["n_x"],
            rho_a=sw["rho_a"],
            rho_b=sw["rho_b"],
            zeta=resolved["collision"]["zeta"],
            xi=resolved["collision"]["xi"],
            variant=sw["variant"],
        )
    write_rows_csv(
        outdir / f"{resolved['run_id']}_sweep.csv",
        ("theta", "nu_pred", "nu_yepez", "nu_exp", "kept_fraction", "T"),
        [(r.theta, r.nu_pred, r.nu_yepez, r.nu_exp, r.kept_fraction, r.T) for r in rows],
    )
    failures = {f"{r.theta:.6g}": r.error for r in rows if r.error}
    return {"failures": failures} if failures else {}


def _cmd_steepness_sweep(resolved, outdir, watch):
    import numpy as np

    from .experiments import steepness_sweep
    from .io import write_rows_csv

    sp = resolved["steepness"]
    thetas = np.linspace(sp["theta_start"], sp["theta_stop"], sp["count"])
    with watch.stage("sweep"):
        rows = steepness_sweep(
            thetas,
            sp["T_values"],
            n_x_list=sp["n_x_values"],
            length_x=sp["length_x"],
            rho_a=sp["rho_a"],
            rho_b=sp["rho_b"],
            zeta=resolved["collision"]["zeta"],
            xi=resolved["collision"]["xi"],
        )
    write_rows_csv(
        outdir / f"{resolved['run_id']}_steepness.csv",
        ("theta", "n_x", "T", "delta"),
        [(r["theta"], r["n_x"], r["T"], r["delta"]) for r in rows],
    )
    return {}


def _cmd_compare_analytic(resolved, outdir, watch):
    import numpy as np

    from .experiments import DensityTrace, analytic_config_for, mse_compare
    from .io import read_trace_1d, write_rows_csv
    from .lattice import Grid1D

    grid = Grid1D(n_x=resolved["grid"]["n_x"], length_x=resolved["grid"]["length_x"])
    params = _build_params(resolved["collision"])
    ini = resolved["initial"]
    cmp_cfg = resolved["compare"]
    with watch.stage("read"):
        steps, xs, rho = read_trace_1d(cmp_cfg["input"], cmp_cfg["input_run_id"])
    if rho.shape[1] != grid.n_x:
        raise ConfigError(
            f"config key 'grid.n_x'={grid.n_x} does not match input snapshots ({rho.shape[1]} sites)"
        )
    if abs(xs[1] - xs[0] - grid.dx) > 1e-9 * grid.dx:
        raise ConfigError(
            f"config key 'grid.length_x' implies dx={grid.dx} but input snapshots "
            f"have spacing {xs[1] - xs[0]}"
        )
    trace = DensityTrace(rho=rho, steps=np.asarray(steps), grid=grid, params=params)
    out = {}
    with watch.stage("compare"):
        for variant in ("corrected", "yepez"):
            cfg = analytic_config_for(
                grid,
                params,
                ini["rho_b"],
                ini["rho_a"],
                nu_variant=variant,
                l_trunc=resolved["analytic"]["l_trunc"],
            )
            series = mse_compare(trace, cfg)
            write_rows_csv(
                outdir / f"{resolved['run_id']}_mse_{variant}.csv",
                ("t", "metric"),
                list(zip(series.times(grid.dt), series.values)),
            )
            out[f"nu_{variant}"] = cfg.nu
    return out


def _cmd_compare_2d(resolved, outdir, watch):
    from .experiments import l2_compare_2d, run_fdm_2d, run_qlg_2d
    from .fdm import substeps_auto
    from .io import write_rows_csv
    from .lattice import Grid2D, predicted_coefficients_2d

    grid = Grid2D(
        n_x=resolved["grid"]["n_x"], n_y=resolved["grid"]["n_y"], ds=resolved["grid"]["ds"]
    )
    params = _build_params(resolved["collision"])
    vset = _build_vset(resolved["velocity_set"])
    ini = resolved["initial"]
    coeffs = predicted_coefficients_2d(vset.index_space(), params, grid.ds, grid.dt)
    substeps = resolved["fdm"]["substeps"]
    if substeps in (None, "auto"):
        substeps = substeps_auto(coeffs, grid.ds, grid.dt)
    with watch.stage("qlg"):
        qlg = run_qlg_2d(
            grid,
            params,
            vset,
            ini["rho_b"],
            ini["rho_a"],
            resolved["steps"],
            stride=resolved["snapshot_stride"],
            collision=resolved["collision_path"],
            reversed_streaming=resolved["streaming"] == "reversed",
            init=ini["mode"],
        )
    with watch.stage("fdm"):
        fdm, div_step = run_fdm_2d(
            grid,
            coeffs,
            ini["rho_b"],
            ini["rho_a"],
            resolved["steps"],
            stride=resolved["snapshot_stride"],
            substeps=int(substeps),
        )
    with watch.stage("compare"):
        series = l2_compare_2d(qlg, fdm, ini["rho_b"])
    write_rows_csv(
        outdir / f"{resolved['run_id']}_l2.csv",
        ("t", "metric"),
        list(zip(series.times(grid.dt), series.values)),
    )
    return {
        "velocity_set": _vset_manifest(vset),
        "substeps": int(substeps),
        "divergence_step": div_step,
    }


_COMMANDS = {
    "simulate1d": _cmd_simulate1d,
    "simulate2d": _cmd_simulate2d,
    "fdm1d": _cmd_fdm1d,
    "fdm2d": _cmd_fdm2d,
    "analytic": _cmd_analytic,
    "viscosity-sweep": _cmd_viscosity_sweep,
    "steepness-sweep": _cmd_steepness_sweep,
    "compare-analytic": _cmd_compare_analytic,
    "compare-2d": _cmd_compare_2d,
}

_EXPECTED_MODEL = {
    "simulate1d": "d1q2",
    "simulate2d": "d2q2",
}


def _write_gnuplot(outdir, run_id, command):
    lines = [
        f"# gnuplot helper for run '{run_id}' ({command})",
        "set datafile separator ','",
        "set key autotitle columnhead",
    ]
    if command in ("viscosity-sweep",):
        lines.append(f"plot '{run_id}_sweep.csv' using 1:4 with points, '' using 1:2 with lines")
    elif command in ("compare-analytic", "compare-2d"):
        lines.append(f"plot '{run_id}_l2.csv' using 1:2 with linespoints")
    else:
        lines.append(f"plot '{run_id}_t0.csv' using 2:3 with lines")
    (Path(outdir) / f"{run_id}.gp").write_text("\n".join(lines) + "\n")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qlgburgers",
        description="Quantum lattice gas simulator for Burgers-like equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML configuration file")
        p.add_argument("--out", default=None, help="output directory (default: config value or '.')")
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config key (dotted path), repeatable",
        )
        p.add_argument("--threads", type=int, default=None, help="cap BLAS/OpenMP thread pools")
        p.add_argument(
            "--gnuplot", action="store_true", help="also emit a gnuplot script for the main CSV"
        )
    args = parser.parse_args(argv)

    if args.threads is not None:
        for var in _THREAD_ENV_VARS:
            os.environ[var] = str(args.threads)

    try:
        with open(args.config) as fh:
            raw = yaml.safe_load(fh) or {}
    except OSError as exc:
        print(f"config error: cannot read '{args.config}': {exc}", file=sys.stderr)
        return 1
    except yaml.YAMLError as exc:
        print(f"config error: invalid YAML in '{args.config}': {exc}", file=sys.stderr)
        return 1

    from . import __version__
    from .fdm import FdmDivergenceError
    from .io import write_manifest

    try:
        raw = _apply_overrides(raw, args.override)
        resolved = _resolve(raw, SCHEMAS[args.command])
        _check_choices(resolved)
        expected = _EXPECTED_MODEL.get(args.command, args.command)
        if resolved["model"] != expected:
            raise ConfigError(
                f"config key 'model' is {resolved['model']!r} but command "
                f"'{args.command}' expects {expected!r}"
            )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    outdir = Path(args.out) if args.out else Path(".")
    outdir.mkdir(parents=True, exist_ok=True)

    watch = _Stopwatch()
    exit_code = 0
    extra = {}
    try:
        with watch.stage("total"):
            extra = _COMMANDS[args.command](resolved, outdir, watch) or {}
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except FdmDivergenceError as exc:
        extra = {"divergence_step": exc.step, "error": str(exc)}
        exit_code = 2
    if args.command in ("fdm1d", "fdm2d") and extra.get("divergence_step") is not None:
        exit_code = 2

    write_manifest(
        outdir / "manifest.json",
        resolved,
        __version__,
        watch.timings,
        extra={"results": extra, "threads": args.threads},
    )
    if args.gnuplot:
        _write_gnuplot(outdir, resolved["run_id"], args.command)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
