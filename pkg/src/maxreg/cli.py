"""Experiment runner: solve | analyze | extend | commutator | sweep.

Each subcommand reads a JSON experiment config (see `DEFAULT_CONFIG` for the
schema; unknown keys are errors, not warnings), runs the requested pipeline,
and writes a self-describing report.  Exit codes: 0 success, 2 config or
input validation failure, 3 solver non-convergence, 4 I/O failure.

The default output directory is the current directory, overridable by the
MAXREG_OUTPUT_DIR environment variable or the config's output.directory.
Flags of the form `--set dotted.key=json_value` override individual config
entries, so every ExperimentConfig field is reachable from the command line.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import copy
import json
import os
import sys

import numpy as np

from .bmo import (
    DivergenceVerdict,
    bmo_seminorm,
    dini_integral,
    dini_verdict,
    dyadic_family,
    holder_constant,
    refinement_verdict,
    scale_invariant_half_sobolev,
)
from .coefficients import (
    CoefficientError,
    CoefficientField,
    extend_full,
    extend_reflect,
    generate_family,
    load_field,
    mollify,
    save_field,
)
from .commutators import commutator_norm_estimate
from .fem import MeshError, SpaceMesh
from .norms import SpaceTimeField, l2h_norm, l2v_grad_norm, maxreg_ratio, sobolev_norm
from .report import RegularityReport, SeminormRow, emit_report
from .solver import SolverError, autonomous_oracle, cauchy_solve
from .timefourier import GridError, SignalError, TimeGrid, frac_derivative

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_IO = 4

DEFAULT_CONFIG = {
    "experiment_id": "experiment",
    "coefficient": {
        "kind": "constant",        # or a field file prefix via "file"
        "file": None,
        "seed": 0,
        "amp": 0.5,
        "alpha": 0.5,
        "t0": None,
        "value": 1.0,
        "space_profile": "constant",
        "mollify_width": 0,        # cells; 0 = no mollification
    },
    "mesh": {
        "x_lo": 0.0,
        "x_hi": 1.0,
        "n_cells": 64,
        "bc_left": "dirichlet",
        "bc_right": "dirichlet",
    },
    "time": {
        "T": 1.0,
        "n_points": 256,
        "window_factor": 4,
    },
    "solver": {
        "theta_re": 1.0,
        "theta_im": 0.0,
        "tolerance": 1e-9,
        "max_iterations": 400,
    },
    "forcing": {
        "kind": "sine",            # sine | zero | random
        "seed": 0,
        "mode": 1,
    },
    "analysis": {
        "seminorms": ["bmo", "half_sobolev", "holder", "dini"],
        "alphas": [0.5],
        "dini_q": [1.0],
        "holder_alpha": 0.5,
        "resolutions": [],          # extra n_t values for divergence detection
        "extension_constants": False,
        "divergence_threshold": 1.25,
    },
    "output": {
        "directory": None,
        "format": "json",
    },
}


class ConfigError(ValueError):
    pass


def _merge_checked(defaults: dict, given: dict, path: str = "") -> dict:
    """Defaults overlaid with `given`; any key absent from defaults is an
    error (no silent typo tolerance)."""
    out = copy.deepcopy(defaults)
    for key, val in given.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(defaults[key], dict) and isinstance(val, dict):
            out[key] = _merge_checked(defaults[key], val, path + key + ".")
        else:
            out[key] = val
    return out


def load_config(path: str, overrides: list[str] | None = None) -> dict:
    with open(path) as fh:
        given = json.load(fh)
    cfg = _merge_checked(DEFAULT_CONFIG, given)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects dotted.key=json_value, got {item!r}")
        dotted, _, raw = item.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        keys = dotted.split(".")
        for k in keys[:-1]:
            if k not in node or not isinstance(node[k], dict):
                raise ConfigError(f"unknown config key {dotted!r}")
            node = node[k]
        if keys[-1] not in node:
            raise ConfigError(f"unknown config key {dotted!r}")
        node[keys[-1]] = value
    return cfg


def _build_mesh(cfg: dict) -> SpaceMesh:
    m = cfg["mesh"]
    return SpaceMesh(m["x_lo"], m["x_hi"], m["n_cells"], m["bc_left"], m["bc_right"])


def _build_coefficient(cfg: dict, grid: TimeGrid, mesh: SpaceMesh) -> CoefficientField:
    c = cfg["coefficient"]
    if c["file"]:
        A = load_field(c["file"])
        if not A.time_grid.compatible(grid):
            raise ConfigError("coefficient file grid does not match the time spec")
        return A
    A = generate_family(
        c["kind"], grid, mesh,
        seed=c["seed"], amp=c["amp"], alpha=c["alpha"], t0=c["t0"],
        value=c["value"], space_profile=c["space_profile"],
    )
    if c["mollify_width"]:
        A = mollify(A, c["mollify_width"])
    return A


def _build_forcing(cfg: dict, grid: TimeGrid, mesh: SpaceMesh) -> SpaceTimeField:
    f = cfg["forcing"]
    x = mesh.nodes[mesh.free_mask]
    span = mesh.x_hi - mesh.x_lo
    if f["kind"] == "zero":
        vals = np.zeros((grid.n_points, mesh.n_dofs), dtype=complex)
    elif f["kind"] == "sine":
        prof = np.sin(f["mode"] * np.pi * (x - mesh.x_lo) / span)
        vals = np.broadcast_to(prof, (grid.n_points, mesh.n_dofs)).astype(complex).copy()
    elif f["kind"] == "random":
        rng = np.random.default_rng(f["seed"])
        vals = rng.standard_normal((grid.n_points, mesh.n_dofs)) * (1 + 0j)
    else:
        raise ConfigError(f"unknown forcing kind {f['kind']!r}")
    return SpaceTimeField(grid, mesh, vals)


def _output_path(cfg: dict, suffix: str) -> str:
    directory = (cfg["output"]["directory"]
                 or os.environ.get("MAXREG_OUTPUT_DIR")
                 or ".")
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, f"{cfg['experiment_id']}{suffix}")


def _seminorm_ladder(cfg: dict, A: CoefficientField, rows: list[SeminormRow]) -> None:
    """All requested time-regularity functionals of A(., x_0), with the
    refinement-based divergence flags when extra resolutions are configured."""
    a = A.column(0)
    want = set(cfg["analysis"]["seminorms"])
    resolutions = sorted({A.time_grid.n_points, *cfg["analysis"]["resolutions"]})
    threshold = cfg["analysis"]["divergence_threshold"]

    def signal_at(n: int):
        if n == A.time_grid.n_points:
            return a
        g = TimeGrid(A.time_grid.t_start, A.time_grid.t_end, n)
        return generate_family(
            A.kind, g, A.mesh,
            seed=cfg["coefficient"]["seed"], amp=cfg["coefficient"]["amp"],
            alpha=cfg["coefficient"]["alpha"], t0=cfg["coefficient"]["t0"],
            value=cfg["coefficient"]["value"],
            space_profile=cfg["coefficient"]["space_profile"],
        ).column(0) if A.kind in ("constant", "sqrt_product", "holder", "lipschitz", "step") else a.resampled(n)

    def ladder(label, order, evaluate, verdict_fn=None):
        values = []
        last = None
        for n in resolutions:
            last = evaluate(signal_at(n))
            values.append(last.value)
        divergent = None
        if verdict_fn is not None:
            divergent = verdict_fn(values, last)
        rows.append(SeminormRow(
            functional=label, order=order, value=last.value,
            achieving_interval=last.achieving_interval,
            resolution=resolutions[-1], divergent_flag=divergent,
            seed=cfg["coefficient"]["seed"],
        ))

    growth = (lambda vals, _last: refinement_verdict(vals, threshold=threshold).divergent
              if len(vals) >= 3 else None)
    if "bmo" in want:
        ladder("bmo", None,
               lambda s: bmo_seminorm(frac_derivative(s, 0.5), dyadic_family(s.grid)),
               growth)
    if "half_sobolev" in want:
        ladder("scale_invariant_half_sobolev", 0.5,
               lambda s: scale_invariant_half_sobolev(s, dyadic_family(s.grid)),
               growth)
    if "holder" in want:
        ha = cfg["analysis"]["holder_alpha"]
        ladder("holder", ha, lambda s: holder_constant(s, ha), growth)
    if "dini" in want:
        for q in cfg["analysis"]["dini_q"]:
            ladder("dini", q, lambda s, q=q: dini_integral(s, q=q),
                   lambda _vals, last: dini_verdict(last).divergent)


def _extension_rows(A: CoefficientField, rows: list[SeminormRow],
                    checks: dict) -> None:
    """Measured extension constants and the three proven bound checks."""
    a = A.column(0)
    M = scale_invariant_half_sobolev(a, dyadic_family(a.grid)).value
    flat = extend_reflect(A)
    af = flat.column(0)
    n = A.time_grid.n_points
    T = A.T
    two = TimeGrid(A.time_grid.t_start - T, A.time_grid.t_start + T, 2 * n)
    from .timefourier import TimeSignal

    v2 = scale_invariant_half_sobolev(TimeSignal(two, af.values[:2 * n]),
                                      dyadic_family(two)).value
    v3 = scale_invariant_half_sobolev(af, dyadic_family(af.grid)).value
    an = extend_full(A).column(0)
    m_nat = scale_invariant_half_sobolev(an, dyadic_family(an.grid)).value
    bound = 9 * M + 8 * A.Lam ** 2 / T + 6 * (A.Lam ** 2 + A.lam ** 2) / T
    rows.append(SeminormRow("extension_M", 0.5, M, None, n))
    rows.append(SeminormRow("extension_reflected_2T", 0.5, v2, None, 2 * n))
    rows.append(SeminormRow("extension_reflected_3T", 0.5, v3, None, 3 * n))
    rows.append(SeminormRow("extension_M_natural", 0.5, m_nat, None, 3 * n))
    checks["reflected_2T_le_3M"] = bool(v2 <= 3 * M + 1e-12)
    checks["reflected_3T_le_9M"] = bool(v3 <= 9 * M + 1e-12)
    checks["M_natural_le_bound"] = bool(m_nat <= bound + 1e-12)
    checks["M_natural_bound"] = bound


def run_solve(cfg: dict) -> RegularityReport:
    mesh = _build_mesh(cfg)
    grid = TimeGrid(0.0, cfg["time"]["T"], cfg["time"]["n_points"])
    A = _build_coefficient(cfg, grid, mesh)
    f = _build_forcing(cfg, grid, mesh)
    theta = complex(cfg["solver"]["theta_re"], cfg["solver"]["theta_im"])
    res = cauchy_solve(A, f, window_factor=cfg["time"]["window_factor"],
                       tol=cfg["solver"]["tolerance"])
    diag = res.diagnostics

    norms = {
        "l2h_u": l2h_norm(res.u),
        "l2v_grad_u": l2v_grad_norm(res.u),
        "h1_half_h_u": sobolev_norm(res.u, 1.0, "H"),
        "l2h_f": l2h_norm(f),
        "v0": res.v0_norm,
    }
    ratios = {}
    if norms["l2h_f"] > 0:
        for alpha in cfg["analysis"]["alphas"]:
            ratios[f"maxreg_alpha_{alpha}"] = maxreg_ratio(res.u, f, alpha)
    diagnostics = {
        "residual": diag.residual,
        "iterations": diag.iterations,
        "guard_mass_fraction": diag.guard_mass_fraction,
        "theta": {"re": theta.real, "im": theta.imag},
    }
    if A.kind == "constant" and A.dim == 1 and norms["l2h_f"] > 0:
        ref = autonomous_oracle(A.scalar_cells()[0].real, f, theta=0.0)
        dev = float(np.linalg.norm(res.u.values - ref.values)
                    / max(np.linalg.norm(ref.values), 1e-300))
        diagnostics["oracle_relative_deviation"] = dev

    rows: list[SeminormRow] = []
    checks: dict = {}
    _seminorm_ladder(cfg, A, rows)
    if cfg["analysis"]["extension_constants"]:
        _extension_rows(A, rows, checks)
    diagnostics.update(checks)

    return RegularityReport(
        experiment_id=cfg["experiment_id"],
        coefficient={"kind": A.kind, "seed": A.seed, "lambda": A.lam,
                     "Lambda": A.Lam, "T": A.T},
        resolutions={"n_t": grid.n_points, "n_x": mesh.n_cells,
                     "window_factor": cfg["time"]["window_factor"]},
        norms=norms, ratios=ratios, seminorms=rows, diagnostics=diagnostics,
    )


def run_analyze(cfg: dict) -> RegularityReport:
    """Coefficient-only: the full regularity ladder plus extension constants.
    No solve is performed."""
    mesh = _build_mesh(cfg)
    grid = TimeGrid(0.0, cfg["time"]["T"], cfg["time"]["n_points"])
    A = _build_coefficient(cfg, grid, mesh)
    rows: list[SeminormRow] = []
    checks: dict = {}
    _seminorm_ladder(cfg, A, rows)
    _extension_rows(A, rows, checks)
    return RegularityReport(
        experiment_id=cfg["experiment_id"],
        coefficient={"kind": A.kind, "seed": A.seed, "lambda": A.lam,
                     "Lambda": A.Lam, "T": A.T},
        resolutions={"n_t": grid.n_points, "n_x": mesh.n_cells},
        seminorms=rows, diagnostics=checks,
    )


def run_extend(cfg: dict) -> RegularityReport:
    """Materialize the full extension A-natural and save it next to the report."""
    mesh = _build_mesh(cfg)
    grid = TimeGrid(0.0, cfg["time"]["T"], cfg["time"]["n_points"])
    A = _build_coefficient(cfg, grid, mesh)
    An = extend_full(A, window_factor=cfg["time"]["window_factor"])
    prefix = _output_path(cfg, ".extended")
    save_field(An, prefix)
    rows: list[SeminormRow] = []
    checks: dict = {"extended_field": prefix}
    _extension_rows(A, rows, checks)
    return RegularityReport(
        experiment_id=cfg["experiment_id"],
        coefficient={"kind": A.kind, "seed": A.seed, "lambda": A.lam,
                     "Lambda": A.Lam, "T": A.T},
        resolutions={"n_t": grid.n_points, "n_x": mesh.n_cells,
                     "window_factor": cfg["time"]["window_factor"]},
        seminorms=rows, diagnostics=checks,
    )


def run_commutator(cfg: dict) -> RegularityReport:
    """[a, D^alpha] probe across the configured resolutions with the
    refinement-based divergence flag."""
    mesh = _build_mesh(cfg)
    resolutions = sorted({cfg["time"]["n_points"], *cfg["analysis"]["resolutions"]})
    threshold = cfg["analysis"]["divergence_threshold"]
    rows: list[SeminormRow] = []
    diagnostics: dict = {"resolutions": resolutions}
    for alpha in cfg["analysis"]["alphas"]:
        estimates = []
        probe = None
        for n in resolutions:
            grid = TimeGrid(0.0, cfg["time"]["T"], n)
            A = _build_coefficient(cfg, grid, mesh)
            probe = commutator_norm_estimate(A.column(0), alpha,
                                             seed=cfg["coefficient"]["seed"])
            estimates.append(probe.estimate)
        divergent = (refinement_verdict(estimates, threshold=threshold).divergent
                     if len(estimates) >= 3 else None)
        rows.append(SeminormRow(
            functional="commutator_norm", order=alpha, value=probe.estimate,
            achieving_interval=None, resolution=resolutions[-1],
            divergent_flag=divergent, seed=cfg["coefficient"]["seed"],
        ))
        diagnostics[f"alpha_{alpha}"] = {
            "estimates": estimates,
            "bmo_value": probe.bmo_value,
            "ratio": probe.ratio,
            "degenerate": probe.degenerate,
        }
    return RegularityReport(
        experiment_id=cfg["experiment_id"],
        coefficient={"kind": cfg["coefficient"]["kind"],
                     "seed": cfg["coefficient"]["seed"]},
        resolutions={"n_t": resolutions[-1], "n_x": mesh.n_cells},
        seminorms=rows, diagnostics=diagnostics,
    )


def _sweep_point(cfg: dict, axis: str, value) -> RegularityReport:
    point = copy.deepcopy(cfg)
    if axis == "resolution":
        point["time"]["n_points"] = int(value)
        point["experiment_id"] += f".n{int(value)}"
    elif axis == "alpha":
        point["analysis"]["alphas"] = [float(value)]
        point["experiment_id"] += f".a{value}"
    elif axis == "family":
        point["coefficient"]["kind"] = str(value)
        point["experiment_id"] += f".{value}"
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    return run_solve(point)


def run_sweep(cfg: dict, axis: str, values: list, workers: int = 2) -> dict:
    """One run_solve per point, concurrently; partial failures are recorded
    per point and the sweep continues."""
    results: dict = {"axis": axis, "points": {}}
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(_sweep_point, cfg, axis, v): v for v in values}
        for fut in concurrent.futures.as_completed(futures):
            v = futures[fut]
            try:
                results["points"][str(v)] = fut.result().to_dict()
            except Exception as exc:  # noqa: BLE001 - per-point isolation
                results["points"][str(v)] = {"error": str(exc),
                                             "error_type": type(exc).__name__}
    return results


def _write(cfg: dict, report: RegularityReport) -> str:
    fmt = cfg["output"]["format"]
    path = _output_path(cfg, ".report." + ("csv" if fmt == "csv" else "json"))
    return emit_report(report, path, format=fmt)


def bundled_config_path(name: str) -> str:
    return os.path.join(os.path.dirname(__file__), "configs", name + ".json")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="maxreg",
        description="Parabolic maximal-regularity laboratory: solve the "
                    "Cauchy problem, analyze coefficient regularity, extend "
                    "coefficients, probe commutators, and run sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "analyze", "extend", "commutator", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("config", help="experiment config JSON, or the name of "
                                      "a bundled config (autonomous-dirichlet, "
                                      "sqrt-product)")
        p.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="KEY=VALUE",
                       help="override a config entry, e.g. --set time.n_points=512")
        p.add_argument("--output-dir", default=None)
        if name == "sweep":
            p.add_argument("--axis", required=True,
                           choices=("resolution", "alpha", "family"))
            p.add_argument("--values", required=True,
                           help="comma-separated sweep values")
            p.add_argument("--workers", type=int, default=2)
    args = parser.parse_args(argv)

    try:
        path = args.config
        if not os.path.exists(path) and os.path.exists(bundled_config_path(path)):
            path = bundled_config_path(path)
        cfg = load_config(path, args.overrides)
        if args.output_dir:
            cfg["output"]["directory"] = args.output_dir
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        if args.command == "sweep":
            values = [v.strip() for v in args.values.split(",") if v.strip()]
            results = run_sweep(cfg, args.axis, values, workers=args.workers)
            out = _output_path(cfg, ".sweep.json")
            with open(out, "w") as fh:
                json.dump(results, fh, indent=2)
        else:
            runner = {"solve": run_solve, "analyze": run_analyze,
                      "extend": run_extend, "commutator": run_commutator}[args.command]
            out = _write(cfg, runner(cfg))
        print(out)
        return EXIT_OK
    except SolverError as exc:
        print(f"error: solver did not converge: {exc}", file=sys.stderr)
        print(json.dumps(getattr(exc, "diagnostics", {}), default=str), file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, CoefficientError, MeshError, GridError, SignalError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
