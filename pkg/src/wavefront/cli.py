"""Command-line surface: eval, verify, propagate, figures, scan.

Exit codes: 0 success, 1 verification failure, 2 usage/parameter error,
3 numerical or domain failure.  Every command writes exactly one manifest
next to its outputs; identical invocations produce byte-identical data
files (the manifest timestamp aside).  A JSON config file can pre-set any
flag (flags win on conflict); WAVEFRONT_THREADS caps sweep parallelism.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys

import numpy as np

from . import __version__, analytic, metrics, output, plots, propagator, residual
from .analytic import PhaseVariant
from .metrics import FeatureWindowError
from .model import (
    Branch,
    DomainClippingError,
    GridSpec,
    ModelParams,
    ParameterError,
    TimeSpec,
    make_params,
)
from .propagator import BCMode, PropagationConfig, SolverError
from .residual import SignConvention

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

#: Ratio bounds for "shrinks x4 per 2x refinement" (15% slack).
ORDER_RATIO_LO, ORDER_RATIO_HI = 3.4, 4.6
#: Relative floor the superposition residual must keep under refinement.
SUPERPOSITION_FLOOR = 1e-2

_EVAL_DEFAULTS = {
    Branch.PLUS: {"x": "-6:8:1401"},
    Branch.MINUS: {"x": "-8:6:1401"},
}
_PROPAGATE_DEFAULT_X = {
    Branch.PLUS: "-2:10:12001",
    Branch.MINUS: "-5:6:11001",
}

_FIGURES = {
    "1": {"branch": Branch.PLUS, "kind": "curves", "x": "-6:8:1401", "times": "0,0.5,1"},
    "2": {"branch": Branch.MINUS, "kind": "curves", "x": "-8:6:1401", "times": "0,0.5,1"},
    "3": {"branch": Branch.PLUS, "kind": "surface", "x": "-6:8:281", "t": "0:2:81"},
    "4": {"branch": Branch.MINUS, "kind": "surface", "x": "-8:6:281", "t": "0:2:81"},
}


class UsageError(ValueError):
    """Bad flag combination or malformed flag value."""


def parse_range(text: str, what: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"{what} must look like a:b:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"{what}: {exc}") from exc
    return lo, hi, n


def parse_grid(text: str) -> GridSpec:
    lo, hi, n = parse_range(text, "--x")
    return GridSpec(lo, hi, n)


def parse_times(text: str) -> list[float]:
    try:
        times = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"--t: {exc}") from exc
    if not times:
        raise UsageError("--t must list at least one time")
    return times


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            cfg = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    return cfg


def resolve(ns: argparse.Namespace, config: dict, key: str, default):
    """Flag value if given, else config entry, else default."""
    value = getattr(ns, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def build_params(ns: argparse.Namespace, config: dict, branch: Branch | None) -> ModelParams:
    hbar = float(resolve(ns, config, "hbar", 1.0))
    mass = float(resolve(ns, config, "mass", 1.0))
    lam = resolve(ns, config, "lam", None)
    c = resolve(ns, config, "c", None)
    if lam is not None and c is not None:
        raise UsageError("--lambda and --c are mutually exclusive")
    if lam is not None:
        coupling = (float(lam) * hbar) ** 2 / (8.0 * mass)
    elif c is not None:
        coupling = float(c)
    else:
        coupling = hbar**2 / (8.0 * mass)  # lambda = 1
    k = resolve(ns, config, "k", None)
    return make_params(
        hbar=hbar,
        mass=mass,
        coupling_c=coupling,
        branch=branch,
        k=None if k is None else float(k),
    )


def _branch(ns: argparse.Namespace, config: dict, default: str = "plus") -> Branch:
    raw = str(resolve(ns, config, "branch", default)).lower()
    try:
        return Branch(raw)
    except ValueError as exc:
        raise UsageError(f"unknown branch {raw!r}") from exc


def _variant(ns: argparse.Namespace, config: dict) -> PhaseVariant:
    raw = str(resolve(ns, config, "variant", "comoving")).lower()
    try:
        return PhaseVariant(raw)
    except ValueError as exc:
        raise UsageError(f"unknown phase variant {raw!r}") from exc


def _convention(ns: argparse.Namespace, config: dict) -> SignConvention:
    raw = str(resolve(ns, config, "convention", "attractive")).lower()
    try:
        return SignConvention(raw)
    except ValueError as exc:
        raise UsageError(f"unknown sign convention {raw!r}") from exc


# ---------------------------------------------------------------- eval

def cmd_eval(ns: argparse.Namespace) -> int:
    config = load_config(ns.config)
    branch = _branch(ns, config)
    params = build_params(ns, config, branch)
    variant = _variant(ns, config)
    grid = parse_grid(str(resolve(ns, config, "x", _EVAL_DEFAULTS[branch]["x"])))
    times = parse_times(str(resolve(ns, config, "t", "0,0.5,1")))
    amplitude = float(resolve(ns, config, "amplitude", 1.0))
    out = str(resolve(ns, config, "out", f"psi_{branch.value}.csv"))

    rows = []
    xs = grid.points()
    for t in times:
        field = analytic.eval_psi(params, grid, t, amplitude, variant)
        fields = analytic.madelung_fields(params, grid, t, amplitude, variant)
        for i in range(grid.nx):
            rows.append(
                (
                    t,
                    xs[i],
                    field.values[i].real,
                    field.values[i].imag,
                    fields.density[i],
                    fields.s[i],
                    fields.current[i],
                    fields.qpot[i],
                )
            )
    output.write_csv(out, ("t", "x", "re", "im", "density", "phase", "current", "qpot"), rows)
    base = out[:-4] if out.endswith(".csv") else out
    output.write_manifest(
        base + ".manifest.json",
        "eval",
        {
            "branch": branch.value,
            "hbar": params.hbar,
            "mass": params.mass,
            "coupling_c": params.coupling_c,
            "k": params.k,
            "lambda": params.lam,
            "variant": variant.value,
            "amplitude": amplitude,
            "x": [grid.x_min, grid.x_max, grid.nx],
            "times": times,
            "out": out,
        },
    )
    print(f"wrote {out} ({len(rows)} rows)")
    return EXIT_OK


# ---------------------------------------------------------------- verify

def _refinement_summary(reports) -> dict:
    return {
        "linf": [r.linf_norm for r in reports],
        "linf_rel": [r.linf_rel for r in reports],
        "orders": [r.convergence_order for r in reports],
        "nx": [r.grid.nx for r in reports],
    }


def cmd_verify(ns: argparse.Namespace) -> int:
    config = load_config(ns.config)
    levels = int(resolve(ns, config, "grids", 2))
    if levels < 2:
        raise UsageError("--grids must be >= 2 to measure convergence")
    out_dir = str(resolve(ns, config, "out", "verify_out"))
    run_superposition = bool(resolve(ns, config, "superposition", True))
    run_scan = bool(resolve(ns, config, "scan", True))
    hbar = float(resolve(ns, config, "hbar", 1.0))
    mass = float(resolve(ns, config, "mass", 1.0))
    os.makedirs(out_dir, exist_ok=True)

    checks: list[dict] = []

    def add_check(name: str, passed: bool, detail: str) -> None:
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    report: dict = {
        "schema_version": output.REPORT_SCHEMA_VERSION,
        "tool_version": __version__,
    }

    params = {
        Branch.PLUS: make_params(hbar=hbar, mass=mass, branch=Branch.PLUS),
        Branch.MINUS: make_params(hbar=hbar, mass=mass, branch=Branch.MINUS),
    }

    # 1. sign probe per branch
    probe_block = {}
    winning = {}
    for branch, p in params.items():
        verdict = residual.sign_probe(p)
        probe_block[branch.value] = verdict.to_dict()
        winning[branch] = verdict
        add_check(
            f"sign_probe_decisive_{branch.value}",
            not verdict.inconclusive,
            f"ratio {verdict.residual_ratio:.3g} (threshold {residual.DECISIVE_RATIO})",
        )
    report["sign_probe"] = probe_block

    # 2. winner shrinks x4 per refinement, loser keeps a floor
    base_grid = GridSpec(-6.0, 6.0, 1501)
    conv_block = {}
    for branch, p in params.items():
        verdict = winning[branch]
        variant = verdict.winning_phase_variant or PhaseVariant.COMOVING

        def source(x, t, _p=p, _v=variant):
            return analytic.psi_values(_p, x, t, variant=_v)

        winner_reports = residual.residual_refinement(
            source, p, base_grid, 0.5, base_grid.dx, verdict.winning_convention, levels
        )
        loser_convention = (
            SignConvention.REPULSIVE
            if verdict.winning_convention is SignConvention.ATTRACTIVE
            else SignConvention.ATTRACTIVE
        )
        loser_reports = residual.residual_refinement(
            source, p, base_grid, 0.5, base_grid.dx, loser_convention, levels
        )
        ratios = [
            winner_reports[i - 1].linf_norm / winner_reports[i].linf_norm
            for i in range(1, len(winner_reports))
        ]
        ratio_ok = all(ORDER_RATIO_LO <= r <= ORDER_RATIO_HI for r in ratios)
        floor_ok = (
            loser_reports[-1].linf_norm >= 0.5 * loser_reports[0].linf_norm
            and loser_reports[-1].linf_norm
            >= residual.DECISIVE_RATIO * winner_reports[-1].linf_norm
        )
        add_check(
            f"winner_second_order_{branch.value}",
            ratio_ok,
            f"refinement ratios {['%.3g' % r for r in ratios]}",
        )
        add_check(
            f"loser_floor_{branch.value}",
            floor_ok,
            f"loser linf {loser_reports[-1].linf_norm:.3g} vs winner {winner_reports[-1].linf_norm:.3g}",
        )
        conv_block[branch.value] = {
            "winning_convention": verdict.winning_convention.value,
            "winner": _refinement_summary(winner_reports),
            "loser": _refinement_summary(loser_reports),
        }
    report["convergence"] = conv_block

    # 3. split-equation residuals of the winning configuration converge
    split_block = {}
    for branch, p in params.items():
        verdict = winning[branch]
        variant = verdict.winning_phase_variant or PhaseVariant.COMOVING
        msrc = residual.madelung_source(p, variant=variant)
        qhj_linf, qhj_rel, cont_linf = [], [], []
        g, step = GridSpec(-6.0, 6.0, 3001), GridSpec(-6.0, 6.0, 3001).dx
        for _ in range(levels):
            qhj = residual.qhj_residual(
                msrc, p, g, 0.5, step, verdict.winning_convention, zero_radius=0.05
            )
            cont = residual.continuity_residual(msrc, p, g, 0.5, step)
            qhj_linf.append(qhj.linf_norm)
            qhj_rel.append(qhj.linf_rel)
            cont_linf.append(cont.linf_norm)
            g = g.refined(2)
            step = 0.5 * step
        qhj_ratios = [qhj_linf[i - 1] / qhj_linf[i] for i in range(1, len(qhj_linf))]
        cont_ratios = [cont_linf[i - 1] / cont_linf[i] for i in range(1, len(cont_linf))]
        ok = all(ORDER_RATIO_LO <= r <= ORDER_RATIO_HI for r in qhj_ratios + cont_ratios)
        add_check(
            f"split_residuals_vanish_{branch.value}",
            ok and qhj_rel[-1] < 1e-2,
            f"qhj ratios {['%.3g' % r for r in qhj_ratios]}, "
            f"continuity ratios {['%.3g' % r for r in cont_ratios]}",
        )
        split_block[branch.value] = {
            "qhj_linf": qhj_linf,
            "qhj_linf_rel": qhj_rel,
            "continuity_linf": cont_linf,
        }
    report["split_residuals"] = split_block

    # 4. constraint scan: the branch pairings are attained minima
    if run_scan:
        scan = residual.constraint_scan(
            make_params(hbar=hbar, mass=mass, branch=None, k=0.0),
            np.linspace(-4.0 * mass, 4.0 * mass, 33),
            np.linspace(-4.0, 4.0, 33),
        )
        surface_max = float(np.max(scan.linf))
        pairings = []
        scan_ok = True
        for alpha0, k0 in ((2.0 * mass, -2.0), (-2.0 * mass, 2.0)):
            a, k, v = scan.value_near(alpha0, k0, cells=1)
            local = scan.is_local_min(alpha0, k0, cells=1)
            ok = v <= 1e-3 * surface_max and local
            scan_ok = scan_ok and ok
            pairings.append(
                {
                    "alpha": alpha0,
                    "k": k0,
                    "node": [a, k],
                    "value": v,
                    "is_local_min": local,
                    "passed": ok,
                }
            )
        best_k = [float(scan.ks[int(np.argmin(scan.linf[i, :]))]) for i in range(len(scan.alphas))]
        valley_slope = float(np.polyfit(scan.alphas, best_k, 1)[0])
        add_check(
            "constraint_scan_pairings",
            scan_ok,
            f"pairings at floor (surface max {surface_max:.3g}); "
            f"valley best-k slope {valley_slope:.4g} (exact family k = -alpha/mass)",
        )
        report["constraint_scan"] = {
            "alphas": list(map(float, scan.alphas)),
            "ks": list(map(float, scan.ks)),
            "global_min": list(scan.global_min()),
            "branch_pairings": pairings,
            "valley_best_k_slope": valley_slope,
            "surface_max": surface_max,
        }

    # 5. superposition non-closure
    if run_superposition:
        sup = residual.superposition_source(params[Branch.PLUS], params[Branch.MINUS])
        floors = []
        grid, dt = GridSpec(-6.0, 6.0, 1501), GridSpec(-6.0, 6.0, 1501).dx
        branch_src = residual.residual_refinement(
            lambda x, t: analytic.psi_values(params[Branch.PLUS], x, t),
            params[Branch.PLUS],
            grid,
            0.5,
            dt,
            winning[Branch.PLUS].winning_convention,
            levels,
        )
        g, step = grid, dt
        for _ in range(levels):
            rep = residual.tdse_residual(
                sup, params[Branch.PLUS], g, 0.5, step, winning[Branch.PLUS].winning_convention
            )
            floors.append(rep.linf_rel)
            g = g.refined(2)
            step = 0.5 * step
        floor_ok = all(f >= SUPERPOSITION_FLOOR for f in floors)
        shrink_ok = branch_src[-1].linf_rel < floors[-1] / 10.0
        add_check(
            "superposition_floor",
            floor_ok and shrink_ok,
            f"relative floors {['%.3g' % f for f in floors]}, branch residual "
            f"{branch_src[-1].linf_rel:.3g}",
        )
        report["superposition"] = {
            "relative_floors": floors,
            "branch_residual_rel": [r.linf_rel for r in branch_src],
        }

    # 6. envelope-order readings (hbar != 1 separates the candidates)
    readings = residual.order_reading_report(make_params(hbar=0.5, mass=mass, branch=Branch.PLUS))
    matched = readings["ode_matched"]
    others = [v for k, v in readings.items() if k != "ode_matched"]
    add_check(
        "order_reading_matched",
        matched <= 1e-2 * min(others),
        f"ode_matched {matched:.3g} vs others min {min(others):.3g}",
    )
    report["order_readings"] = readings

    # 7. kinematics: counterpropagation and direction audit
    direction = metrics.direction_report(params[Branch.PLUS])
    add_check(
        "counterpropagation",
        direction.counterpropagating
        and abs(direction.velocity_sum) <= 1e-6
        and direction.speed_mismatch <= 1e-6,
        f"velocity sum {direction.velocity_sum:.3g}, speed mismatch "
        f"{direction.speed_mismatch:.3g}; direction claims matched: "
        f"{[e.matches_claim for e in direction.entries]} (mismatch is documented, not failed)",
    )
    report["direction"] = direction.to_dict()

    report["checks"] = checks
    report["passed"] = all(c["passed"] for c in checks)

    output.write_json(os.path.join(out_dir, "verify_report.json"), report)
    output.write_manifest(
        os.path.join(out_dir, "manifest.json"),
        "verify",
        {
            "hbar": hbar,
            "mass": mass,
            "grids": levels,
            "superposition": run_superposition,
            "scan": run_scan,
            "out": out_dir,
        },
    )
    for check in checks:
        print(f"{'PASS' if check['passed'] else 'FAIL'} {check['name']}: {check['detail']}")
    print(f"report: {os.path.join(out_dir, 'verify_report.json')}")
    return EXIT_OK if report["passed"] else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------- propagate

def cmd_propagate(ns: argparse.Namespace) -> int:
    config = load_config(ns.config)
    branch = _branch(ns, config)
    params = build_params(ns, config, branch)
    variant = _variant(ns, config)
    convention = _convention(ns, config)
    grid = parse_grid(str(resolve(ns, config, "x", _PROPAGATE_DEFAULT_X[branch])))
    t0 = float(resolve(ns, config, "t0", 0.0))
    t1 = float(resolve(ns, config, "t1", 1.0))
    steps = int(resolve(ns, config, "steps", 1000))
    stride = int(resolve(ns, config, "stride", max(1, steps // 4)))
    levels = int(resolve(ns, config, "levels", 1))
    bc_raw = str(resolve(ns, config, "bc", "analytic")).lower()
    bc = {"analytic": BCMode.ANALYTIC_DIRICHLET, "frozen": BCMode.FROZEN_DIRICHLET}.get(bc_raw)
    if bc is None:
        raise UsageError(f"unknown bc mode {bc_raw!r}")
    out_dir = str(resolve(ns, config, "out", "propagate_out"))
    do_plot = bool(resolve(ns, config, "plot", True))
    os.makedirs(out_dir, exist_ok=True)

    cfg = PropagationConfig(
        grid=grid,
        time=TimeSpec(t0, t1, steps),
        convention=convention,
        bc_mode=bc,
        variant=variant,
        snapshot_stride=stride,
    )
    initial = analytic.eval_psi(params, grid, t0, 1.0, variant)
    snapshots = propagator.propagate(params, cfg, initial)

    xs = grid.points()
    snap_rows = []
    error_rows = []
    for snap in snapshots:
        exact = analytic.psi_values(params, xs, snap.time, 1.0, variant)
        error_rows.append((snap.time, propagator.interior_error(snap, exact)))
        for i in range(grid.nx):
            value = snap.values[i]
            snap_rows.append((snap.time, xs[i], value.real, value.imag, abs(value) ** 2))
    output.write_csv(
        os.path.join(out_dir, "snapshots.csv"),
        ("t", "x", "re", "im", "density"),
        snap_rows,
    )
    output.write_csv(
        os.path.join(out_dir, "error_table.csv"),
        ("t", "error_linf"),
        error_rows,
    )

    study_rows = []
    if levels > 1:
        study = propagator.propagation_study(params, cfg, levels=levels)
        for row in study:
            study_rows.append(
                (
                    row.dx,
                    row.dt,
                    row.nx,
                    row.nt,
                    row.error_linf,
                    float("nan") if row.order is None else row.order,
                )
            )
        output.write_csv(
            os.path.join(out_dir, "study.csv"),
            ("dx", "dt", "nx", "nt", "error_linf", "order"),
            study_rows,
        )

    if do_plot:
        times = np.asarray([row[0] for row in error_rows])
        errors = np.asarray([max(row[1], 1e-300) for row in error_rows])
        plots.render_curves(
            os.path.join(out_dir, "error_vs_time.png"),
            times,
            [("interior L-inf error", errors)],
            "t",
            "error",
            f"Crank-Nicolson vs closed form ({branch.value} branch)",
            logy=bool(np.all(errors > 0)),
        )

    output.write_manifest(
        os.path.join(out_dir, "manifest.json"),
        "propagate",
        {
            "branch": branch.value,
            "hbar": params.hbar,
            "mass": params.mass,
            "coupling_c": params.coupling_c,
            "k": params.k,
            "variant": variant.value,
            "convention": convention.value,
            "bc": bc.value,
            "x": [grid.x_min, grid.x_max, grid.nx],
            "t0": t0,
            "t1": t1,
            "steps": steps,
            "stride": stride,
            "levels": levels,
            "stability_diagnostic": cfg.stability_diagnostic(params),
            "out": out_dir,
        },
    )
    final_err = error_rows[-1][1]
    print(f"final interior L-inf error vs closed form: {final_err:.6g}")
    if study_rows:
        orders = [r[5] for r in study_rows[1:]]
        print(f"refinement orders: {['%.4g' % o for o in orders]}")
    return EXIT_OK


# ---------------------------------------------------------------- figures

def _gnuplot_curves(csv_name: str, labels: list[str], title: str) -> str:
    plot_parts = ", ".join(
        f'"{csv_name}" using 1:{i + 2} with lines title "{label}"'
        for i, label in enumerate(labels)
    )
    return (
        "set datafile separator \",\"\n"
        f"set title \"{title}\"\n"
        "set xlabel \"x\"\n"
        "set ylabel \"density\"\n"
        "set key top left\n"
        f"plot {plot_parts}\n"
    )


def _gnuplot_surface(csv_name: str, title: str, nx: int, nt: int) -> str:
    return (
        "set datafile separator \",\"\n"
        f"set title \"{title}\"\n"
        "set xlabel \"x\"\n"
        "set ylabel \"t\"\n"
        "set zlabel \"density\"\n"
        f"set dgrid3d {nt},{nx}\n"
        "set hidden3d\n"
        f"splot \"{csv_name}\" using 2:1:3 with lines notitle\n"
    )


def cmd_figures(ns: argparse.Namespace) -> int:
    config = load_config(ns.config)
    which = str(resolve(ns, config, "fig", "all"))
    out_dir = str(resolve(ns, config, "out", "figures_out"))
    do_plot = bool(resolve(ns, config, "plot", True))
    hbar = float(resolve(ns, config, "hbar", 1.0))
    mass = float(resolve(ns, config, "mass", 1.0))
    os.makedirs(out_dir, exist_ok=True)
    figs = list(_FIGURES) if which == "all" else [which]

    written = []
    for fig in figs:
        spec = _FIGURES[fig]
        branch: Branch = spec["branch"]
        params = make_params(hbar=hbar, mass=mass, branch=branch)
        title = f"density, {branch.value} branch (scale {params.lam:g})"
        if spec["kind"] == "curves":
            grid = parse_grid(spec["x"])
            times = parse_times(spec["times"])
            xs = grid.points()
            curves = [
                np.abs(analytic.psi_values(params, xs, t)) ** 2 for t in times
            ]
            labels = [f"density_t{t:g}" for t in times]
            csv_name = f"fig{fig}_density.csv"
            rows = [
                tuple([xs[i]] + [curve[i] for curve in curves]) for i in range(grid.nx)
            ]
            output.write_csv(
                os.path.join(out_dir, csv_name), tuple(["x"] + labels), rows
            )
            output.atomic_write_text(
                os.path.join(out_dir, f"fig{fig}.gp"),
                _gnuplot_curves(csv_name, labels, title),
            )
            if do_plot:
                plots.render_curves(
                    os.path.join(out_dir, f"fig{fig}.png"),
                    xs,
                    [(f"t = {t:g}", curve) for t, curve in zip(times, curves)],
                    "x",
                    "density",
                    title,
                )
        else:
            grid = parse_grid(spec["x"])
            t_lo, t_hi, nt = parse_range(spec["t"], "--t")
            ts = np.linspace(t_lo, t_hi, nt)
            xs = grid.points()
            surface = np.stack(
                [np.abs(analytic.psi_values(params, xs, t)) ** 2 for t in ts]
            )
            csv_name = f"fig{fig}_density_surface.csv"
            rows = []
            for i, t in enumerate(ts):
                for j in range(grid.nx):
                    rows.append((t, xs[j], surface[i, j]))
            output.write_csv(os.path.join(out_dir, csv_name), ("t", "x", "density"), rows)
            output.atomic_write_text(
                os.path.join(out_dir, f"fig{fig}.gp"),
                _gnuplot_surface(csv_name, title, grid.nx, nt),
            )
            if do_plot:
                plots.render_surface(
                    os.path.join(out_dir, f"fig{fig}.png"),
                    xs,
                    ts,
                    surface,
                    "x",
                    "t",
                    title,
                )
        written.append(fig)

    output.write_manifest(
        os.path.join(out_dir, "manifest.json"),
        "figures",
        {"figures": written, "hbar": hbar, "mass": mass, "plot": do_plot, "out": out_dir},
    )
    print(f"wrote figures {', '.join(written)} to {out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------- scan

def cmd_scan(ns: argparse.Namespace) -> int:
    config = load_config(ns.config)
    hbar = float(resolve(ns, config, "hbar", 1.0))
    mass = float(resolve(ns, config, "mass", 1.0))
    a_lo, a_hi, a_n = parse_range(str(resolve(ns, config, "alpha", f"{-4 * mass}:{4 * mass}:33")), "--alpha")
    k_lo, k_hi, k_n = parse_range(str(resolve(ns, config, "k", "-4:4:33")), "--k")
    grid = parse_grid(str(resolve(ns, config, "x", "-4:4:1201")))
    t = float(resolve(ns, config, "t", 0.25))
    dt = float(resolve(ns, config, "dt", 1e-3))
    out_dir = str(resolve(ns, config, "out", "scan_out"))
    do_plot = bool(resolve(ns, config, "plot", True))
    os.makedirs(out_dir, exist_ok=True)

    params = make_params(hbar=hbar, mass=mass, branch=None, k=0.0)
    scan = residual.constraint_scan(
        params,
        np.linspace(a_lo, a_hi, a_n),
        np.linspace(k_lo, k_hi, k_n),
        grid=grid,
        t=t,
        dt=dt,
    )
    output.write_csv(
        os.path.join(out_dir, "scan.csv"),
        ("alpha", "k", "continuity_linf"),
        scan.rows(),
    )
    best_k = [float(scan.ks[int(np.argmin(scan.linf[i, :]))]) for i in range(len(scan.alphas))]
    summary = {
        "schema_version": output.REPORT_SCHEMA_VERSION,
        "global_min": list(scan.global_min()),
        "branch_pairings": [
            {
                "alpha": 2.0 * mass,
                "k": -2.0,
                "value_near": list(scan.value_near(2.0 * mass, -2.0)),
                "is_local_min": scan.is_local_min(2.0 * mass, -2.0),
            },
            {
                "alpha": -2.0 * mass,
                "k": 2.0,
                "value_near": list(scan.value_near(-2.0 * mass, 2.0)),
                "is_local_min": scan.is_local_min(-2.0 * mass, 2.0),
            },
        ],
        "valley_best_k_slope": float(np.polyfit(scan.alphas, best_k, 1)[0]),
        "note": "the continuity operator vanishes along k = -alpha/mass; "
        "the branch pairings sit on that line",
    }
    output.write_json(os.path.join(out_dir, "scan_summary.json"), summary)
    if do_plot:
        plots.render_scan_heatmap(
            os.path.join(out_dir, "scan.png"),
            scan.alphas,
            scan.ks,
            scan.linf,
            "continuity residual over (alpha, k)",
        )
    output.write_manifest(
        os.path.join(out_dir, "manifest.json"),
        "scan",
        {
            "hbar": hbar,
            "mass": mass,
            "alpha": [a_lo, a_hi, a_n],
            "k": [k_lo, k_hi, k_n],
            "x": [grid.x_min, grid.x_max, grid.nx],
            "t": t,
            "dt": dt,
            "out": out_dir,
        },
    )
    print(f"scan written to {out_dir}; global min {summary['global_min']}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    """ArgumentParser that accepts values like -2:10:2048 after a flag."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = re.compile(r"^-\d")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wavefront",
        description="Closed-form Bessel wavepacket fronts: evaluation, "
        "verification, propagation, figure data",
    )
    parser.add_argument("--version", action="version", version=f"wavefront {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file mirroring the flags (flags win)")
        p.add_argument("--hbar", type=float, help="action scale (default 1)")
        p.add_argument("--mass", type=float, help="mass scale (default 1)")

    p_eval = sub.add_parser("eval", help="sample a closed-form branch solution to CSV")
    common(p_eval)
    p_eval.add_argument("--branch", choices=["plus", "minus"])
    p_eval.add_argument("--c", type=float, help="potential amplitude C")
    p_eval.add_argument("--lambda", dest="lam", type=float, help="envelope scale (sets C)")
    p_eval.add_argument("--x", help="grid as min:max:count")
    p_eval.add_argument("--t", help="comma-separated times")
    p_eval.add_argument("--amplitude", type=float, help="amplitude constant (default 1)")
    p_eval.add_argument("--variant", choices=["comoving", "opposing"])
    p_eval.add_argument("--out", help="output CSV path")
    p_eval.set_defaults(handler=cmd_eval)

    p_verify = sub.add_parser("verify", help="run the full verification battery")
    common(p_verify)
    p_verify.add_argument("--grids", type=int, help="refinement levels (default 2)")
    p_verify.add_argument(
        "--superposition",
        action=argparse.BooleanOptionalAction,
        help="include the superposition non-closure check (default on)",
    )
    p_verify.add_argument(
        "--scan",
        action=argparse.BooleanOptionalAction,
        help="include the constraint scan (default on)",
    )
    p_verify.add_argument("--out", help="output directory")
    p_verify.set_defaults(handler=cmd_verify)

    p_prop = sub.add_parser("propagate", help="Crank-Nicolson run against the closed form")
    common(p_prop)
    p_prop.add_argument("--branch", choices=["plus", "minus"])
    p_prop.add_argument("--c", type=float)
    p_prop.add_argument("--lambda", dest="lam", type=float)
    p_prop.add_argument("--x", help="grid as min:max:count")
    p_prop.add_argument("--t0", type=float)
    p_prop.add_argument("--t1", type=float)
    p_prop.add_argument("--steps", type=int, help="time steps (default 1000)")
    p_prop.add_argument("--stride", type=int, help="snapshot stride in steps")
    p_prop.add_argument("--levels", type=int, help="refinement levels for the order study")
    p_prop.add_argument("--bc", choices=["analytic", "frozen"])
    p_prop.add_argument("--convention", choices=["attractive", "repulsive"])
    p_prop.add_argument("--variant", choices=["comoving", "opposing"])
    p_prop.add_argument("--out", help="output directory")
    p_prop.add_argument("--plot", action=argparse.BooleanOptionalAction)
    p_prop.set_defaults(handler=cmd_propagate)

    p_fig = sub.add_parser("figures", help="emit the reference density figure data")
    common(p_fig)
    p_fig.add_argument("--fig", choices=["all", "1", "2", "3", "4"])
    p_fig.add_argument("--out", help="output directory")
    p_fig.add_argument("--plot", action=argparse.BooleanOptionalAction)
    p_fig.set_defaults(handler=cmd_figures)

    p_scan = sub.add_parser("scan", help="continuity-residual scan over (alpha, k)")
    common(p_scan)
    p_scan.add_argument("--alpha", help="alpha range as min:max:count")
    p_scan.add_argument("--k", help="k range as min:max:count")
    p_scan.add_argument("--x", help="grid as min:max:count")
    p_scan.add_argument("--t", type=float)
    p_scan.add_argument("--dt", type=float)
    p_scan.add_argument("--out", help="output directory")
    p_scan.add_argument("--plot", action=argparse.BooleanOptionalAction)
    p_scan.set_defaults(handler=cmd_scan)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return int(ns.handler(ns))
    except (UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainClippingError, SolverError, FeatureWindowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry() -> None:  # console-script entry point
    sys.exit(main())


if __name__ == "__main__":
    entry()
