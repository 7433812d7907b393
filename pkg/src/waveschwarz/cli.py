"""Experiment runner: reads a flat key = value config, dispatches one of the
library's experiments and writes CSV results, an SVG spectrum plot where
applicable, and a manifest.json recording every parameter, seed and tolerance.

Exit codes: 0 success, 1 config validation error, 2 runtime failure.
The output directory may be overridden with the WAVESCHWARZ_OUTPUT_DIR
environment variable (that is the only environment hook).
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, discrete, numerics, schwarz2d, toeplitz
from .iteration import nilpotency_check, spectral_radius_curve
from .schwarz1d import SchwarzParams, coefficients_1d
from .schwarz2d import k_scaled_sweep, sup_convergence_factor
from .toeplitz import ToeplitzBlocks, limiting_spectrum, spectrum

__all__ = ["ExperimentConfig", "parse_config", "validate", "run", "main",
           "EXPERIMENTS", "default_tolerances"]

ENV_OUTPUT_DIR = "WAVESCHWARZ_OUTPUT_DIR"

_COMMON_OPTIONAL = {"seed", "output_dir"}

# experiment -> (required keys, extra optional keys)
EXPERIMENTS = {
    "spectrum": ({"k", "sigma", "delta", "L", "alpha_mode", "N"}, {"curve_samples"}),
    "limit-curve": ({"k", "sigma", "delta", "L", "alpha_mode"}, {"curve_samples"}),
    "factor-vs-N": ({"k", "sigma", "delta", "L", "alpha_mode", "N_list"}, set()),
    "mode-sweep": ({"k", "sigma", "delta", "L", "L_hat", "equation"}, set()),
    "k-robust": ({"sigma0", "L0", "delta0", "L_hat", "k_list", "equation"}, set()),
    "nilpotency": ({"k", "delta", "L", "N"}, set()),
    "discrete-scan": ({"k_list", "N_list", "sigma", "case"}, {"overlap_cells"}),
}

_INT_KEYS = {"N", "seed", "curve_samples", "overlap_cells"}
_LIST_KEYS = {"N_list", "k_list"}
_STR_KEYS = {"experiment", "alpha_mode", "equation", "case", "output_dir"}


def default_tolerances():
    """Every tolerance/constant any module consumes, for the manifest."""
    return {
        "poly_roots.tol": numerics.POLY_ROOTS_TOL,
        "poly_roots.max_iter": numerics.POLY_ROOTS_MAX_ITER,
        "power_radius.tol": numerics.POWER_TOL,
        "gmres.breakdown": numerics.GMRES_BREAKDOWN,
        "spectrum.curve_samples": toeplitz.CURVE_SAMPLES,
        "spectrum.eig_switch_m": toeplitz.EIG_SWITCH_M,
        "spectrum.det_crosscheck_m": toeplitz.DET_CROSSCHECK_M,
        "spectrum.det_crosscheck_rtol": toeplitz.DET_CROSSCHECK_RTOL,
        "mode_sweep.tail_window": schwarz2d.TAIL_WINDOW,
        "beta_grid.points": schwarz2d.BETA_GRID_POINTS,
        "beta_grid.max": schwarz2d.BETA_GRID_MAX,
        "discrete.scan_tol": discrete.SCAN_TOL,
        "discrete.scan_max_iter": discrete.SCAN_MAX_ITER,
        "discrete.pollution_c": discrete.POLLUTION_C,
        "discrete.pollution_floor": discrete.POLLUTION_FLOOR,
    }


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)
    output_dir: str = "."
    seed: int = 0


class ConfigError(ValueError):
    pass


def _parse_value(key, raw):
    raw = raw.strip()
    if key in _STR_KEYS:
        return raw
    if key in _LIST_KEYS:
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        if not parts:
            raise ConfigError(f"{key}: empty list")
        vals = [float(p) for p in parts]
        return [int(v) if v == int(v) else v for v in vals]
    if key in _INT_KEYS:
        v = float(raw)
        if v != int(v):
            raise ConfigError(f"{key}: expected an integer, got {raw}")
        return int(v)
    return float(raw)


def parse_config(path):
    """Flat `key = value` format; '#' starts a comment, blank lines ignored."""
    params = {}
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (s.strip() for s in line.split("=", 1))
            if key in params:
                raise ConfigError(f"{path}:{lineno}: duplicate key '{key}'")
            try:
                params[key] = _parse_value(key, raw)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {key}: {exc}") from exc
    if "experiment" not in params:
        raise ConfigError(f"{path}: missing 'experiment' key")
    experiment = str(params.pop("experiment"))
    output_dir = str(params.pop("output_dir", "."))
    seed = int(params.pop("seed", 0))
    return ExperimentConfig(experiment, params, output_dir, seed)


def validate(config):
    """All config violations, without running anything."""
    issues = []
    if config.experiment not in EXPERIMENTS:
        return [f"unknown experiment '{config.experiment}' "
                f"(choose from {', '.join(sorted(EXPERIMENTS))})"]
    required, optional = EXPERIMENTS[config.experiment]
    present = set(config.parameters)
    for key in sorted(required - present):
        issues.append(f"missing required key '{key}'")
    for key in sorted(present - required - optional):
        issues.append(f"unknown key '{key}' for experiment {config.experiment}")
    p = config.parameters

    def positive(key):
        if key in p and not (isinstance(p[key], (int, float)) and p[key] > 0):
            issues.append(f"{key} must be > 0")

    for key in ("k", "delta", "L", "L_hat", "sigma0", "L0", "delta0"):
        positive(key)
    if "sigma" in p:
        if p["sigma"] < 0:
            issues.append("sigma must be >= 0")
        elif p["sigma"] == 0 and config.experiment != "nilpotency":
            issues.append("sigma = 0 is only meaningful for the nilpotency experiment")
    if "N" in p and config.experiment != "nilpotency" and p["N"] < 2:
        issues.append("N must be >= 2")
    if "N" in p and config.experiment == "nilpotency" and p["N"] < 2:
        issues.append("N must be >= 2")
    if "N_list" in p and any(n < 2 or n != int(n) for n in p["N_list"]):
        issues.append("N_list entries must be integers >= 2")
    if "k_list" in p and any(kk <= 0 for kk in p["k_list"]):
        issues.append("k_list entries must be > 0")
    if "alpha_mode" in p and p["alpha_mode"] not in ("impedance", "impedance-shifted"):
        issues.append("alpha_mode must be 'impedance' or 'impedance-shifted'")
    if "equation" in p and p["equation"] not in schwarz2d.EQUATIONS:
        issues.append(f"equation must be one of {schwarz2d.EQUATIONS}")
    if "case" in p and p["case"] not in discrete.CASES:
        issues.append(f"case must be one of {discrete.CASES}")
    if "curve_samples" in p and p["curve_samples"] < 2:
        issues.append("curve_samples must be >= 2")
    if "overlap_cells" in p and p["overlap_cells"] < 1:
        issues.append("overlap_cells must be >= 1")
    return issues


def _fmt(x):
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) if not isinstance(v, str) else v for v in row) + "\n")


# -- minimal static SVG ------------------------------------------------------

def _svg_spectrum(path, eigs, curve_pts, outliers, admissible):
    xs = np.concatenate([eigs.real, curve_pts.real])
    ys = np.concatenate([eigs.imag, curve_pts.imag])
    pad = 0.1 * max(xs.ptp(), ys.ptp(), 1e-3)
    x0, x1 = xs.min() - pad, xs.max() + pad
    y0, y1 = ys.min() - pad, ys.max() + pad
    W = H = 640.0

    def sx(x):
        return (x - x0) / (x1 - x0) * (W - 80) + 40

    def sy(y):
        return H - ((y - y0) / (y1 - y0) * (H - 80) + 40)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0f}" height="{H:.0f}" '
             f'viewBox="0 0 {W:.0f} {H:.0f}">',
             f'<rect width="{W:.0f}" height="{H:.0f}" fill="white"/>']
    # axes through zero when visible
    if x0 < 0 < x1:
        parts.append(f'<line x1="{sx(0):.2f}" y1="40" x2="{sx(0):.2f}" y2="{H-40:.2f}" '
                     'stroke="#cccccc" stroke-width="1"/>')
    if y0 < 0 < y1:
        parts.append(f'<line x1="40" y1="{sy(0):.2f}" x2="{W-40:.2f}" y2="{sy(0):.2f}" '
                     'stroke="#cccccc" stroke-width="1"/>')
    parts.append(f'<rect x="40" y="40" width="{W-80:.0f}" height="{H-80:.0f}" '
                 'fill="none" stroke="black" stroke-width="1"/>')
    for pt in curve_pts:
        parts.append(f'<circle cx="{sx(pt.real):.2f}" cy="{sy(pt.imag):.2f}" r="1" '
                     'fill="#1f77b4"/>')
    for ev in eigs:
        parts.append(f'<circle cx="{sx(ev.real):.2f}" cy="{sy(ev.imag):.2f}" r="3" '
                     'fill="none" stroke="#d62728" stroke-width="1.2"/>')
    if admissible:
        for ot in outliers:
            parts.append(f'<circle cx="{sx(ot.real):.2f}" cy="{sy(ot.imag):.2f}" r="4" '
                         'fill="none" stroke="#2ca02c" stroke-width="1.5"/>')
    parts.append(f'<text x="{W/2:.0f}" y="{H-12:.0f}" text-anchor="middle" '
                 'font-family="monospace" font-size="12">Re</text>')
    parts.append(f'<text x="14" y="{H/2:.0f}" text-anchor="middle" '
                 'font-family="monospace" font-size="12" '
                 f'transform="rotate(-90 14 {H/2:.0f})">Im</text>')
    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")


# -- experiments -------------------------------------------------------------

def _params_from(p, N=None):
    return SchwarzParams(k=p["k"], sigma=p["sigma"], delta=p["delta"], L=p["L"],
                         alpha_mode=p.get("alpha_mode", "impedance"),
                         N=N if N is not None else p.get("N", 2))


def _curve_rows(limit):
    rows = []
    for th, lp, lm in zip(limit.thetas, limit.lambda_plus, limit.lambda_minus):
        rows.append((th, 1, lp.real, lp.imag))
        rows.append((th, -1, lm.real, lm.imag))
    return rows


def _run_spectrum(config, outdir, results):
    p = config.parameters
    params = _params_from(p, N=int(p["N"]))
    a, b = coefficients_1d(params)
    samples = int(p.get("curve_samples", toeplitz.CURVE_SAMPLES))
    rep = spectrum(ToeplitzBlocks(a, b, params.N - 1), curve_samples=samples,
                   seed=config.seed)
    _write_csv(os.path.join(outdir, "eigenvalues.csv"),
               ["re", "im", "distance_to_limit"],
               [(ev.real, ev.imag, d) for ev, d in zip(rep.eigenvalues, rep.distances)])
    _write_csv(os.path.join(outdir, "curve.csv"),
               ["theta", "branch", "re", "im"], _curve_rows(rep.limit))
    _svg_spectrum(os.path.join(outdir, "spectrum.svg"), rep.eigenvalues,
                  rep.limit.points(), rep.limit.outliers, rep.limit.admissible)
    results.update({
        "a": [a.real, a.imag], "b": [b.real, b.imag],
        "spectral_radius": rep.spectral_radius,
        "max_distance_to_limit": rep.max_distance,
        "mean_distance_to_limit": rep.mean_distance,
        "eigenvalue_method": rep.method,
        "outliers_admissible": rep.limit.admissible,
    })
    return ["eigenvalues.csv", "curve.csv", "spectrum.svg"]


def _run_limit_curve(config, outdir, results):
    p = config.parameters
    params = _params_from(p)
    a, b = coefficients_1d(params)
    samples = int(p.get("curve_samples", toeplitz.CURVE_SAMPLES))
    limit = limiting_spectrum(a, b, samples)
    _write_csv(os.path.join(outdir, "curve.csv"),
               ["theta", "branch", "re", "im"], _curve_rows(limit))
    results.update({
        "a": [a.real, a.imag], "b": [b.real, b.imag],
        "sup_modulus": limit.sup_modulus,
        "outliers_admissible": limit.admissible,
        "outliers": [[o.real, o.imag] for o in limit.outliers],
    })
    return ["curve.csv"]


def _run_factor_vs_N(config, outdir, results):
    p = config.parameters
    params = _params_from(p, N=2)
    curve = spectral_radius_curve(params, [int(n) for n in p["N_list"]])
    rows = [("spectral_radius", n, rho) for n, rho in curve.points]
    rows.append(("limit_bound", max(n for n, _ in curve.points), curve.r1d_bound))
    _write_csv(os.path.join(outdir, "rho_vs_N.csv"), ["kind", "N", "rho"], rows)
    results.update({
        "a": [curve.a.real, curve.a.imag], "b": [curve.b.real, curve.b.imag],
        "r1d_bound": curve.r1d_bound,
        "rho": {str(n): rho for n, rho in curve.points},
    })
    return ["rho_vs_N.csv"]


def _run_mode_sweep(config, outdir, results):
    p = config.parameters
    params = _params_from(p)
    report = sup_convergence_factor(params, p["L_hat"], p["equation"])
    rows = []
    for mf in report.per_mode:
        gt = mf.g_tilde
        rows.append((mf.mode.mode_index, mf.mode.k_tilde,
                     mf.a.real, mf.a.imag, mf.b.real, mf.b.imag, mf.r1d_mode,
                     gt[0], gt[1], gt[2], int(mf.mode.is_evanescent(params.k))))
    _write_csv(os.path.join(outdir, "mode_sweep.csv"),
               ["mode_index", "k_tilde", "re_a", "im_a", "re_b", "im_b",
                "r1d_mode", "g_tilde_plus", "g_tilde_minus", "g_tilde",
                "evanescent"], rows)
    results.update({
        "sup_factor": report.sup_factor,
        "argmax_mode_index": report.argmax_mode.mode_index,
        "argmax_k_tilde": report.argmax_mode.k_tilde,
        "modes_evaluated": report.truncation,
        "truncation_complete": report.complete,
        "truncation_rationale": report.rationale,
    })
    return ["mode_sweep.csv"]


def _run_k_robust(config, outdir, results):
    p = config.parameters
    entries = k_scaled_sweep(p["sigma0"], p["L0"], p["delta0"], p["L_hat"],
                             p["k_list"], p["equation"])
    rows = [(e.k, e.sweep.sup_factor, e.sweep.argmax_mode.mode_index,
             e.beta_sup, e.beta_argmax) for e in entries]
    _write_csv(os.path.join(outdir, "k_robust.csv"),
               ["k", "mode_sup", "argmax_mode_index", "beta_grid_sup",
                "beta_argmax"], rows)
    results["per_k"] = [
        {"k": e.k, "mode_sup": e.sweep.sup_factor, "beta_grid_sup": e.beta_sup}
        for e in entries
    ]
    return ["k_robust.csv"]


def _run_nilpotency(config, outdir, results):
    p = config.parameters
    norm = nilpotency_check(p["k"], p["delta"], p["L"], int(p["N"]))
    _write_csv(os.path.join(outdir, "nilpotency.csv"),
               ["N", "relative_norm"], [(int(p["N"]), norm)])
    results["relative_norm"] = norm
    results["sigma"] = 0.0
    return ["nilpotency.csv"]


def _run_discrete_scan(config, outdir, results):
    p = config.parameters
    table = discrete.scan_counts(p["k_list"], [int(n) for n in p["N_list"]],
                                 p["sigma"], p["case"],
                                 overlap_cells=int(p.get("overlap_cells", 2)))
    path = os.path.join(outdir, "counts.csv")
    table.write_csv(path)
    results["counts"] = [
        {"case": r.case, "k": r.k, "N": r.N, "iterations": r.iterations,
         "converged": r.converged} for r in table.rows
    ]
    results["n_per_unit"] = {str(k): discrete.pollution_points(k) for k in p["k_list"]}
    return ["counts.csv"]


_RUNNERS = {
    "spectrum": _run_spectrum,
    "limit-curve": _run_limit_curve,
    "factor-vs-N": _run_factor_vs_N,
    "mode-sweep": _run_mode_sweep,
    "k-robust": _run_k_robust,
    "nilpotency": _run_nilpotency,
    "discrete-scan": _run_discrete_scan,
}


def run(config):
    """Execute a validated experiment; returns the process exit code."""
    issues = validate(config)
    outdir = os.environ.get(ENV_OUTPUT_DIR) or config.output_dir
    manifest = {
        "artifact": "waveschwarz",
        "version": __version__,
        "experiment": config.experiment,
        "parameters": config.parameters,
        "seed": config.seed,
        "tolerances": default_tolerances(),
        "outputs": [],
        "results": {},
        "status": "ok",
    }
    if issues:
        for msg in issues:
            print(f"config error: {msg}", file=sys.stderr)
        return 1
    os.makedirs(outdir, exist_ok=True)
    results = {}
    try:
        outputs = _RUNNERS[config.experiment](config, outdir, results)
    except Exception as exc:  # runtime failure: record and signal
        manifest["status"] = f"error: {exc}"
        with open(os.path.join(outdir, "manifest.json"), "w") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
        print(f"experiment failed: {exc}", file=sys.stderr)
        return 2
    manifest["outputs"] = outputs + ["manifest.json"]
    manifest["results"] = results
    with open(os.path.join(outdir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="waveschwarz",
        description="Schwarz wave-guide scalability experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_val = sub.add_parser("validate", help="validate a config without running")
    p_val.add_argument("config")
    sub.add_parser("list-experiments", help="list available experiments")
    args = parser.parse_args(argv)

    if args.command == "list-experiments":
        for name in sorted(EXPERIMENTS):
            required, optional = EXPERIMENTS[name]
            opt = f" [optional: {', '.join(sorted(optional | _COMMON_OPTIONAL))}]"
            print(f"{name}: requires {', '.join(sorted(required))}{opt}")
        return 0

    try:
        config = parse_config(args.config)
    except (OSError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        issues = validate(config)
        for msg in issues:
            print(msg)
        return 1 if issues else 0

    return run(config)


if __name__ == "__main__":
    sys.exit(main())
