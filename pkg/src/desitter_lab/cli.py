"""Batch command line front end.

Commands: verify, geodesic, constrained, komar-mass, det-map, algebra-report.
Exit codes: 0 success, 1 a check failed, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import algebra, charts, checks, desitter, dynamics, komar

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


# key -> (type, default)
DEFAULTS = {
    "seed": (int, 0),
    "ell": (float, 1.0),
    "m": (float, 1.0),
    "radius": (float, 10.0),
    "grid": (int, 64),
    "stokes_n": (int, 32),
    "strict_literal": (bool, False),
    "timings": (bool, False),
    "threads": (int, None),
    "chart": (str, "desitter-conformal"),
    "interior": (bool, False),
    "x0": (str, "0,0,0,0"),
    "u0": (str, "1,0,0,0"),
    "h": (float, 1e-3),
    "s_max": (float, 2.0),
    "log_every": (int, 1),
    "normalize": (bool, True),
    "t_min": (float, -3.0),
    "t_max": (float, 3.0),
    "x_min": (float, -3.0),
    "x_max": (float, 3.0),
    "n": (int, 121),
    "out": (str, None),
    "out_dir": (str, "."),
}
POSITIVE = {"ell", "m", "radius", "grid", "stokes_n", "h", "s_max", "log_every", "n", "threads"}
TOLERANCE_PREFIX = "tolerance."


def _convert(key: str, kind, raw):
    if raw is None or not isinstance(raw, str):
        return raw
    try:
        if kind is bool:
            low = raw.strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(raw)
            return low in ("1", "true", "yes", "on")
        return kind(raw.strip())
    except ValueError as err:
        raise ConfigError(f"bad value for {key}: {raw!r}") from err


def read_config_file(path: str | None) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[run]\n" + p.read_text())
    except configparser.Error as err:
        raise ConfigError(f"cannot parse {path}: {err}") from err
    out = {}
    for key, raw in parser["run"].items():
        k = key.strip()
        if k.startswith(TOLERANCE_PREFIX):
            out[k] = _convert(k, float, raw)
            continue
        k = k.replace("-", "_")
        if k in DEFAULTS:
            out[k] = _convert(k, DEFAULTS[k][0], raw)
        else:
            raise ConfigError(f"unknown config key: {key}")
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and command line (highest precedence)."""
    cfg = {k: v for k, (_, v) in DEFAULTS.items()}
    cfg.update(read_config_file(getattr(args, "config", None)))
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    for k in POSITIVE:
        if cfg.get(k) is not None and cfg[k] <= 0:
            raise ConfigError(f"{k} must be positive, got {cfg[k]}")
    for k, v in cfg.items():
        if k.startswith(TOLERANCE_PREFIX) and not v >= 0:
            raise ConfigError(f"{k} must be non-negative")
    return cfg


def _vector(key: str, text: str) -> np.ndarray:
    try:
        vals = np.array([float(v) for v in text.split(",")], dtype=np.float64)
    except ValueError as err:
        raise ConfigError(f"{key} must be four comma-separated numbers") from err
    if vals.shape != (4,) or not np.all(np.isfinite(vals)):
        raise ConfigError(f"{key} must be four comma-separated numbers")
    return vals


def _emit(lines, out: str | None):
    text = "".join(line + "\n" for line in lines)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


# ---------------------------------------------------------------- verify

def run_verify(args) -> int:
    cfg = resolve(args)
    suites = list(checks.SUITES) if args.all or not args.suite else []
    for s in args.suite or []:
        if s not in checks.SUITES:
            raise ConfigError(f"unknown suite {s!r}; choose from {', '.join(checks.SUITES)}")
        if s not in suites:
            suites.append(s)
    threads = cfg["threads"] or checks.thread_cap()
    settings = checks.RunSettings(seed=cfg["seed"], ell=cfg["ell"], m=cfg["m"], radius=cfg["radius"], grid=cfg["grid"],
                                  stokes_n=cfg["stokes_n"], strict=cfg["strict_literal"], timings=cfg["timings"],
                                  threads=threads)
    overrides = {k[len(TOLERANCE_PREFIX):]: v for k, v in cfg.items() if k.startswith(TOLERANCE_PREFIX)}
    known = {c.name for s in suites for c in checks.SUITE_BUILDERS[s]()}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"tolerance override for unknown check(s): {', '.join(sorted(unknown))}")
    reports = checks.run_suites(suites, settings, overrides)
    order = {s: i for i, s in enumerate(checks.SUITES)}
    reports.sort(key=lambda r: (order[r.suite], r.name))
    _emit([_dumps(r.to_json_dict()) for r in reports], cfg["out"])
    return EXIT_FAIL if any(r.status == "fail" for r in reports) else EXIT_OK


# ---------------------------------------------------------------- trajectories

def _chart(cfg) -> charts.Chart:
    name = cfg["chart"]
    if name == "desitter-conformal":
        return desitter.desitter_chart(cfg["ell"], interior=cfg["interior"])
    if name == "schwarzschild":
        return charts.schwarzschild_chart(cfg["m"])
    if name == "minkowski":
        return charts.minkowski_chart()
    raise ConfigError(f"unknown chart {name!r}; choose from {', '.join(charts.CHART_NAMES)}")


def _summary(tr: dynamics.Trajectory, path: Path) -> dict:
    out = {"kind": tr.kind, "csv": str(path), "steps": len(tr.s) - 1, "s_end": float(tr.s[-1]),
           "norm_drift": tr.norm_drift(), "status": "ok" if tr.completed else "warn"}
    if tr.charges is not None:
        out["charge_drift"] = [float(v) for v in tr.charge_drift()]
    if not tr.completed:
        out["exit_point"] = [float(v) for v in tr.exit_point]
    if tr.separation is not None:
        out["final_separation"] = float(tr.separation[-1])
    if "max_condition" in tr.notes:
        out["max_condition"] = float(tr.notes["max_condition"])
    return out


def _write_separation(tr: dynamics.Trajectory, path: Path):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "separation"])
        for s, d in zip(tr.s, tr.separation):
            w.writerow([repr(float(s)), repr(float(d))])


def run_trajectories(args, constrained_only: bool = False) -> int:
    cfg = resolve(args)
    chart = _chart(cfg)
    state = dynamics.CurveState(0.0, _vector("x0", cfg["x0"]), _vector("u0", cfg["u0"]))
    try:
        chart.check(state.x)
        icfg = dynamics.IntegratorConfig(h=cfg["h"], s_max=cfg["s_max"], log_every=cfg["log_every"])
    except ValueError as err:
        raise ConfigError(str(err)) from err
    if np.any(dynamics.metric_norm(chart, state.x, state.u) <= 0):
        raise ConfigError("u0 must be timelike")
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    summaries = []
    if not constrained_only:
        geo = dynamics.geodesic_integrate(chart, state, icfg, normalize=cfg["normalize"])
        path = out_dir / "geodesic.csv"
        geo.to_csv(path)
        summaries.append(_summary(geo, path))
    if constrained_only or getattr(args, "compare_constrained", False):
        try:
            con = dynamics.constrained_curve_integrate(chart, state, icfg, normalize=cfg["normalize"])
        except (ValueError, dynamics.IntegrationError) as err:
            raise ConfigError(str(err)) from err
        path = out_dir / "constrained.csv"
        con.to_csv(path)
        sep_path = out_dir / "separation.csv"
        _write_separation(con, sep_path)
        rec = _summary(con, path)
        rec["separation_csv"] = str(sep_path)
        summaries.append(rec)
    _emit([_dumps(s) for s in summaries], cfg["out"])
    return EXIT_OK


# ---------------------------------------------------------------- komar-mass

def run_komar_mass(args) -> int:
    cfg = resolve(args)
    if cfg["radius"] <= 2 * cfg["m"]:
        raise ConfigError("radius must lie outside the horizon r = 2m")
    model = checks.schwarzschild_model(cfg["m"])
    quad = komar.QuadratureSpec(radius=cfg["radius"], n_theta=cfg["grid"], n_phi=cfg["grid"])
    try:
        res = komar.komar_surface_energy(model, quad)
    except komar.QuadratureError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAIL
    rec = res.to_record()
    rec["reduction_ratio"] = res.reduction_ratio
    _emit([_dumps(rec)], cfg["out"])
    return EXIT_OK


# ---------------------------------------------------------------- det-map

def run_det_map(args) -> int:
    cfg = resolve(args)
    if not (cfg["t_min"] < cfg["t_max"] and cfg["x_min"] < cfg["x_max"]) or cfg["n"] < 2:
        raise ConfigError("empty grid bounds")
    ell = cfg["ell"]
    t = np.linspace(cfg["t_min"], cfg["t_max"], cfg["n"])
    x = np.linspace(cfg["x_min"], cfg["x_max"], cfg["n"])
    T, X = np.meshgrid(t, x, indexing="ij")
    pts = np.stack([T, X, np.zeros_like(T), np.zeros_like(T)], axis=-1)
    det = desitter.killing_det_numeric(ell, pts)
    # the reduced closed form is stated for ℓ = 1 only
    listed = desitter.killing_det_reduced(ell, T, X) if ell == 1.0 else np.full_like(T, np.nan)
    derived = desitter.killing_det_reduced_derived(ell, T, X)
    rows = [["t", "x1", "det", "closed_form", "closed_form_derived"]]
    rows += [[repr(float(v)) for v in r] for r in zip(T.ravel(), X.ravel(), det.ravel(), listed.ravel(), derived.ravel())]
    _emit([",".join(r) for r in rows], cfg["out"])
    return EXIT_OK


# ---------------------------------------------------------------- algebra-report

def algebra_report(ell=1) -> dict:
    from fractions import Fraction

    ell = Fraction(ell).limit_denominator(10**6)
    gens = algebra.build_generators()
    table = [{"pair": r.name, "computed": r.computed_terms(), "listed": r.expected_terms(),
              "exact_match": r.exact_match} for r in algebra.commutator_table(gens)]
    scaled = [{"pair": r.name, "exact_match": r.exact_match} for r in algebra.scaled_commutator_table(gens, ell)]
    casimirs = {}
    for rep in ("vector", "adjoint"):
        c = algebra.casimir_check(ell, representation=rep)
        casimirs[rep] = {"I1_central": c.I1_central, "I2_central": c.I2_central, "I2_nonzero": c.I2_nonzero,
                         "I1_scaling": c.I1_scaling, "I1_split_equal": c.I1_split_equal,
                         "I1_split_equal_negated_translation_term": c.I1_split_equal_negated_pi,
                         "W4_formal_ratio": str(c.W4_formal_ratio), "W4_matrix_equal": c.W4_matrix_equal,
                         "I1_eigenvalues": c.I1_eigenvalues, "I2_eigenvalues": c.I2_eigenvalues}
    con = algebra.contraction_scaling((1, 10, 100), gens)
    return {
        "ell": str(ell),
        "commutators": table,
        "mismatches": sum(not r["exact_match"] for r in table),
        "jacobi_defects_listed": len(algebra.jacobi_defects(algebra.literal_bracket)),
        "jacobi_defects_computed": len(algebra.jacobi_defects(algebra.computed_rule)),
        "scaled_commutators": scaled,
        "casimirs": casimirs,
        "contraction": {"ells": [str(v) for v in con.ells], "norms": [str(v) for v in con.norms],
                        "ratios": [str(v) for v in con.ratios], "norm_law": con.norm_law, "ratio_law": con.ratio_law,
                        "lorentz_invariant": con.lorentz_invariant},
    }


def run_algebra_report(args) -> int:
    cfg = resolve(args)
    _emit([json.dumps(algebra_report(cfg["ell"]), sort_keys=True, indent=2, default=_json_default)], cfg["out"])
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _common(p: argparse.ArgumentParser, *keys):
    p.add_argument("--config", help="flat key = value file (command line wins)")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--ell", type=float, help="de Sitter length")
    for k in keys:
        kind, _ = DEFAULTS[k]
        flag = "--" + k.replace("_", "-")
        if kind is bool:
            p.add_argument(flag, dest=k, action="store_const", const=True)
        else:
            p.add_argument(flag, dest=k, type=kind)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="desitter-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run check suites and emit JSON lines")
    v.add_argument("--suite", action="append", help=f"one of {', '.join(checks.SUITES)}; repeatable")
    v.add_argument("--all", action="store_true", help="run every suite")
    _common(v, "seed", "m", "radius", "grid", "stokes_n", "timings", "threads")
    v.add_argument("--strict-literal", dest="strict_literal", action="store_const", const=True,
                   help="literal-form mismatches fail instead of warn")
    v.set_defaults(func=run_verify)

    for name, func in (("geodesic", run_trajectories), ("constrained", lambda a: run_trajectories(a, True))):
        g = sub.add_parser(name, help=f"integrate a {name} curve and write CSV")
        _common(g, "chart", "m", "x0", "u0", "h", "s_max", "log_every", "out_dir")
        g.add_argument("--interior", action="store_const", const=True)
        g.add_argument("--no-normalize", dest="normalize", action="store_const", const=False)
        if name == "geodesic":
            g.add_argument("--compare-constrained", action="store_true",
                           help="also integrate the constrained curve and its separation")
        g.set_defaults(func=func)

    k = sub.add_parser("komar-mass", help="surface Komar energy as a JSON record")
    k.add_argument("--metric", choices=("schwarzschild",), default="schwarzschild")
    _common(k, "m", "radius", "grid")
    k.set_defaults(func=run_komar_mass)

    d = sub.add_parser("det-map", help="CSV grid of det of the Killing translation matrix")
    _common(d, "t_min", "t_max", "x_min", "x_max", "n")
    d.set_defaults(func=run_det_map)

    a = sub.add_parser("algebra-report", help="commutator table and Casimir results as JSON")
    _common(a)
    a.set_defaults(func=run_algebra_report)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors are configuration errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
