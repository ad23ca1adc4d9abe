"""Command line interface.

Subcommands:

* classify   vertex and edge classification of a geometry file
* coeffs     per-vertex corner coefficients and the global expansion numbers
* expand     evaluate the expansion at given times
* validate   compare the expansion against an independent oracle
* identities residual grids for the internal coefficient identities
* isoflow    complement consistency check (region vs outer-minus-region)

Geometry files are JSON objects with "outer" and "inner" vertex lists and an
optional "eps" tolerance. All numeric output is printed with 17 significant
digits so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .corners import (
    DEFAULT_QUAD,
    coeff_a,
    coeff_b,
    coeff_c,
    coeff_k,
    cot_identity_residual,
)
from .expansion import (
    eval_expansion,
    expansion_coefficients,
    isoflow_check,
)
from .geometry import build_domain_pair, classify_vertices
from .oracles import (
    McSpec,
    SpectralSpec,
    rbm_heat_content,
    spectral_heat_content,
)


class ConfigError(Exception):
    """Bad command line arguments or geometry file."""


@dataclass
class RunConfig:
    command: str
    geometry: str | None = None
    t_values: tuple = ()
    oracle: str = "spectral"
    modes: int = 400
    paths: int = 20000
    steps: int = 200
    seed: int = 0
    out: str | None = None
    fmt: str = "json"
    tol: float | None = None
    allow_generalized: bool = False
    grid: int = 12


# ---------------------------------------------------------------------------
# deterministic serialization


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def _ser(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [
            f'{pad}  {json.dumps(str(k))}: {_ser(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            return "[]"
        flat = all(isinstance(v, (int, float, np.integer, np.floating)) for v in items)
        if flat:
            return "[" + ", ".join(_ser(v) for v in items) + "]"
        rows = [f"{pad}  {_ser(v, indent + 1)}" for v in items]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(payload, rows, columns, config: RunConfig) -> None:
    """Write JSON (payload) or CSV (rows under columns) to --out or stdout."""
    if config.fmt == "csv":
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(
                _fmt(float(row[c])) if isinstance(row[c], (float, np.floating))
                else str(row[c])
                for c in columns
            ))
        text = "\n".join(lines) + "\n"
    else:
        text = _ser(payload) + "\n"
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# geometry files


def load_geometry(path: str):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read geometry file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"geometry file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "outer" not in doc or "inner" not in doc:
        raise ConfigError('geometry file needs "outer" and "inner" vertex lists')
    for key in ("outer", "inner"):
        pts = doc[key]
        if (
            not isinstance(pts, list)
            or len(pts) < 3
            or not all(isinstance(p, (list, tuple)) and len(p) == 2 for p in pts)
        ):
            raise ConfigError(f'"{key}" must be a list of [x, y] pairs')
    eps = doc.get("eps")
    if eps is not None and not (isinstance(eps, (int, float)) and eps > 0):
        raise ConfigError('"eps" must be a positive number')
    return doc["outer"], doc["inner"], eps


def _pair_from(config: RunConfig):
    if not config.geometry:
        raise ConfigError("this subcommand needs --geometry")
    outer, inner, eps = load_geometry(config.geometry)
    return build_domain_pair(outer, inner, eps=eps)


# ---------------------------------------------------------------------------
# subcommands


def _run_classify(config: RunConfig) -> int:
    pair = _pair_from(config)
    classified = classify_vertices(pair, config.allow_generalized)
    vertices = []
    for cv in classified:
        vertices.append({
            "index": cv.index,
            "x": cv.location.x,
            "y": cv.location.y,
            "kind": cv.kind.value,
            "on_boundary": cv.on_boundary,
            "sigma": cv.sigma,
            "gamma": cv.gamma,
            "beta": cv.beta,
            "alpha": cv.alpha,
            "orientation": cv.orientation.value if cv.orientation else None,
            "open_rays": cv.open_rays,
            "wedges": [[lo, hi] for lo, hi in cv.wedges],
        })
    edges = [
        {
            "ax": e.a.x, "ay": e.a.y, "bx": e.b.x, "by": e.b.y,
            "kind": e.kind.value, "length": e.length,
        }
        for e in pair.edges
    ]
    payload = {"eps": pair.eps, "vertices": vertices, "edges": edges}
    cols = ["index", "x", "y", "kind", "on_boundary", "open_rays"]
    _emit(payload, vertices, cols, config)
    return 0


def _run_coeffs(config: RunConfig) -> int:
    pair = _pair_from(config)
    co = expansion_coefficients(pair, allow_generalized=config.allow_generalized)
    rows = [
        {
            "kind": vt.kind,
            "x": vt.location.x,
            "y": vt.location.y,
            "angles": ";".join(_fmt(a) for a in vt.angles if a is not None),
            "value": vt.value,
            "err": vt.err,
        }
        for vt in co.per_vertex
    ]
    payload = {
        "c0": co.c0,
        "c_half": co.c_half,
        "c1": co.c1,
        "c1_err": co.c1_err,
        "per_vertex": [
            {
                "kind": vt.kind,
                "x": vt.location.x,
                "y": vt.location.y,
                "angles": [a for a in vt.angles if a is not None],
                "value": vt.value,
                "err": vt.err,
            }
            for vt in co.per_vertex
        ],
    }
    _emit(payload, rows, ["kind", "x", "y", "angles", "value", "err"], config)
    return 0


def _run_expand(config: RunConfig) -> int:
    if not config.t_values:
        raise ConfigError("expand needs --t with at least one time")
    pair = _pair_from(config)
    co = expansion_coefficients(pair, allow_generalized=config.allow_generalized)
    rows = [{"t": t, "value": eval_expansion(co, t)} for t in config.t_values]
    payload = {
        "c0": co.c0,
        "c_half": co.c_half,
        "c1": co.c1,
        "c1_err": co.c1_err,
        "rows": rows,
    }
    _emit(payload, rows, ["t", "value"], config)
    return 0


def _run_validate(config: RunConfig) -> int:
    if not config.t_values:
        raise ConfigError("validate needs --t with at least one time")
    pair = _pair_from(config)
    co = expansion_coefficients(pair, allow_generalized=config.allow_generalized)

    rows = []
    for t in sorted(config.t_values):
        model = eval_expansion(co, t)
        if config.oracle == "spectral":
            res = spectral_heat_content(
                pair.outer, pair.inner, t, SpectralSpec(max_mode=config.modes))
        elif config.oracle == "mc":
            res = rbm_heat_content(
                pair, t,
                McSpec(n_paths=config.paths, n_steps=config.steps, seed=config.seed))
        else:
            raise ConfigError(f"unknown oracle {config.oracle!r}")
        rows.append({
            "t": t,
            "expansion": model,
            "oracle": res.value,
            "oracle_err": res.err,
            "residual": res.value - model,
            "residual_over_t": (res.value - model) / t,
        })

    if config.oracle == "mc":
        tol = 0.0 if config.tol is None else config.tol
        passed = all(
            abs(r["residual"]) <= 3.0 * r["oracle_err"] + tol for r in rows
        )
        criterion = "abs(residual) <= 3*err + tol at every t"
    else:
        tol = 1e-2 if config.tol is None else config.tol
        ratios = [abs(r["residual_over_t"]) for r in rows]
        passed = ratios[0] <= tol and all(
            ratios[i] <= ratios[i + 1] + tol for i in range(len(ratios) - 1)
        )
        criterion = (
            "abs(residual)/t <= tol at the smallest t and nondecreasing in t "
            "within tol"
        )
    payload = {
        "oracle": config.oracle,
        "criterion": criterion,
        "tol": tol,
        "pass": passed,
        "rows": rows,
    }
    _emit(payload, rows,
          ["t", "expansion", "oracle", "residual", "residual_over_t"], config)
    return 0 if passed else 1


def _run_identities(config: RunConfig) -> int:
    n = config.grid
    if n < 2:
        raise ConfigError("--grid must be at least 2")
    tol = 1e-8 if config.tol is None else config.tol

    # doubled opening against a reflecting wall
    r_double = 0.0
    for i in range(1, n):
        for j in range(1, n):
            g = math.pi * i / n
            b = (math.pi - g) * j / n
            if g + b >= math.pi - 1e-9 or b <= 1e-9:
                continue
            lhs = coeff_c(2.0 * g, b, b).value
            rhs = 2.0 * coeff_b(g, b).value
            r_double = max(r_double, abs(lhs - rhs))

    # straight reflecting wall seen as a flat corner
    r_flat = 0.0
    for i in range(1, n):
        g = math.pi * i / n
        if abs(g - math.pi) < 1e-9:
            continue
        lhs = coeff_b(g, math.pi - g).value
        rhs = 0.5 * coeff_a(2.0 * g).value
        r_flat = max(r_flat, abs(lhs - rhs))

    # triangle closure: angles summing to a straight opening
    r_tri1 = 0.0
    r_tri2 = 0.0
    for i in range(1, n):
        for j in range(1, n):
            a_ang = math.pi * i / (3 * n)
            b_ang = a_ang + (math.pi - 2 * a_ang) * j / (2 * n)
            g_ang = math.pi - a_ang - b_ang
            if min(a_ang, b_ang, g_ang) <= 1e-9 or a_ang > b_ang:
                continue
            two_c = 2.0 * coeff_c(g_ang, b_ang, a_ang).value
            alt1 = 2.0 * coeff_a(g_ang).value + 2.0 * coeff_k(
                2.0 * a_ang, g_ang, g_ang).value
            alt2 = (
                coeff_a(2.0 * a_ang).value
                + coeff_a(2.0 * b_ang).value
                + 2.0 * coeff_k(g_ang, 2.0 * a_ang, 2.0 * b_ang).value
            )
            r_tri1 = max(r_tri1, abs(two_c - alt1))
            r_tri2 = max(r_tri2, abs(two_c - alt2))

    # closed cotangent form of the straight-wall integral
    r_cot = 0.0
    for i in range(n + 1):
        z = -0.99 * math.pi + 1.98 * math.pi * i / n
        r_cot = max(r_cot, abs(cot_identity_residual(z)))

    rows = [
        {"identity": "doubled_opening", "max_residual": r_double},
        {"identity": "flat_corner", "max_residual": r_flat},
        {"identity": "triangle_closure_a", "max_residual": r_tri1},
        {"identity": "triangle_closure_b", "max_residual": r_tri2},
        {"identity": "cotangent_integral", "max_residual": r_cot},
    ]
    passed = all(r["max_residual"] < tol for r in rows)
    payload = {"grid": n, "tol": tol, "pass": passed, "rows": rows}
    _emit(payload, rows, ["identity", "max_residual"], config)
    return 0 if passed else 1


def _run_isoflow(config: RunConfig) -> int:
    pair = _pair_from(config)
    tol = 1e-8 if config.tol is None else config.tol
    rep = isoflow_check(pair, tol=tol)
    payload = {
        "pass": rep.ok,
        "tol": tol,
        "c_half_diff": rep.c_half_diff,
        "c1_diff": rep.c1_diff,
        "area_closure": rep.area_closure,
        "region": {
            "c0": rep.coeffs.c0,
            "c_half": rep.coeffs.c_half,
            "c1": rep.coeffs.c1,
        },
        "complement": {
            "c0": rep.complement_coeffs.c0,
            "c_half": rep.complement_coeffs.c_half,
            "c1": rep.complement_coeffs.c1,
        },
    }
    rows = [{
        "c_half_diff": rep.c_half_diff,
        "c1_diff": rep.c1_diff,
        "area_closure": rep.area_closure,
        "pass": rep.ok,
    }]
    _emit(payload, rows, ["c_half_diff", "c1_diff", "area_closure", "pass"], config)
    return 0 if rep.ok else 1


_RUNNERS = {
    "classify": _run_classify,
    "coeffs": _run_coeffs,
    "expand": _run_expand,
    "validate": _run_validate,
    "identities": _run_identities,
    "isoflow": _run_isoflow,
}


def run(config: RunConfig) -> int:
    runner = _RUNNERS.get(config.command)
    if runner is None:
        raise ConfigError(f"unknown command {config.command!r}")
    return runner(config)


# ---------------------------------------------------------------------------
# argument parsing


def _parse_times(text: str):
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad --t list: {exc}") from exc
    if not vals or any(v <= 0 for v in vals):
        raise ConfigError("--t needs positive comma-separated times")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyheat",
        description="Small-time heat content expansion for polygons inside "
                    "reflecting polygonal domains.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, geometry=True):
        if geometry:
            p.add_argument("--geometry", required=True,
                           help="JSON file with outer/inner vertex lists")
            p.add_argument("--allow-generalized", action="store_true",
                           help="accept vertices outside the basic catalogue")
        p.add_argument("--out", help="write output to this file instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--tol", type=float, default=None,
                       help="tolerance for pass/fail checks")

    p = sub.add_parser("classify", help="classify vertices and edges")
    add_common(p)

    p = sub.add_parser("coeffs", help="per-vertex corner coefficients")
    add_common(p)

    p = sub.add_parser("expand", help="evaluate the expansion at given times")
    add_common(p)
    p.add_argument("--t", required=True, help="comma-separated times")

    p = sub.add_parser("validate", help="compare expansion against an oracle")
    add_common(p)
    p.add_argument("--t", required=True, help="comma-separated times")
    p.add_argument("--oracle", choices=("spectral", "mc"), default="spectral")
    p.add_argument("--modes", type=int, default=400,
                   help="spectral truncation (per axis)")
    p.add_argument("--paths", type=int, default=20000, help="Monte Carlo paths")
    p.add_argument("--steps", type=int, default=200, help="steps per path")
    p.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")

    p = sub.add_parser("identities", help="coefficient identity residual grids")
    add_common(p, geometry=False)
    p.add_argument("--grid", type=int, default=12, help="grid points per axis")

    p = sub.add_parser("isoflow", help="complement consistency check")
    add_common(p)

    return parser


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(command=args.command)
    cfg.geometry = getattr(args, "geometry", None)
    cfg.allow_generalized = getattr(args, "allow_generalized", False)
    cfg.out = getattr(args, "out", None)
    cfg.fmt = getattr(args, "format", "json")
    cfg.tol = getattr(args, "tol", None)
    cfg.grid = getattr(args, "grid", 12)
    cfg.oracle = getattr(args, "oracle", "spectral")
    cfg.modes = getattr(args, "modes", 400)
    cfg.paths = getattr(args, "paths", 20000)
    cfg.steps = getattr(args, "steps", 200)
    cfg.seed = getattr(args, "seed", 0)
    t_text = getattr(args, "t", None)
    if t_text is not None:
        cfg.t_values = _parse_times(t_text)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(config_from_args(args))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # geometry/classification/numeric failures
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
