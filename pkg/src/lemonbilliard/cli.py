"""Command-line interface.

Exit codes: 0 success, 1 internal error, 2 usage error, 3 verification failure.
Numbers are written with 17 significant digits; CSV uses LF line endings.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import constants as cst
from . import genmap as gm
from . import manifolds as mf
from . import parallel as pl
from . import periodic as pd
from . import portrait as pr
from .errors import DomainError, LemonError, MissingCrossing
from .geometry import Table

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def to_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def to_json(obj, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits; non-finite floats become null."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_jstr(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        return "[" + ", ".join(to_json(v, indent + 1) for v in obj) + "]"
    if obj is None:
        return "null"
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return "null"
    if isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)):
        return fmt(obj)
    return _jstr(str(obj))


def _jstr(s: str) -> str:
    import json
    return json.dumps(s)


# SVG scatter

SVG_W, SVG_H = 800, 400


def to_svg(xs, ys, xlim, ylim, groups=None) -> str:
    """Fixed-viewBox scatter, no text, one colour per group."""
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SVG_W} {SVG_H}" '
           f'width="{SVG_W}" height="{SVG_H}">',
           f'<rect x="0" y="0" width="{SVG_W}" height="{SVG_H}" fill="white"/>']
    groups = np.zeros(len(xs), dtype=int) if groups is None else np.asarray(groups)
    for x, y, g in zip(xs, ys, groups):
        if not (math.isfinite(x) and math.isfinite(y)):
            continue
        px = (x - xlim[0]) / (xlim[1] - xlim[0]) * SVG_W
        py = SVG_H - (y - ylim[0]) / (ylim[1] - ylim[0]) * SVG_H
        out.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="0.6" '
                   f'fill="{palette[int(g) % len(palette)]}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# command bodies; each returns (text, exit code)

def portrait_csv(trs) -> str:
    rows = []
    for tr in trs:
        for k, p, q in zip(tr.steps, tr.phi, tr.theta):
            rows.append((tr.traj_id, int(k), float(p), float(q), tr.corner_hit))
    return to_csv(["traj_id", "step", "phi", "theta", "corner_hit"], rows)


def _config(args) -> dict:
    keys = ("b", "b_range", "seed", "iterations", "grid", "format", "threads", "filter")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _emit(args, results, residuals, header=None, rows=None, svg=None) -> str:
    if args.format == "json":
        return to_json({"command": args.command, "config": _config(args),
                        "results": results, "residuals": residuals}) + "\n"
    if args.format == "svg":
        if svg is None:
            raise UsageError(f"--format svg is not available for {args.command}")
        return svg()
    return to_csv(header, rows)


def _b(args) -> float:
    if args.b is None:
        raise UsageError("--b is required")
    if not (1.0 < args.b < 2.0):
        raise UsageError("--b must lie in (1, 2)")
    return args.b


def cmd_phase(args) -> str:
    b = _b(args)
    n = args.grid if args.grid is not None else 200
    it = args.iterations if args.iterations is not None else 2000
    if n < 1 or it < 0:
        raise UsageError("--grid must be >= 1 and --iterations >= 0")
    trs = pr.phase_portrait(b, n, it, args.seed)
    if args.format == "csv":
        return portrait_csv(trs)
    pa = Table(b).corner_angle

    def svg():
        xs = np.concatenate([tr.phi for tr in trs])
        ys = np.concatenate([tr.theta for tr in trs])
        g = np.concatenate([np.full(len(tr.phi), tr.traj_id) for tr in trs])
        return to_svg(xs, ys, (-pa, pa), (0.0, math.pi), g)

    res = [{"traj_id": tr.traj_id, "corner_hit": tr.corner_hit,
            "step": tr.steps.tolist(), "phi": tr.phi.tolist(), "theta": tr.theta.tolist()}
           for tr in trs]
    return _emit(args, res, {}, svg=svg)


def cmd_orbit(args) -> str:
    t = Table(_b(args))
    orbits = {"O2": pd.orbit_O2}
    if 1.5 < t.b <= gm.b_max():
        orbits["elliptic6"] = pd.orbit_elliptic6
    if 1.5 < t.b < math.sqrt(3.0):
        orbits["hyperbolic6"] = pd.orbit_hyperbolic6
    rows, res = [], {}
    for name, f in orbits.items():
        o = f(t)
        ang = o.points_angular or []
        res[name] = {"period": o.period, "half_trace": o.multiplier_half_trace,
                     "classification": o.classification.value,
                     "line": [[p.d_left, p.d_right] for p in o.points_line],
                     "angular": [[p.arc.value, p.phi, p.theta] for p in ang]}
        for i, p in enumerate(o.points_line):
            rows.append((name, "line", i, p.d_left, p.d_right, "", o.multiplier_half_trace,
                         o.classification.value))
        for i, p in enumerate(ang):
            rows.append((name, p.arc.value, i, p.phi, p.theta, "", o.multiplier_half_trace,
                         o.classification.value))
    hdr = ["orbit", "chart", "index", "x", "y", "note", "half_trace", "classification"]
    return _emit(args, res, {}, hdr, rows)


def cmd_periodic(args) -> str:
    t = Table(_b(args))
    grid = args.grid if args.grid is not None else 200
    pts = pd.exhaustive_theta_fixed_points(t, region=(0.0, 0.85, 0.0, 0.85), grid=grid)
    rows, res, resid = [], [], []
    for p in pts:
        x = gm.apply(t, gm.GenMapKind.Theta, p)
        r = float(np.max(np.abs(x.as_array() - p.as_array())))
        ht = 0.5 * float(np.trace(gm.jacobian(t, gm.GenMapKind.Theta, p)))
        cl = pd.classify(ht).value
        rows.append((p.d_left, p.d_right, ht, cl, r))
        res.append({"d_left": p.d_left, "d_right": p.d_right, "half_trace": ht, "classification": cl})
        resid.append(r)
    return _emit(args, res, {"fixed_point": resid},
                 ["d_left", "d_right", "half_trace", "classification", "residual"], rows)


def cmd_curves(args) -> str:
    t = Table(_b(args))
    n = args.grid if args.grid is not None else 2001
    curves = {}
    for k in pl.CurveKind:
        try:
            curves[f"C_{k.value}"] = pl.curve_C(t, k, n).points
        except (LemonError, ValueError):
            continue
    for cid in gm.SingularCurveId:
        curves[cid.value] = gm.singular_curve(t, cid, n).points
    for k in (gm.GenMapKind.Phi, gm.GenMapKind.Psi):
        curves[f"Fix_{k.value}"] = gm.fixed_locus(t, k, n).points
    rows = [(name, i, p[0], p[1]) for name, pts in curves.items() for i, p in enumerate(pts)]

    def svg():
        xs = np.concatenate([c[:, 0] for c in curves.values()])
        ys = np.concatenate([c[:, 1] for c in curves.values()])
        g = np.concatenate([np.full(len(c), i) for i, c in enumerate(curves.values())])
        return to_svg(xs, ys, (-1.0, 1.0), (-1.0, 1.0), g)

    res = {k: v.tolist() for k, v in curves.items()}
    return _emit(args, res, {}, ["curve", "index", "d_left", "d_right"], rows, svg)


def cmd_manifold(args) -> str:
    t = Table(_b(args))
    branches = []
    for base in mf.Base:
        for kind in mf.BranchKind:
            branches.append(mf.grow_branch(t, base, kind, until_diagonal=True))
    rows, res = [], {}
    for br in branches:
        name = br.polyline.name
        pts, sig = br.polyline.points, br.polyline.param
        res[name] = {"status": br.status, "steps": br.growth_steps, "sigma": sig.tolist(),
                     "points": pts.tolist()}
        rows += [(name, i, s, p[0], p[1]) for i, (s, p) in enumerate(zip(sig, pts))]

    def svg():
        xs = np.concatenate([br.polyline.points[:, 0] for br in branches])
        ys = np.concatenate([br.polyline.points[:, 1] for br in branches])
        g = np.concatenate([np.full(len(br.polyline), i) for i, br in enumerate(branches)])
        return to_svg(xs, ys, (-0.1, 1.0), (-0.1, 1.0), g)

    return _emit(args, res, {}, ["branch", "index", "sigma", "d_left", "d_right"], rows, svg)


def _b_values(args) -> list[float]:
    if args.b_range is None:
        return [_b(args)]
    start, end, steps = args.b_range
    steps = int(steps)
    if steps < 1:
        raise UsageError("STEPS must be >= 1")
    if not (1.0 < start < 2.0 and 1.0 < end < 2.0):
        raise UsageError("--b-range must lie in (1, 2)")
    return [float(v) for v in np.linspace(start, end, steps)]


def _sweep_one(b: float) -> tuple:
    try:
        sp = mf.splitting(Table(b))
        return (b, sp.delta, sp.angle_s, sp.angle_u, "ok")
    except (MissingCrossing, LemonError, ValueError):
        return (b, float("nan"), float("nan"), float("nan"), "failed")


def cmd_sweep(args) -> str:
    bs = _b_values(args)
    if not all(1.5 < b < gm.b_max() for b in bs):
        raise UsageError("splitting sweeps need b in (1.5, 1 + 2^-1/2)")
    threads = args.threads or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=threads) as ex:
        rows = list(ex.map(_sweep_one, bs))  # map keeps input order
    res = [dict(zip(("b", "delta", "angle_s", "angle_u", "status"), r)) for r in rows]
    return _emit(args, res, {}, ["b", "delta", "angle_s", "angle_u", "status"], rows)


def cmd_constants(args) -> str:
    cs = cst.all_constants()
    res = {c.name: c.value for c in cs}
    resid = {c.name: c.residual for c in cs}
    resid["fgf_min"] = cst.fgf_min()
    return _emit(args, res, resid, ["name", "value", "residual"],
                 [(c.name, c.value, c.residual) for c in cs])


def cmd_verify(args) -> tuple[str, int]:
    from .acceptance import run, select
    if not select(args.filter):
        raise UsageError(f"no check matches filter {args.filter!r}")
    results = run(args.filter)
    if args.format == "json":
        text = _emit(args, [{"name": r.name, "passed": r.passed, "detail": r.detail,
                             "seconds": r.seconds} for r in results], {})
    else:
        text = "\n".join(r.line() for r in results) + "\n"
        n = sum(r.passed for r in results)
        text += f"{n}/{len(results)} checks passed\n"
    return text, EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "phase": cmd_phase,
    "orbit": cmd_orbit,
    "periodic": cmd_periodic,
    "curves": cmd_curves,
    "manifold": cmd_manifold,
    "splitting-sweep": cmd_sweep,
    "constants": cmd_constants,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lemonbilliard", description="Lemon billiard numerics.")
    p.add_argument("command", choices=list(COMMANDS))
    p.add_argument("--b", type=float)
    p.add_argument("--b-range", nargs=3, type=float, metavar=("START", "END", "STEPS"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    p.add_argument("--out")
    p.add_argument("--threads", type=int)
    p.add_argument("--filter")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    code = EXIT_OK
    try:
        out = COMMANDS[args.command](args)
        if isinstance(out, tuple):
            out, code = out
    except (UsageError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # anything else is a bug or numerical breakdown
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
