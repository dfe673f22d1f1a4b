"""Acceptance checks shared by the test suite and ``lemonbilliard verify``.

Each check returns a ``CheckResult``; ``run`` executes a filtered subset.
Random draws use fixed PCG64 seeds so the suite is reproducible.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import billiard_core as bc
from . import constants as cst
from . import genmap as gm
from . import manifolds as mf
from . import parallel as pl
from . import periodic as pd
from . import portrait as pr
from .geometry import LineState, Table


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _rng(k: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(k))


def _half_trace(t: Table, x, n: int = 3) -> float:
    steps = []
    for _ in range(n):
        s = bc.billiard_step(t, x)
        steps.append(s)
        x = s.end
    return 0.5 * float(np.trace(bc.tangent_product(steps)))


def check_elliptic_trace() -> tuple[bool, str]:
    err = 0.0
    for b in _rng(1).uniform(1.5, 1.618, 50):
        t = Table(float(b))
        err = max(err, abs(pd.f_trace(b) - _half_trace(t, pd.elliptic6_start(t))))
    return err < 1e-9, f"max |f - tr/2| = {err:.2e}"


def check_hyperbolic_trace() -> tuple[bool, str]:
    err = 0.0
    for b in _rng(2).uniform(1.5 + 1e-6, math.sqrt(3.0) - 1e-6, 50):
        t = Table(float(b))
        ht = _half_trace(t, pd.hyperbolic6_start(t))
        err = max(err, abs(1.0 + pd.hyperbolic_trace_excess(b) - ht))
    return err < 1e-9, f"max identity error = {err:.2e}"


def check_b_crit() -> tuple[bool, str]:
    b = pd.find_b_crit()
    grid = np.linspace(1.501, 1.70, 200)
    err = max(abs(pd.trace_ell(x) - pd.f_trace(x)) for x in grid)
    ok = abs(b - 1.63477) < 5e-5 and err < 1e-10
    return ok, f"b_crit = {b:.10f}, max |traceEll - f| = {err:.2e}"


def check_alpha0() -> tuple[bool, str]:
    a = pl.solve_alpha0()
    gap = abs(float(pl.bfrak(a, a)) - pd.find_b_crit())
    ok = abs(a - 0.663742) < 1e-5 and gap < 1e-6
    return ok, f"alpha0 = {a:.10f}, |bfrak - b_crit| = {gap:.2e}"


def _domain_sample(b, rng, n, margin=1e-6):
    """In-domain points whose L and R images keep away from the branched locus.

    L is not differentiable on L_{+-b}, so an image within ~1e-9 of it loses
    about eps / sqrt(margin) on the way back.
    """
    x = rng.uniform(-1, 1, (4 * n, 2))
    dl, dr = x[:, 0], x[:, 1]
    ok = gm.in_domain_xy(b, dl, dr)
    for f in (gm.L_xy, gm.R_xy):
        u, v = f(b, dl, dr)
        ok &= b * b - (v - u) ** 2 > margin
    return dl[ok][:n], dr[ok][:n]


def check_algebra() -> tuple[bool, str]:
    rng = _rng(5)
    err = 0.0
    for b in (1.51, 1.55, 1.6, 1.65, 1.7):
        dl, dr = _domain_sample(b, rng, 10_000)
        x = np.column_stack([dl, dr])
        for f in (gm.L_xy, gm.R_xy):
            y = np.column_stack(f(b, *f(b, dl, dr)))
            err = max(err, np.nanmax(np.abs(y - x)))
            c = np.column_stack(f(b, -dl, -dr)) + np.column_stack(f(b, dl, dr))
            err = max(err, np.nanmax(np.abs(c)))
        irl = np.column_stack(gm.R_xy(b, dr, dl))[:, ::-1]
        err = max(err, np.nanmax(np.abs(irl - np.column_stack(gm.L_xy(b, dl, dr)))))
    return err < 1e-12, f"max algebra defect = {err:.2e}"


def check_points() -> tuple[bool, str]:
    y = gm.apply_L(Table(gm.b_max()), LineState(0.6, 0.6))
    t = Table(1.6)
    v = gm.jacobian(t, gm.GenMapKind.Phi, pd.E0(t)) @ np.array([1.0, 1.0])
    e1 = max(abs(y.d_left + 1.03882), abs(y.d_right - 0.6))
    e2 = max(abs(v[0] - 1.37815), abs(v[1] + 0.408))
    return e1 < 1e-5 and e2 < 1e-5, f"L point err {e1:.1e}, D Phi (1,1) err {e2:.1e}"


def _fd_jac(t, kind, x, h=1e-6):
    m = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        p = gm.apply(t, kind, LineState.of(x.as_array() + e)).as_array()
        q = gm.apply(t, kind, LineState.of(x.as_array() - e)).as_array()
        m[:, j] = (p - q) / (2 * h)
    return m


def check_jacobians() -> tuple[bool, str]:
    err = 0.0
    for b in np.linspace(1.51, 1.70, 20):
        t = Table(float(b))
        for pt, closed in ((pd.E0(t), pd.E0_jacobian_closed(b)), (pd.Q0(t), pd.Q0_jacobian_closed(b))):
            fd = _fd_jac(t, gm.GenMapKind.Psi, pt)
            err = max(err, float(np.max(np.abs(fd - closed)) / np.max(np.abs(closed))))
    return err < 1e-5, f"max relative error = {err:.2e}"


def check_slopes() -> tuple[bool, str]:
    ok = True
    for e in np.linspace(0.53, 0.99, 100):
        b = math.sqrt(2.0 + 1.0 / (4.0 * e * e))
        ed = pd.hyperbolic_eigendata(Table(b))
        ok &= ed["slope_u"] < pd.slope_psi(e) < pd.slope_phi(e) < ed["slope_s"] < 0
    err = 0.0
    for b in (1.52, 1.55, 1.6, 1.66, 1.7):
        t = Table(b)
        ex = pl.endpoint_slopes(t)
        p0 = pd.P0(t).as_array()
        for kind, key in ((pl.CurveKind.Phi, "m_up"), (pl.CurveKind.Psi, "m_down")):
            c = pl.curve_C(t, kind, 20001).points
            # first polyline point off P0, a step of order 1e-4 along the curve
            d = c[1] - p0
            err = max(err, abs(d[1] / d[0] - ex[key]))
    return bool(ok) and err < 1e-4, f"ordering holds: {bool(ok)}, max slope gap {err:.2e}"


def check_focusing() -> tuple[bool, str]:
    pts = pl.sample_T(20)
    a = max(abs(pl.exit_curvature(p, "synthetic")) for p in pts)
    b = max(abs(pl.exit_curvature(p, "traced")) for p in pts)
    ok = len(pts) == 20 and a < 1e-8 and b < 1e-8
    return ok, f"{len(pts)} points, max |1/f3+| synthetic {a:.1e}, traced {b:.1e}"


def check_curve_invariance() -> tuple[bool, str]:
    inv = ends = 0.0
    for b in (1.55, 1.6, 1.66):
        t = Table(b)
        for kind, g in ((pl.CurveKind.Phi, gm.GenMapKind.Phi), (pl.CurveKind.Psi, gm.GenMapKind.Psi)):
            c = pl.curve_C(t, kind, 2001).points
            u, v = gm.apply_xy(b, g, c[:, 0], c[:, 1])
            img = np.column_stack([u, v])
            inv = max(inv, float(pl.nearest_distance(img, c).max()))
            e0 = pd.E0(t).as_array()
            ends = max(ends, np.max(np.abs(c[0] - pd.P0(t).as_array())),
                       np.max(np.abs(c[-1] - pd.Q0(t).as_array())),
                       float(pl.nearest_distance(e0[None, :], c)[0]))
    return inv < 1e-7 and ends < 1e-9, f"invariance {inv:.1e}, endpoints {ends:.1e}"


def _close(found, expected, tol=1e-9):
    if len(found) != len(expected):
        return False
    return all(min(np.linalg.norm(f.as_array() - e.as_array()) for f in found) < tol
               for e in expected)


def check_exhaustive() -> tuple[bool, str]:
    t = Table(1.52)
    z = LineState(0.0, 0.0)
    f1 = pd.exhaustive_theta_fixed_points(t)
    ok1 = _close(f1, [z, pd.E0(t), pd.P0(t), pd.Q0(t)])
    t = Table(1.66)
    # E1 and E0 lie beyond 0.6 at this b, so the square is enlarged
    f2 = pd.exhaustive_theta_fixed_points(t, region=(0.0, 0.85, 0.0, 0.85))
    e1, e2 = pd.bifurcated_points(t)
    ok2 = _close(f2, [z, pd.E0(t), pd.P0(t), pd.Q0(t), e1, e2])
    phi = gm.apply(t, gm.GenMapKind.Phi, e1)
    ok3 = float(np.max(np.abs(phi.as_array() - e2.as_array()))) < 1e-9
    return ok1 and ok2 and ok3, f"b=1.52: {len(f1)} points, b=1.66: {len(f2)} points, Phi(E1)=E2: {ok3}"


def check_manifolds() -> tuple[bool, str]:
    parts = []
    ok = True
    for b in (1.51, 1.54):
        t = Table(b)
        sp = mf.splitting(t)
        half = mf.splitting(t, seed_offset=mf.SEED_OFFSET / 2)
        kw = dict(until_diagonal=True)
        bs = mf.grow_branch(t, mf.Base.P0, mf.BranchKind.Stable, **kw)
        bu = mf.grow_branch(t, mf.Base.Q0, mf.BranchKind.Unstable, n_seed=23, **kw)
        # I maps the unstable branch of Q0 onto the stable branch of P0
        m = bu.polyline.points[:, ::-1]
        m = m[np.linalg.norm(m - pd.P0(t).as_array(), axis=1) < 0.5]
        sym = float(pl.nearest_distance(m[:: max(1, len(m) // 300)], bs.polyline.points).max())
        stab = abs(sp.delta - half.delta)
        ang = sp.angle_defect < 1e-3 if abs(sp.delta) < 1e-8 else True
        ok &= sym < 1e-6 and stab < 1e-7 and ang
        parts.append(f"b={b}: delta {sp.delta:.1e}, sym {sym:.1e}, halving {stab:.1e}, "
                     f"angle defect {sp.angle_defect:.1e}")
    return bool(ok), "; ".join(parts)


def check_fgf() -> tuple[bool, str]:
    m = cst.fgf_min()
    return m > cst.THRESHOLD_FGF, f"grid min {m:.4e} vs threshold {cst.THRESHOLD_FGF:.1e}"


def check_constants() -> tuple[bool, str]:
    b2, b3, bs = cst.b2().value, cst.b3().value, cst.b_sing().value
    bs2 = cst.b_sing_diagonal().value
    ok = (abs(b2 - 1.58885) < 5e-5 and abs(b3 - 1.62326) < 5e-5
          and abs(bs - 1.67892) < 5e-5 and abs(bs2 - 1.67892) < 5e-5)
    return ok, f"b2 {b2:.8f}, b3 {b3:.8f}, b_sing {bs:.8f} / {bs2:.8f}"


def _portrait_bytes(b, n, it, seed):
    from .cli import portrait_csv
    return portrait_csv(pr.phase_portrait(b, n, it, seed)).encode()


def check_phase() -> tuple[bool, str]:
    ok = True
    for b in (1.51, 1.54):
        ok &= _portrait_bytes(b, 20, 500, 0) == _portrait_bytes(b, 20, 500, 0)
    trs = pr.phase_portrait(1.54, 40, 1000, 0)
    c = pr.island_centres(Table(1.54))
    n_isl = sum(pr.island_confined(tr, c) for tr in trs)
    return bool(ok) and n_isl >= 1, f"byte-identical reruns: {bool(ok)}, island trajectories {n_isl}"


CHECKS: list[tuple[str, tuple[str, ...], Callable[[], tuple[bool, str]]]] = [
    ("01 elliptic trace", ("traces",), check_elliptic_trace),
    ("02 hyperbolic trace", ("traces",), check_hyperbolic_trace),
    ("03 b_crit", ("traces", "constants"), check_b_crit),
    ("04 alpha0", ("constants", "parallel"), check_alpha0),
    ("05 map algebra", ("genmap",), check_algebra),
    ("06 point checks", ("genmap",), check_points),
    ("07 jacobian closed forms", ("genmap", "jacobians"), check_jacobians),
    ("08 slope ordering", ("curves", "parallel"), check_slopes),
    ("09 parallel focusing", ("parallel", "focusing"), check_focusing),
    ("10 curve invariance", ("curves", "parallel"), check_curve_invariance),
    ("11 exhaustive period six", ("periodic",), check_exhaustive),
    ("12 manifold suite", ("manifolds",), check_manifolds),
    ("13 FGF residual", ("genmap", "constants"), check_fgf),
    ("14 constants", ("constants",), check_constants),
    ("15 phase portraits", ("phase",), check_phase),
]


def select(name_filter: str | None = None):
    if not name_filter:
        return list(CHECKS)
    f = name_filter.lower()
    return [c for c in CHECKS if f in c[0].lower() or f in c[1]]


def run_check(name: str, fn) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as e:  # a crash is a failed criterion, not a crashed suite
        ok, detail = False, f"{type(e).__name__}: {e}"
    return CheckResult(name, bool(ok), detail, time.perf_counter() - t0)


def run(name_filter: str | None = None) -> list[CheckResult]:
    return [run_check(name, fn) for name, _, fn in select(name_filter)]
