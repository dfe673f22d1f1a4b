"""Three-bounce trajectories whose first and last segments are parallel.

A horizontal ray hits the right arc at P1 = (cos a, sin a), the left arc at
P2, and leaves the right arc at P3 = (cos b, -sin b) horizontally again.
The left centre O_r is then forced; its distance from O_l is bfrak(a, b).
In this frame O_r is generally off the x-axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq, root

from . import genmap as gm
from .billiard_core import ReflectionStep, focus_chain
from .errors import Degenerate, DomainError, MissingCrossing
from .genmap import CurveTrace
from .geometry import Arc, AngularState, LineState, Table
from .periodic import find_b_crit

QUARTER = math.pi / 4


@dataclass(frozen=True)
class AngleParams:
    alpha: float
    beta: float

    def valid(self) -> bool:
        a, b = self.alpha, self.beta
        return a >= 0 and b >= 0 and a + b < math.pi / 2 and (a, b) != (0.0, 0.0)

    def swapped(self) -> "AngleParams":
        return AngleParams(self.beta, self.alpha)


@dataclass
class ParallelOrbit:
    params: AngleParams
    t: float
    s: float
    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    o_right: np.ndarray
    b: float
    d_l1: float
    d_l3: float
    d_r1: float
    d_r3: float


def _check(p: AngleParams):
    if p.alpha == 0.0 and p.beta == 0.0:
        raise Degenerate("(0, 0) is excluded from the construction")
    if not p.valid():
        raise DomainError(f"({p.alpha}, {p.beta}) outside D")


def _frac(a, b):
    return (np.sin(2 * a) * np.sin(b) - np.sin(a) * np.sin(2 * b)) / np.sin(2 * a + 2 * b)


def Y_lr(a, b):
    return _frac(a, b) + np.sin(a - b)


def build_parallel_orbit(p: AngleParams) -> ParallelOrbit:
    _check(p)
    a, b = p.alpha, p.beta
    den = math.sin(2 * a + 2 * b)
    t = (math.sin(a + 2 * b) - math.sin(b)) / den
    s = (math.sin(2 * a + b) - math.sin(a)) / den
    p2 = np.array([math.sin(b) * math.cos(2 * a) + math.sin(a) * math.cos(2 * b),
                   math.sin(2 * a) * math.sin(b) - math.sin(a) * math.sin(2 * b)]) / den
    o_r = p2 + np.array([math.cos(a - b), math.sin(a - b)])
    d_l1, d_l3 = math.sin(a), math.sin(b)
    d_r3 = d_l3 + float(o_r[1])
    d_r1 = d_l1 + d_l3 - d_r3
    return ParallelOrbit(p, t, s,
                         np.array([math.cos(a), math.sin(a)]), p2,
                         np.array([math.cos(b), -math.sin(b)]),
                         o_r, bfrak(a, b), d_l1, d_l3, d_r1, d_r3)


def bfrak_sq(a, b):
    """Squared centre distance of the table carrying the (a, b) orbit; vectorised."""
    sa, sb = np.sin(a), np.sin(b)
    s1 = np.sin(a + b)
    s2 = np.sin(2 * a + 2 * b)
    return 1 + (sa + sb) / s1 + sa * sb / s1**2 + (sa - sb) ** 2 / s2**2


def bfrak(a, b):
    return np.sqrt(bfrak_sq(a, b))


def F_J(a, b):
    return (np.cos(a) + np.cos(b)) * np.cos(a + b) - np.sin(a) * np.sin(b)


def F_T(a, b):
    c = np.cos(a + b)
    return c * c * F_J(a, b) + (1 + c) * (np.sin(a) - np.sin(b)) ** 2


def solve_alpha0() -> float:
    """Diagonal point of the curve J."""
    return brentq(lambda a: 2 * math.cos(a) * math.cos(2 * a) - math.sin(a) ** 2,
                  0.5, 0.75, xtol=1e-15)


def dr_gap(a, b):
    """d_r1 - d_r3; zero on the locus where both right-centre distances agree."""
    d_r3 = np.sin(b) + Y_lr(a, b)
    return np.sin(a) + np.sin(b) - 2 * d_r3


def dr_equal_diagonal() -> float:
    """Diagonal crossing of the d_r1 = d_r3 locus."""
    g = lambda a: math.sin(a) ** 2 - math.cos(2 * a) * math.cos(a) * (2 - math.cos(a))
    return brentq(g, 0.4, 0.75, xtol=1e-15)


# focusing of a parallel beam

def _unit(v):
    return v / np.linalg.norm(v)


def synthetic_steps(p: AngleParams) -> list[ReflectionStep]:
    """Reflection data read directly off the construction (no table needed)."""
    o = build_parallel_orbit(p)
    a, b = p.alpha, p.beta
    dummy = AngularState(Arc.RIGHT, 0.0, math.pi / 2)
    d1, d2, d3 = math.cos(a), math.cos(a + b), math.cos(b)
    return [ReflectionStep(dummy, dummy, o.t, d1, d2),
            ReflectionStep(dummy, dummy, o.s, d2, d3)]


def _hit_circle(p, v, c, far):
    w = p - c
    B = float(np.dot(v, w))
    C = float(np.dot(w, w)) - 1.0
    disc = B * B - C
    if disc < 0:
        raise DomainError("ray misses the circle")
    r = math.sqrt(disc)
    return -B + r if far else -B - r


def traced_steps(p: AngleParams) -> list[ReflectionStep]:
    """The same orbit ray-traced on the two full circles.

    Reflection points of orbits on T can lie beyond the corners of the
    lemon, so this route does not use the arc-restricted billiard map.
    """
    o = build_parallel_orbit(p)
    centres = [np.zeros(2), o.o_right, np.zeros(2)]
    v = np.array([1.0, 0.0])
    x = o.p1
    pts, ds = [x], []
    for k in range(3):
        n = _unit(x - centres[k])
        ds.append(abs(float(np.dot(v, n))))
        v = v - 2.0 * float(np.dot(v, n)) * n
        if k < 2:
            s = _hit_circle(x, v, centres[k + 1], far=True)
            x = x + s * v
            pts.append(x)
    dummy = AngularState(Arc.RIGHT, 0.0, math.pi / 2)
    L1 = float(np.linalg.norm(pts[1] - pts[0]))
    L2 = float(np.linalg.norm(pts[2] - pts[1]))
    return [ReflectionStep(dummy, dummy, L1, ds[0], ds[1]),
            ReflectionStep(dummy, dummy, L2, ds[1], ds[2])]


def exit_curvature(p: AngleParams, route: str = "synthetic") -> float:
    """1/f+ after the third reflection of a parallel incoming beam."""
    steps = synthetic_steps(p) if route == "synthetic" else traced_steps(p)
    return focus_chain(steps, 0.0)[-1]


def sample_T(n: int) -> list[AngleParams]:
    """Points of the curve T = {F_T = 0}, cut transversally to the diagonal."""
    a0 = solve_alpha0()
    out = []
    for m in np.linspace(a0, QUARTER, n + 2)[1:-1]:
        us = np.linspace(1e-9, m - 1e-9, 2001)
        vals = F_T(m + us, m - us)
        idx = np.where(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        if len(idx) == 0:
            continue
        i = idx[0]
        u = brentq(lambda u: F_T(m + u, m - u), us[i], us[i + 1], xtol=1e-15)
        out.append(AngleParams(m + u, m - u))
    return out


def sample_J(n: int) -> list[AngleParams]:
    """Points of J off the diagonal, lower wedge alpha > beta."""
    out = []
    for bt in np.linspace(0.02, solve_alpha0() - 0.02, n):
        g = lambda a: F_J(a, bt)
        try:
            a = brentq(g, bt + 1e-9, math.pi / 2 - bt - 1e-9, xtol=1e-15)
        except ValueError:
            continue
        out.append(AngleParams(a, bt))
    return out


# level curves of bfrak

def _grad(a, b, h=1e-7):
    ga = (bfrak_sq(a + h, b) - bfrak_sq(a - h, b)) / (2 * h)
    gb = (bfrak_sq(a, b + h) - bfrak_sq(a, b - h)) / (2 * h)
    return np.array([ga, gb])


def _check_b(b):
    if not (1.5 < b <= gm.b_max() + 1e-12):
        raise DomainError("level curves are traced for 1.5 < b <= b_max")


def level_endpoint(b: float) -> float:
    """beta with bfrak(0, beta) = b."""
    return math.acos(1.0 / (2.0 * math.sqrt(b * b - 2.0)))


def level_diagonal(b: float) -> float:
    return math.acos(min(1.0, 1.0 / (2.0 * (b - 1.0))))


def _trace_upper(b: float, h: float = 1e-3, stop: float = 1e-4) -> np.ndarray:
    # pseudo-arclength from (0, beta_e) until the diagonal
    target = b * b
    x = np.array([0.0, level_endpoint(b)])
    pts = [x.copy()]
    g = _grad(*x)
    tan = np.array([g[1], -g[0]])
    tan = _unit(tan if tan[0] > 0 else -tan)
    sing = np.array([QUARTER, QUARTER])
    for _ in range(200000):
        y = x + h * tan
        for _ in range(20):
            gy = _grad(*y)
            f = bfrak_sq(*y) - target
            # corrector on the hyperplane orthogonal to tan
            m = np.array([gy, tan])
            dy = np.linalg.solve(m, [-f, -np.dot(tan, y - x) + h])
            y = y + dy
            if abs(f) < 1e-13 and np.linalg.norm(dy) < 1e-13:
                break
        if y[0] >= y[1] or np.linalg.norm(y - sing) < stop:
            break
        pts.append(y)
        gy = _grad(*y)
        nt = _unit(np.array([gy[1], -gy[0]]))
        tan = nt if np.dot(nt, tan) > 0 else -nt
        x = y
    d = level_diagonal(b)
    last = np.array([d, d])
    if np.linalg.norm(last - sing) >= stop:
        pts.append(last)
    return np.array(pts)


def trace_level_curve_b(b: float, n: int = 2001, h: float = 1e-3) -> CurveTrace:
    """Level set bfrak = b in D from (0, beta_e) through the diagonal to (alpha_e, 0)."""
    _check_b(b)
    up = _trace_upper(b, h)
    full = np.vstack([up, up[-2::-1, ::-1]]) if up[-1, 0] == up[-1, 1] else np.vstack([up, up[::-1, ::-1]])
    seg = np.linalg.norm(np.diff(full, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if n and n != len(full):
        su = np.linspace(0, s[-1], n)
        pts = np.column_stack([np.interp(su, s, full[:, 0]), np.interp(su, s, full[:, 1])])
        pts = _project(b, pts)
        s = su
    else:
        pts = full
    return CurveTrace(pts, s, f"level b={b}", {"b": b})


def _project(b, q):
    # Newton along the gradient back onto the level set; q has shape (n, 2)
    q = np.array(q, dtype=float)
    for _ in range(10):
        f = bfrak_sq(q[:, 0], q[:, 1]) - b * b
        if np.all(np.abs(f) < 1e-14):
            break
        g = _grad(q[:, 0], q[:, 1]).T
        q = q - (f / np.einsum("ij,ij->i", g, g))[:, None] * g
    return q


# H maps and the parallel curves

def H_up(p: AngleParams) -> LineState:
    a, b = p.alpha, p.beta
    return LineState(float(math.sin(b) - math.sin(b - a) + _frac(a, b)), math.sin(b))


def H_down(p: AngleParams) -> LineState:
    a, b = p.alpha, p.beta
    return LineState(math.sin(a), float(math.sin(a) + math.sin(b - a) - _frac(a, b)))


def H_up_xy(a, b):
    return np.sin(b) - np.sin(b - a) + _frac(a, b), np.sin(b)


def H_down_xy(a, b):
    return np.sin(a), np.sin(a) + np.sin(b - a) - _frac(a, b)


class CurveKind(str, Enum):
    Phi = "Phi"
    Psi = "Psi"
    Prl = "Prl"
    PhiSym = "PhiSym"
    PsiSym = "PsiSym"


def J_crossing(b: float) -> AngleParams:
    """The pair (alpha*, beta*) in the upper wedge with bfrak = b on J; needs b > b_crit."""
    if b <= find_b_crit():
        raise MissingCrossing("level curve meets J only for b > b_crit")
    lv = trace_level_curve_b(b, n=0)
    a, bt = lv.points[:, 0], lv.points[:, 1]
    up = a < bt
    f = F_J(a, bt)
    idx = [i for i in range(len(f) - 1) if up[i] and up[i + 1] and f[i] * f[i + 1] < 0]
    if not idx:
        raise MissingCrossing("no sign change of F_J on the traced level curve")
    x0 = lv.points[idx[0]]
    sol = root(lambda v: [bfrak_sq(*v) - b * b, F_J(*v)], x0, tol=1e-15)
    return AngleParams(float(sol.x[0]), float(sol.x[1]))


def _curve_phi_pts(b, n):
    lv = trace_level_curve_b(b, n)
    return np.column_stack(H_up_xy(lv.points[:, 0], lv.points[:, 1])), lv


def curve_C(t: Table, which: CurveKind, n: int = 2001) -> CurveTrace:
    b = t.b
    _check_b(b)
    which = CurveKind(which)
    if which in (CurveKind.Phi, CurveKind.Psi):
        lv = trace_level_curve_b(b, n)
        f = H_up_xy if which == CurveKind.Phi else H_down_xy
        pts = np.column_stack(f(lv.points[:, 0], lv.points[:, 1]))
        return CurveTrace(pts, lv.param, f"C_{which.value}", {"b": b, "angles": lv.points})
    if which in (CurveKind.PhiSym, CurveKind.PsiSym):
        x = np.linspace(0.0, 1.0, n)
        dl, dr = gm.L_xy(b, -x, (b - 1) * x)
        ok = np.isfinite(dl) & np.isfinite(dr)
        pts = np.column_stack([dl[ok], dr[ok]])
        if which == CurveKind.PsiSym:
            pts = pts[:, ::-1]
        return CurveTrace(pts, x[ok], f"C_{which.value}", {"b": b})
    # Prl: gamma_1..gamma_4
    lv = trace_level_curve_b(b, n)
    ang = lv.points
    if b > find_b_crit():
        js = J_crossing(b)
        cut1 = np.array([js.alpha, js.beta])
    else:
        d = level_diagonal(b)
        cut1 = np.array([d, d])
    cut2 = cut1[::-1]
    # gamma_1: from alpha = 0 up to cut1; gamma_2: from beta = 0 back to cut2
    g1a = np.vstack([ang[ang[:, 0] < cut1[0]], cut1])
    g2a = np.vstack([ang[ang[:, 1] < cut2[1]][::-1], cut2])
    g1 = np.column_stack(H_up_xy(g1a[:, 0], g1a[:, 1]))
    g2 = np.column_stack(H_up_xy(g2a[:, 0], g2a[:, 1]))
    segs = [g1, g2, g1[:, ::-1], g2[:, ::-1]]
    pts = np.vstack(segs)
    return CurveTrace(pts, np.arange(len(pts), dtype=float), "C_Prl",
                      {"b": b, "segments": segs, "cut": cut1})


def endpoint_slopes(t: Table) -> dict:
    """Slopes dd_r/dd_l of C_Phi (m_up) and C_Psi (m_down) at P0."""
    from .periodic import eta_of, slope_phi, slope_psi
    _check_b(t.b)
    e = eta_of(t.b)
    return {"m_up": slope_phi(e), "m_down": slope_psi(e), "eta": e}


def fd_endpoint_slopes(t: Table, eps: float = 1e-6) -> dict:
    """Same slopes from points of the level curve a distance ``eps`` from alpha = 0."""
    b = t.b
    be = level_endpoint(b)
    bt = brentq(lambda x: bfrak_sq(eps, x) - b * b, be - 0.1, min(be + 0.1, math.pi / 2 - eps - 1e-9),
                xtol=1e-15)
    p0 = H_up(AngleParams(0.0, be))
    u = H_up(AngleParams(eps, bt))
    d = H_down(AngleParams(eps, bt))
    return {"m_up": (u.d_right - p0.d_right) / (u.d_left - p0.d_left),
            "m_down": (d.d_right - p0.d_right) / (d.d_left - p0.d_left)}


def nearest_distance(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from each point to a polyline (segment-wise)."""
    a = poly[:-1]
    ab = poly[1:] - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    L2 = np.where(L2 == 0, 1.0, L2)
    out = np.empty(len(pts))
    for k, q in enumerate(pts):
        w = q - a
        s = np.clip(np.einsum("ij,ij->i", w, ab) / L2, 0.0, 1.0)
        d = w - s[:, None] * ab
        out[k] = np.sqrt(np.min(np.einsum("ij,ij->i", d, d)))
    return out
