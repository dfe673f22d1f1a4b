"""Explicit period-2 and period-6 orbits, their stability, and fixed-point search.

Line-coordinate orbits follow the alternating sequence L, R, L, R, ... so a
period-6 billiard orbit is a fixed point of Theta = (R L)^3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from . import genmap as gm
from .billiard_core import billiard_step, o2_state, tangent_product
from .errors import DomainError, NoConvergence, SingularJacobian
from .geometry import Arc, AngularState, LineState, Table, state_from_ray

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
PARABOLIC_BAND = 1e-8


class Stability(str, Enum):
    Elliptic = "Elliptic"
    Hyperbolic = "Hyperbolic"
    Parabolic = "Parabolic"


def classify(half_trace: float) -> Stability:
    a = abs(half_trace)
    if abs(a - 1.0) <= PARABOLIC_BAND:
        return Stability.Parabolic
    return Stability.Elliptic if a < 1.0 else Stability.Hyperbolic


@dataclass
class PeriodicOrbit:
    period: int
    points_line: list
    points_angular: list | None
    multiplier_half_trace: float
    classification: Stability


# closed forms

def f_trace(b: float) -> float:
    """Half-trace of D F^3 along the elliptic period-6 orbit."""
    return (16 * b**5 - 48 * b**4 + 40 * b**3 - 4 * b**2 - b + 1
            + b / (2 * b * b - 4 * b + 1))


def f_trace_prime(b: float) -> float:
    q = 2 * b * b - 4 * b + 1
    return (80 * b**4 - 192 * b**3 + 120 * b**2 - 8 * b - 1
            + (q - b * (4 * b - 4)) / (q * q))


def trace_ell(b: float) -> float:
    """Half-trace of A J at E0 written as a single rational function."""
    num = (32 * b**7 - 160 * b**6 + 288 * b**5 - 216 * b**4 + 54 * b**3
           + 2 * b**2 - 4 * b + 1)
    return num / (2 * b * b - 4 * b + 1)


def hyperbolic_trace_excess(b: float) -> float:
    """Half-trace of D F^3 minus one along the hyperbolic period-6 orbit."""
    r = math.sqrt(b * b - 2.0)
    return (2 * b - 3) * (2 * b + 3) * r * (4 * b * b - 7 - 4 * r)


def e0_coord(b: float) -> float:
    return math.sqrt(1.0 - 1.0 / (4.0 * (b - 1.0) ** 2))


def p0_coord(b: float) -> float:
    return math.sqrt(1.0 - 1.0 / (4.0 * b * b - 8.0))


def E0(t: Table) -> LineState:
    s = e0_coord(t.b)
    return LineState(s, s)


def P0(t: Table) -> LineState:
    return LineState(0.0, p0_coord(t.b))


def Q0(t: Table) -> LineState:
    return LineState(p0_coord(t.b), 0.0)


# orbits

def _cycle(t, x, n):
    steps = []
    for _ in range(n):
        st = billiard_step(t, x)
        steps.append(st)
        x = st.end
    return steps


def _line_cycle(t, x0, n):
    pts = [x0]
    x = x0
    for i in range(n):
        x = gm.apply_L(t, x, True) if i % 2 == 0 else gm.apply_R(t, x, True)
        pts.append(x)
    return pts


def orbit_O2(t: Table) -> PeriodicOrbit:
    x = o2_state(t)
    steps = _cycle(t, x, 2)
    ht = 0.5 * float(np.trace(tangent_product(steps)))
    return PeriodicOrbit(2, [LineState(0.0, 0.0)], [x, steps[0].end], ht, classify(ht))


def tangent_matrix_O2(t: Table) -> np.ndarray:
    b = t.b
    return np.array([[1 - b, 2 - b], [-b, 1 - b]])


def elliptic6_start(t: Table) -> AngularState:
    b = t.b
    c = 1.0 / (2.0 * (b - 1.0))
    p0 = np.array([1.0, 0.0])
    p1 = np.array([b - c, math.sqrt(1.0 - c * c)])
    return state_from_ray(t, Arc.RIGHT, p0, p1 - p0)


def orbit_elliptic6(t: Table) -> PeriodicOrbit:
    b = t.b
    if b <= 1.5 or b > gm.b_max():
        raise DomainError("E0 exists for 1.5 < b <= b_max")
    e0 = E0(t)
    line = _line_cycle(t, e0, 6)
    pts = [line[0], line[1], line[4]]
    ang = None
    if b < GOLDEN:
        x = elliptic6_start(t)
        ang = [x] + [s.end for s in _cycle(t, x, 5)]
    ht = f_trace(b)
    return PeriodicOrbit(6, pts, ang, ht, classify(ht))


def hyperbolic6_start(t: Table) -> AngularState:
    b = t.b
    c = (2 * b * b - 3) / (2 * b * math.sqrt(b * b - 2))
    return AngularState(Arc.RIGHT, math.acos(c), math.pi / 2)


def orbit_hyperbolic6(t: Table) -> PeriodicOrbit:
    b = t.b
    if not (1.5 < b < math.sqrt(3.0)):
        raise DomainError("hyperbolic period-6 orbit exists for 1.5 < b < sqrt(3)")
    p0 = P0(t)
    line = _line_cycle(t, p0, 6)[:6]  # P0, Q1, P1, Q0, P2, Q2
    x = hyperbolic6_start(t)
    ang = [x] + [s.end for s in _cycle(t, x, 5)]
    ht = 1.0 + hyperbolic_trace_excess(b)
    return PeriodicOrbit(6, line, ang, ht, classify(ht))


def find_b_crit() -> float:
    """Parameter at which E0 turns parabolic (f(b) = -1)."""
    g = lambda b: f_trace(b) + 1.0
    b = brentq(g, 1.55, 1.68, xtol=1e-14)
    for _ in range(3):
        db = g(b) / f_trace_prime(b)
        b -= db
        if abs(db) < 1e-15:
            break
    return b


def eta_of(b: float) -> float:
    return 1.0 / (2.0 * math.sqrt(b * b - 2.0))


def hyperbolic_eigendata(t: Table) -> dict:
    """Eigenvalues and eigenvector slopes (dd_r/dd_l) of A J at P0, closed form."""
    b = t.b
    if not (1.5 < b <= gm.b_max() + 1e-15):
        raise DomainError("eigendata defined for 1.5 < b <= b_max")
    e = eta_of(b)
    p = 4 * e**7 - 2 * e**6 + 6 * e**5 - e**4 - 2 * e**3 + 2 * e**2 - 2 * e + 1
    delta = p * p - 4 * e**10 * (4 * e**4 + 4 * e**2 + 1)
    gamma = (1 - e) * (4 * e**6 + 3 * e**5 + e**4 + 2 * e**3 - 2 * e**2 - e + 1)
    den = 2 * (2 * e**7 + e**5)
    num = -2 * e**2 * (1 - e - e**2 + 2 * e**3 - 4 * e**4 + 4 * e**5)
    base = (1 + e) * (1 + e**2) * (1 - 2 * e + 2 * e**2)
    sg = (2 * e**2 + 1) * math.sqrt(max(gamma, 0.0))
    return {
        "eta": e,
        "lambda_s": (p - math.sqrt(delta)) / den,
        "lambda_u": (p + math.sqrt(delta)) / den,
        "slope_s": num / (base + sg),
        "slope_u": num / (base - sg),
        "Delta": delta,
        "Gamma": gamma,
    }


def slope_phi(eta: float) -> float:
    """Slope of the C_Phi tangent at P0."""
    return -eta**2 * (2 * eta**3 - 2 * eta**2 + 1) / (eta**3 + 1)


def slope_psi(eta: float) -> float:
    """Slope of the C_Psi tangent at P0."""
    return (-2 * eta**5 + 2 * eta**4 - eta**3 + eta - 1) / (eta * (eta + 1))


def Q0_jacobian_closed(b: float) -> np.ndarray:
    """D Psi at Q0 in closed form."""
    r = math.sqrt(b * b - 2)
    q = 2 * b * b - 3
    k = 16 * b**4 - 64 * b**2 + 63
    return np.array([
        [-2 * (b * b - 2) * k / q, -(8 * b**4 - 36 * b**2 + 39) / q],
        [2 * k * r - (8 * b * b - 15) * (8 * b**4 - 32 * b**2 + 31) / q,
         (8 * b**4 - 36 * b**2 + 39) / r - 2 * (8 * b**4 - 35 * b**2 + 36) / q],
    ])


def E0_jacobian_closed(b: float) -> np.ndarray:
    """D Psi at E0 in closed form."""
    c = 8 * b**4 - 24 * b**3 + 20 * b**2
    return np.array([
        [b * (-8 * b**3 + 24 * b**2 - 20 * b + 3) / (b - 1), (-2 * b * b + 4 * b - 1) / (b - 1)],
        [(c - 4 * b + 1) * (c - 2 * b - 1) / ((b - 1) * (2 * b * b - 4 * b + 1)),
         b * (8 * b**3 - 24 * b**2 + 20 * b - 3) / (b - 1)],
    ])


# Newton

_EYE = np.eye(2)


def newton_fixed_point(t: Table, k: gm.GenMapKind, guess: LineState,
                       tol: float = 1e-12, max_iter: int = 50) -> LineState:
    """Solve map(x) = x by damped Newton."""
    def resid(x):
        try:
            y = gm.apply(t, k, LineState.of(x))
        except (gm.OutOfDomain, gm.Branched):
            return None
        return y.as_array() - x

    x = guess.as_array().astype(float)
    r = resid(x)
    if r is None:
        raise NoConvergence("initial guess outside the domain of the map")
    for _ in range(max_iter):
        nr = float(np.linalg.norm(r))
        if nr < tol:
            return LineState.of(x)
        try:
            jm = gm.jacobian(t, k, LineState.of(x)) - _EYE
        except (gm.OutOfDomain, gm.Branched) as e:
            raise NoConvergence(f"Jacobian unavailable: {e}") from e
        if abs(np.linalg.det(jm)) < 1e-14:
            raise SingularJacobian("map - id has a singular Jacobian")
        dx = np.linalg.solve(jm, -r)
        lam = 1.0
        for _ in range(30):
            xn = x + lam * dx
            rn = resid(xn)
            if rn is not None and np.linalg.norm(rn) < nr:
                break
            lam *= 0.5
        else:
            if nr < 10 * tol:
                return LineState.of(x)
            raise NoConvergence("damping failed to reduce the residual")
        x, r = xn, rn
    if float(np.linalg.norm(r)) < tol:
        return LineState.of(x)
    raise NoConvergence(f"no convergence in {max_iter} iterations")


def _newton_batch(b, k, x, y, max_iter=50, tol=1e-12):
    alive = np.isfinite(x) & np.isfinite(y)

    def res(x, y):
        u, v = gm.apply_xy(b, k, x, y)
        return u - x, v - y

    rx, ry = res(x, y)
    nr = np.hypot(rx, ry)
    alive &= np.isfinite(nr)
    for _ in range(max_iter):
        act = alive & (nr >= tol)
        if not act.any():
            break
        _, _, m = gm.jacobian_xy(b, k, x, y)
        a = m[..., 0, 0] - 1.0
        bb = m[..., 0, 1]
        c = m[..., 1, 0]
        d = m[..., 1, 1] - 1.0
        det = a * d - bb * c
        with np.errstate(invalid="ignore", divide="ignore"):
            dx = (-d * rx + bb * ry) / det
            dy = (c * rx - a * ry) / det
        bad = act & ~(np.isfinite(dx) & np.isfinite(dy) & (np.abs(det) > 1e-14))
        alive &= ~bad
        act &= ~bad
        lam = np.ones_like(x)
        pending = act.copy()
        nx, ny = x.copy(), y.copy()
        for _ in range(30):
            tx = np.where(pending, x + lam * dx, nx)
            ty = np.where(pending, y + lam * dy, ny)
            ux, uy = res(tx, ty)
            un = np.hypot(ux, uy)
            ok = pending & np.isfinite(un) & (un < nr)
            nx = np.where(ok, tx, nx)
            ny = np.where(ok, ty, ny)
            rx = np.where(ok, ux, rx)
            ry = np.where(ok, uy, ry)
            nr = np.where(ok, un, nr)
            pending &= ~ok
            if not pending.any():
                break
            lam = np.where(pending, lam * 0.5, lam)
        # stalled points count as converged only if already tight
        alive &= ~(pending & (nr >= 10 * tol))
        x, y = nx, ny
    conv = alive & (nr < 10 * tol)
    return x[conv], y[conv]


def exhaustive_theta_fixed_points(t: Table, region=(0.0, 0.6, 0.0, 0.6), grid: int = 200,
                                  dedup: float = 1e-8, margin: float = 1e-8,
                                  orientation_filter: bool = True) -> list[LineState]:
    """All Theta fixed points reached by Newton from a grid x grid lattice of seeds.

    ``region`` is (dl_min, dl_max, dr_min, dr_max); roots outside it (beyond
    ``margin``) are discarded, roots closer than ``dedup`` are merged.

    With ``orientation_filter`` roots where det D Theta is not +1 (or where
    the Jacobian does not exist) are dropped.  Those solve the algebraic
    equations but some intermediate line violates the alternating heading
    convention or grazes a circle, so they carry no billiard orbit.
    """
    x0, x1, y0, y1 = region
    if grid <= 0 or x1 < x0 or y1 < y0:
        return []
    gx, gy = np.meshgrid(np.linspace(x0, x1, grid), np.linspace(y0, y1, grid), indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    keep = gm.in_domain_xy(t.b, gx, gy)
    rx, ry = _newton_batch(t.b, gm.GenMapKind.Theta, gx[keep], gy[keep])
    inside = ((rx >= x0 - margin) & (rx <= x1 + margin)
              & (ry >= y0 - margin) & (ry <= y1 + margin))
    rx, ry = rx[inside], ry[inside]
    order = np.lexsort((ry, rx))
    found: list[np.ndarray] = []
    for i in order:
        p = np.array([rx[i], ry[i]])
        if not any(np.linalg.norm(p - q) < dedup for q in found):
            found.append(p)
    # polish each representative with the scalar solver
    out = []
    for p in found:
        try:
            x = newton_fixed_point(t, gm.GenMapKind.Theta, LineState.of(p))
        except (NoConvergence, SingularJacobian):
            x = LineState.of(p)
        if orientation_filter and not _orientation_ok(t, x):
            continue
        out.append(x)
    out.sort(key=lambda s: (round(s.d_left, 9), round(s.d_right, 9)))
    return out


def _orientation_ok(t, x) -> bool:
    try:
        d = float(np.linalg.det(gm.jacobian(t, gm.GenMapKind.Theta, x)))
    except (gm.OutOfDomain, gm.Branched):
        return False
    return abs(d - 1.0) < 1e-6


# points born from E0 past b_crit

def bifurcated_points(t: Table) -> tuple[LineState, LineState]:
    """E1, E2 on the diagonal with Phi(E1) = Psi(E1) = E2; requires b > b_crit."""
    b = t.b
    if not (find_b_crit() < b <= gm.b_max()):
        raise DomainError("E1, E2 exist for b_crit < b <= b_max")
    e0 = e0_coord(b)

    def g(s):
        u, v = gm.apply_xy(b, gm.GenMapKind.Phi, s, s)
        return float(u - v)

    def root(lo, hi):
        xs = np.linspace(lo, hi, 4001)
        u, v = gm.apply_xy(b, gm.GenMapKind.Phi, xs, xs)
        gs = u - v
        ok = np.isfinite(gs)
        for i in range(len(xs) - 1):
            if ok[i] and ok[i + 1] and gs[i] * gs[i + 1] < 0:
                return brentq(g, xs[i], xs[i + 1], xtol=1e-15)
        raise NoConvergence("no diagonal crossing found")

    s2 = root(0.2, e0 - 1e-7)
    e2 = LineState(s2, s2)
    e1 = gm.apply(t, gm.GenMapKind.Psi, e2)
    e1 = LineState(0.5 * (e1.d_left + e1.d_right), 0.5 * (e1.d_left + e1.d_right))
    return e1, e2
