"""The billiard map on the lemon table, its tangent map and focusing.

Tangent maps are written in (s, theta) where s is arclength along the
boundary, counterclockwise.  With unit radii s is the polar angle about the
arc's own centre, see ``geometry.circle_angle``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CornerHit, DomainError, OrbitEscaped
from .geometry import (
    TOL_CORNER,
    Arc,
    AngularState,
    Table,
    base_point,
    circle_angle,
    direction,
    outer_normal,
    position_angle,
    reflect,
    state_from_ray,
)

_TIE = 1e-14
_T_MIN = 1e-12


@dataclass(frozen=True)
class ReflectionStep:
    start: AngularState
    end: AngularState
    chord_length: float
    d_from: float
    d_to: float


def _other(arc: Arc) -> Arc:
    return Arc.LEFT if arc == Arc.RIGHT else Arc.RIGHT


def _circle_hits(p, v, c) -> list[float]:
    # stabilised roots of t^2 + 2 B t + C = 0
    w = p - c
    B = float(np.dot(v, w))
    C = float(np.dot(w, w)) - 1.0
    disc = B * B - C
    if disc < 0.0:
        return []
    q = -B - math.copysign(math.sqrt(disc), B)
    if q == 0.0:
        return [0.0]
    return [q, C / q]


def billiard_step(t: Table, x: AngularState) -> ReflectionStep:
    """One application of the billiard map."""
    p = base_point(t, x)
    v = direction(x)
    cands = []
    # own circle: p lies on it, so the second root is explicit
    own = t.center(x.arc)
    cands.append((-2.0 * float(np.dot(v, p - own)), x.arc))
    for s in _circle_hits(p, v, t.center(_other(x.arc))):
        cands.append((s, _other(x.arc)))
    hits = []
    phi_a = t.corner_angle
    for s, arc in cands:
        if s <= _T_MIN:
            continue
        q = p + s * v
        phi = position_angle(t, arc, q)
        if abs(abs(phi) - phi_a) < TOL_CORNER:
            raise CornerHit(f"ray lands within {TOL_CORNER} of a corner")
        if abs(phi) < phi_a:
            hits.append((s, arc, q))
    if not hits:
        raise CornerHit("no admissible landing point (ray escaped through a corner)")
    hits.sort(key=lambda h: h[0])
    if len(hits) > 1 and hits[1][0] - hits[0][0] < _TIE:
        raise CornerHit("tie between landing points")
    s, arc, q = hits[0]
    tmp = AngularState(arc, position_angle(t, arc, q), math.pi / 2)
    v_out = reflect(v, outer_normal(tmp))
    y = state_from_ray(t, arc, q, v_out)
    return ReflectionStep(x, y, s, math.sin(x.theta), math.sin(y.theta))


def iterate(t: Table, x: AngularState, n: int) -> list[AngularState]:
    out = [x]
    for _ in range(n):
        x = billiard_step(t, x).end
        out.append(x)
    return out


def tangent_map(step: ReflectionStep) -> np.ndarray:
    L, d0, d1 = step.chord_length, step.d_from, step.d_to
    return np.array([[L - d0, L], [L - d0 - d1, L - d1]]) / d1


def tangent_product(steps) -> np.ndarray:
    m = np.eye(2)
    for st in steps:
        m = tangent_map(st) @ m
    return m


# focusing, carried as curvature k = 1/f so that f = inf is k = 0

def mirror(k_minus: float, d: float) -> float:
    return 2.0 / d - k_minus


def travel(k_plus: float, L: float) -> float:
    """Backward curvature at the next point after travelling ``L``."""
    den = L * k_plus - 1.0
    if den == 0.0:
        return math.inf
    return k_plus / den


def _inv(f: float) -> float:
    if math.isinf(f):
        return 0.0
    if f == 0.0:
        return math.inf
    return 1.0 / f


def propagate_focus(step: ReflectionStep, f_minus: float) -> float:
    """Forward focusing distance after the reflection at ``step.start``."""
    return _inv(mirror(_inv(f_minus), step.d_from))


def focus_chain(steps, k_minus: float = 0.0) -> list[float]:
    """Forward curvatures 1/f+ at every reflection along consecutive steps.

    The first reflection is at ``steps[0].start`` and the last at
    ``steps[-1].end``; the list has ``len(steps) + 1`` entries.
    """
    out = []
    k = k_minus
    for st in steps:
        kp = mirror(k, st.d_from)
        out.append(kp)
        k = travel(kp, st.chord_length)
    out.append(mirror(k, steps[-1].d_to))
    return out


# the period-2 orbit along the axis

def o2_state(t: Table) -> AngularState:
    return AngularState(Arc.RIGHT, 0.0, math.pi / 2)


def rotation_angle_O2(t: Table) -> float:
    if not (1.0 < t.b < 2.0):
        raise DomainError("rotation angle of O2 is defined for 1 < b < 2")
    return math.acos(2.0 * (1.0 - t.b) ** 2 - 1.0)


def _coords(x: AngularState, c: AngularState) -> tuple[float, float]:
    return circle_angle(x) - circle_angle(c), x.theta - c.theta


def estimate_rotation_number(t: Table, center: AngularState, start: AngularState,
                             n_iter: int, radius: float = 0.5) -> float:
    """Mean winding of F_b^2 about ``center``, in full turns per step."""
    x = start
    u = _coords(x, center)
    a_prev = math.atan2(u[1], u[0])
    total = 0.0
    for _ in range(n_iter):
        x = billiard_step(t, billiard_step(t, x).end).end
        if x.arc != center.arc:
            raise OrbitEscaped("orbit changed arc parity")
        u = _coords(x, center)
        if math.hypot(*u) > radius:
            raise OrbitEscaped(f"orbit left radius {radius}")
        a = math.atan2(u[1], u[0])
        da = (a - a_prev + math.pi) % (2 * math.pi) - math.pi
        total += da
        a_prev = a
    return abs(total) / (2 * math.pi * n_iter)
