"""Lemon table, boundary states and the oriented-line chart.

The table is the intersection of two unit disks centred at O_l = (0, 0) and
O_r = (b, 0).  The *left* arc lies on the circle centred at O_r and the
*right* arc on the circle centred at O_l.

Angular states
    ``AngularState(arc, phi, theta)`` describes a point on one arc together
    with the outgoing ray.  On the right arc ``phi`` is the polar angle about
    O_l.  On the left arc ``phi`` stores phi_hat = pi - (polar angle about O_r),
    so that phi > 0 means y > 0 on both arcs.  ``theta`` in (0, pi) is the
    angle from the counterclockwise tangent of the boundary to the outgoing
    direction.

Line states
    ``LineState(d_left, d_right)`` holds signed distances from O_l and O_r to
    an oriented line, d = cross(direction, P - O) for any P on the line.
    With heading angle beta, sin(beta) = (d_right - d_left) / b.  The pair
    does not fix the sign of cos(beta); the generalized reflection maps use
    lines heading left (cos beta < 0) as input to the left-arc reflection
    and lines heading right as input to the right-arc reflection.  The chart
    below follows that convention by default.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CornerHit, DomainError, NoIntersection

TOL_CORNER = 1e-10


class Arc(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class Table:
    b: float

    def __post_init__(self):
        if not (0.0 < self.b < 2.0):
            raise DomainError(f"b must lie in (0, 2), got {self.b}")

    @property
    def o_left(self) -> np.ndarray:
        return np.array([0.0, 0.0])

    @property
    def o_right(self) -> np.ndarray:
        return np.array([self.b, 0.0])

    @property
    def corner_angle(self) -> float:
        return math.acos(self.b / 2.0)

    @property
    def corners(self) -> tuple[np.ndarray, np.ndarray]:
        h = math.sqrt(1.0 - (self.b / 2.0) ** 2)
        return np.array([self.b / 2.0, h]), np.array([self.b / 2.0, -h])

    def center(self, arc: Arc) -> np.ndarray:
        return self.o_left if arc == Arc.RIGHT else self.o_right


@dataclass(frozen=True)
class AngularState:
    arc: Arc
    phi: float
    theta: float


@dataclass(frozen=True)
class LineState:
    d_left: float
    d_right: float

    def as_array(self) -> np.ndarray:
        return np.array([self.d_left, self.d_right])

    @classmethod
    def of(cls, xy) -> "LineState":
        return cls(float(xy[0]), float(xy[1]))

    def reversed(self) -> "LineState":
        return LineState(-self.d_left, -self.d_right)

    def swapped(self) -> "LineState":
        return LineState(self.d_right, self.d_left)


@dataclass(frozen=True)
class Intersection:
    point: np.ndarray
    state: AngularState
    on_arc: bool
    entering: bool  # True when the oriented line enters the disk here


def _cross(u, v) -> float:
    return u[0] * v[1] - u[1] * v[0]


def circle_angle(x: AngularState) -> float:
    """Polar angle of the base point about the centre of its own circle."""
    return x.phi if x.arc == Arc.RIGHT else math.pi - x.phi


def base_point(t: Table, x: AngularState) -> np.ndarray:
    if x.arc == Arc.RIGHT:
        return np.array([math.cos(x.phi), math.sin(x.phi)])
    return np.array([t.b - math.cos(x.phi), math.sin(x.phi)])


def outer_normal(x: AngularState) -> np.ndarray:
    a = circle_angle(x)
    return np.array([math.cos(a), math.sin(a)])


def tangent(x: AngularState) -> np.ndarray:
    a = circle_angle(x)
    return np.array([-math.sin(a), math.cos(a)])


def direction(x: AngularState) -> np.ndarray:
    """Unit vector of the outgoing ray."""
    tg = tangent(x)
    n_in = -outer_normal(x)
    return math.cos(x.theta) * tg + math.sin(x.theta) * n_in


def reflect(v: np.ndarray, normal: np.ndarray) -> np.ndarray:
    return v - 2.0 * float(np.dot(v, normal)) * normal


def position_angle(t: Table, arc: Arc, p) -> float:
    if arc == Arc.RIGHT:
        return math.atan2(p[1], p[0])
    return math.atan2(p[1], t.b - p[0])


def state_from_ray(t: Table, arc: Arc, p, v) -> AngularState:
    """Angular state at boundary point ``p`` with outgoing direction ``v``."""
    phi = position_angle(t, arc, p)
    tmp = AngularState(arc, phi, math.pi / 2)
    tg = tangent(tmp)
    theta = math.atan2(_cross(tg, v), float(np.dot(tg, v)))
    return AngularState(arc, phi, theta)


def is_valid(t: Table, x: AngularState) -> bool:
    return abs(x.phi) < t.corner_angle and 0.0 < x.theta < math.pi


def line_of_ray(t: Table, p, v) -> LineState:
    return LineState(float(_cross(v, p - t.o_left)), float(_cross(v, p - t.o_right)))


def angular_to_line(t: Table, x: AngularState, outgoing: bool = True) -> LineState:
    """Line coordinates of the outgoing ray of ``x`` (or of the incoming one)."""
    p = base_point(t, x)
    v = direction(x)
    if not outgoing:
        v = reflect(v, outer_normal(x))
    return line_of_ray(t, p, v)


def heading(x: AngularState) -> int:
    """Sign of the horizontal component of the outgoing ray (+1 or -1)."""
    return 1 if direction(x)[0] >= 0.0 else -1


def line_direction(t: Table, l: LineState, heading: int) -> np.ndarray:
    sb = (l.d_right - l.d_left) / t.b
    if abs(sb) > 1.0:
        raise NoIntersection("|d_right - d_left| exceeds b")
    cb = math.sqrt(max(0.0, 1.0 - sb * sb))
    return np.array([heading * cb, sb])


def line_to_angular(t: Table, l: LineState, arc: Arc, heading: int | None = None) -> list[Intersection]:
    """Both intersections of the oriented line with the circle carrying ``arc``.

    At the entry point the record holds the state whose outgoing ray is the
    line itself; at the exit point it holds the state reached by reflecting
    the line there.  ``heading`` defaults to -1 for the right arc and +1 for
    the left arc (the alternating-orbit convention).
    """
    if heading is None:
        heading = -1 if arc == Arc.RIGHT else 1
    v = line_direction(t, l, heading)
    c = t.center(arc)
    d = l.d_left if arc == Arc.RIGHT else l.d_right
    if abs(d) >= 1.0:
        raise NoIntersection(f"|d| = {abs(d)} >= 1")
    n = np.array([-v[1], v[0]])
    foot = c + d * n
    h = math.sqrt(1.0 - d * d)
    out = []
    for entering, sgn in ((True, -1.0), (False, 1.0)):
        p = foot + sgn * h * v
        phi = position_angle(t, arc, p)
        if abs(abs(phi) - t.corner_angle) < TOL_CORNER:
            raise CornerHit(f"intersection within {TOL_CORNER} of a corner")
        s = state_from_ray(t, arc, p, v)
        if not entering:
            s = AngularState(arc, s.phi, -s.theta)
        out.append(Intersection(p, s, abs(phi) < t.corner_angle, entering))
    return out
