"""Generalized reflection maps in oriented-line coordinates (d_l, d_r).

L_b reflects a line on the circle carrying the left arc, R_b on the circle
carrying the right arc.  Both are involutions and I L_b I = R_b, where
I(d_l, d_r) = (d_r, d_l).  Compositions, listed in application order:

    Phi   = L R L         Psi = R L R
    Theta = (R L)^3       applied as L, R, L, R, L, R  (= Psi o Phi)
    ThetaInv = (L R)^3    applied as R, L, R, L, R, L

Scalar entry points take and return ``LineState`` and raise on domain
problems.  The ``*_xy`` functions are vectorised over numpy arrays and mark
failures with NaN; manifold growth relies on them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import Branched, DomainError, OutOfDomain
from .geometry import LineState, Table

RADICAND_TOL = 1e-14
BRANCH_TOL = 1e-13


class GenMapKind(str, Enum):
    L = "L"
    R = "R"
    Phi = "Phi"
    Psi = "Psi"
    Theta = "Theta"
    ThetaInv = "ThetaInv"
    I = "I"


SEQUENCE = {
    GenMapKind.L: "L",
    GenMapKind.R: "R",
    GenMapKind.Phi: "LRL",
    GenMapKind.Psi: "RLR",
    GenMapKind.Theta: "LRLRLR",
    GenMapKind.ThetaInv: "RLRLRL",
    GenMapKind.I: "I",
}


class SingularCurveId(str, Enum):
    S1plus = "S1plus"
    S1minus = "S1minus"
    S2plus = "S2plus"
    S2minus = "S2minus"
    Lplus = "Lplus"
    Lminus = "Lminus"


@dataclass
class CurveTrace:
    """Ordered polyline with its parameter values."""
    points: np.ndarray
    param: np.ndarray
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)


S0 = np.array([2 ** -0.5, 2 ** -0.5])


def b_max() -> float:
    return 1.0 + 2 ** -0.5


# vectorised core

def _reflect_first(b, dl, dr):
    # new d_l after reflecting on the circle centred at O_r; d_r fixed
    with np.errstate(all="ignore"):
        u = dr - dl
        rad = (b * b - u * u) * (1.0 - dr * dr)
        rad = np.where((rad < 0) & (rad >= -RADICAND_TOL), 0.0, rad)
        root = np.sqrt(rad)
        return u * (1.0 - 2.0 * dr * dr) - 2.0 * dr * root + dr


def L_xy(b, dl, dr):
    return _reflect_first(b, dl, dr), dr


def R_xy(b, dl, dr):
    return dl, _reflect_first(b, dr, dl)


def apply_xy(b, kind: GenMapKind, dl, dr):
    for ch in SEQUENCE[GenMapKind(kind)]:
        if ch == "L":
            dl, dr = L_xy(b, dl, dr)
        elif ch == "R":
            dl, dr = R_xy(b, dl, dr)
        else:
            dl, dr = dr, dl
    return dl, dr


def in_domain_xy(b, dl, dr):
    """Membership in D_b, the component of the origin cut out by the singular curves."""
    dl = np.asarray(dl, dtype=float)
    dr = np.asarray(dr, dtype=float)
    ok = (np.abs(dl) <= 1) & (np.abs(dr) <= 1) & (np.abs(dr - dl) < b)
    ok &= np.where(dr > 0, dl - dr < b * (1 - 2 * dr * dr), True)
    ok &= np.where(dr < 0, dl - dr > -b * (1 - 2 * dr * dr), True)
    ok &= np.where(dl > 0, dr - dl < b * (1 - 2 * dl * dl), True)
    ok &= np.where(dl < 0, dr - dl > -b * (1 - 2 * dl * dl), True)
    return ok


def in_domain(t: Table, l: LineState) -> bool:
    return bool(in_domain_xy(t.b, l.d_left, l.d_right))


# scalar API

def _check(b, dl, dr, which, allow_branch, stage):
    # (dl, dr) already oriented so that dr is the coordinate kept fixed
    u = dr - dl
    f1 = b * b - u * u
    f2 = 1.0 - dr * dr
    if f1 * f2 < -RADICAND_TOL or f2 < -RADICAND_TOL:
        raise OutOfDomain(f"{which}: negative radicand {f1 * f2:.3e}", stage)
    if not allow_branch and abs(f1) <= BRANCH_TOL:
        raise Branched(f"{which}: point on the branched locus", stage)


def apply_L(t: Table, l: LineState, allow_branch: bool = False, stage=None) -> LineState:
    _check(t.b, l.d_left, l.d_right, "L", allow_branch, stage)
    return LineState(float(_reflect_first(t.b, l.d_left, l.d_right)), float(l.d_right))


def apply_R(t: Table, l: LineState, allow_branch: bool = False, stage=None) -> LineState:
    _check(t.b, l.d_right, l.d_left, "R", allow_branch, stage)
    return LineState(float(l.d_left), float(_reflect_first(t.b, l.d_right, l.d_left)))


def apply_I(l: LineState) -> LineState:
    return l.swapped()


def apply(t: Table, kind: GenMapKind, l: LineState, allow_branch: bool = False) -> LineState:
    for i, ch in enumerate(SEQUENCE[GenMapKind(kind)]):
        if ch == "L":
            l = apply_L(t, l, allow_branch, stage=i)
        elif ch == "R":
            l = apply_R(t, l, allow_branch, stage=i)
        else:
            l = apply_I(l)
    return l


_J = np.array([[0.0, 1.0], [1.0, 0.0]])


def _jac_L(b, dl, dr, stage):
    u = dr - dl
    f1 = b * b - u * u
    f2 = 1.0 - dr * dr
    if abs(f1) <= BRANCH_TOL:
        raise Branched("L is not differentiable on the branched locus", stage)
    if f1 * f2 <= 0.0:
        raise OutOfDomain("Jacobian requested outside the open domain", stage)
    q = math.sqrt(f1 * f2)
    a = -(1.0 - 2.0 * dr * dr) + 2.0 * dr * f2 * (dl - dr) / q
    dq = -2.0 * u * f2 - 2.0 * dr * f1
    c = (1.0 - 2.0 * dr * dr) - 4.0 * u * dr - 2.0 * q - dr * dq / q + 1.0
    return np.array([[a, c], [0.0, 1.0]])


def jacobian(t: Table, kind: GenMapKind, l: LineState) -> np.ndarray:
    """Analytic Jacobian, rows indexed by output coordinate (d_l', d_r')."""
    m = np.eye(2)
    x = l
    for i, ch in enumerate(SEQUENCE[GenMapKind(kind)]):
        if ch == "L":
            step = _jac_L(t.b, x.d_left, x.d_right, i)
            x = apply_L(t, x, stage=i)
        elif ch == "R":
            step = _J @ _jac_L(t.b, x.d_right, x.d_left, i) @ _J
            x = apply_R(t, x, stage=i)
        else:
            step = _J
            x = apply_I(x)
        m = step @ m
    return m


def _jac_L_xy(b, dl, dr):
    u = dr - dl
    f1 = b * b - u * u
    f2 = 1.0 - dr * dr
    with np.errstate(all="ignore"):
        q = np.sqrt(np.where(f1 * f2 > 0, f1 * f2, np.nan))
        a = -(1.0 - 2.0 * dr * dr) + 2.0 * dr * f2 * (dl - dr) / q
        dq = -2.0 * u * f2 - 2.0 * dr * f1
        c = (1.0 - 2.0 * dr * dr) - 4.0 * u * dr - 2.0 * q - dr * dq / q + 1.0
    return a, c


def jacobian_xy(b, kind: GenMapKind, dl, dr):
    """Vectorised map and Jacobian; returns (dl', dr', J) with J of shape (..., 2, 2)."""
    dl = np.asarray(dl, dtype=float)
    dr = np.asarray(dr, dtype=float)
    m = np.broadcast_to(np.eye(2), dl.shape + (2, 2)).copy()
    for ch in SEQUENCE[GenMapKind(kind)]:
        if ch == "L":
            a, c = _jac_L_xy(b, dl, dr)
            r0 = a[..., None] * m[..., 0, :] + c[..., None] * m[..., 1, :]
            m = np.stack([r0, m[..., 1, :]], axis=-2)
            dl, dr = L_xy(b, dl, dr)
        elif ch == "R":
            a, c = _jac_L_xy(b, dr, dl)
            r1 = c[..., None] * m[..., 0, :] + a[..., None] * m[..., 1, :]
            m = np.stack([m[..., 0, :], r1], axis=-2)
            dl, dr = R_xy(b, dl, dr)
        else:
            m = m[..., ::-1, :]
            dl, dr = dr, dl
    return dl, dr, m


def cos_heading(t: Table, l: LineState) -> float:
    """|cos beta| of the line; the invariant area is dd_l dd_r / |cos beta|."""
    s = (l.d_right - l.d_left) / t.b
    return math.sqrt(max(0.0, 1.0 - s * s))


def partial_dl(t: Table, l: LineState) -> float:
    """d(d_l')/d(d_l) for L_b in closed form."""
    dl, dr, b = l.d_left, l.d_right, t.b
    q = math.sqrt((b * b - (dr - dl) ** 2) * (1 - dr * dr))
    return -(1 - 2 * dr * dr) + 2 * dr * (1 - dr * dr) * (dl - dr) / q


# curves

def _s1plus_range(b):
    lo = (1.0 + math.sqrt(1.0 + 8.0 * b * (b - 1.0))) / (4.0 * b)
    return lo, 1.0


def singular_curve(t: Table, cid: SingularCurveId, n: int) -> CurveTrace:
    if n < 2:
        raise ValueError("need at least two samples")
    b = t.b
    cid = SingularCurveId(cid)
    if cid in (SingularCurveId.Lplus, SingularCurveId.Lminus):
        s = np.linspace(-1.0, 1.0 - b, n)
        pts = np.column_stack([s, s + b])
        if cid == SingularCurveId.Lminus:
            pts = -pts
        return CurveTrace(pts, s, cid.value)
    lo, hi = _s1plus_range(b)
    s = np.linspace(lo, hi, n)
    pts = np.column_stack([s + b * (1 - 2 * s * s), s])
    if cid in (SingularCurveId.S1minus, SingularCurveId.S2minus):
        pts = -pts
    if cid in (SingularCurveId.S2plus, SingularCurveId.S2minus):
        pts = pts[:, ::-1]
    return CurveTrace(pts, s, cid.value)


def fix_phi_graph(b, dr):
    """d_l as a function of d_r on Fix(Phi_b), for |d_r| < b - 1."""
    dr = np.asarray(dr, dtype=float)
    rad = ((1 - b) ** 2 - dr * dr) * (1 - dr * dr)
    return dr / (b - 1) * (-1 + 2 * b * (1 - dr * dr) - 2 * b * np.sqrt(np.maximum(rad, 0.0)))


def fixed_locus(t: Table, kind: GenMapKind, n: int) -> CurveTrace:
    b = t.b
    kind = GenMapKind(kind)
    if kind in (GenMapKind.L, GenMapKind.R):
        s = np.linspace(-1.0, 1.0, n)
        pts = np.column_stack([(1 - b) * s, s])
        if kind == GenMapKind.R:
            pts = pts[:, ::-1]
        return CurveTrace(pts, s, f"Fix({kind.value})")
    if kind in (GenMapKind.Phi, GenMapKind.Psi):
        # open interval; the endpoints sit on the boundary of the chart
        s = np.linspace(1 - b, b - 1, n + 2)[1:-1]
        pts = np.column_stack([fix_phi_graph(b, s), s])
        inside = np.all(np.abs(pts) <= 1.0, axis=1)
        pts, s = pts[inside], s[inside]
        if kind == GenMapKind.Psi:
            pts = pts[:, ::-1]
        return CurveTrace(pts, s, f"Fix({kind.value})")
    raise DomainError(f"fixed locus not provided for {kind}")


def monotonicity_witness(t: Table, l: LineState, kind: GenMapKind = GenMapKind.Phi) -> float:
    """Signed parallelism defect; positive on the exterior side of C_Phi (or C_Psi).

    For Phi it is (d_l' - d_r') - (d_r - d_l).  For Psi the inequality on
    the exterior side is reversed, so the sign is flipped to keep
    "positive means exterior".
    """
    kind = GenMapKind(kind)
    y = apply(t, kind, l)
    w = (y.d_left - y.d_right) - (l.d_right - l.d_left)
    if kind == GenMapKind.Phi:
        return w
    if kind == GenMapKind.Psi:
        return -w
    raise DomainError("witness is defined for Phi and Psi")
