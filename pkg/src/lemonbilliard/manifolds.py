"""Stable and unstable branches of the hyperbolic Theta fixed points P0, Q0.

A branch is stored as a function of a global parameter sigma = k + s with
s in [0, 1): the point is G^k(seed(s)), where seed(s) = base + eps mu^s v on
the linear eigen-direction v, mu is the expansion factor of G along v and
G is Theta (unstable) or its exact inverse (stable).  Recomputing points
from sigma keeps crossing refinement free of interpolation error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import genmap as gm
from .errors import DomainError, MissingCrossing
from .genmap import CurveTrace, GenMapKind, SingularCurveId
from .geometry import LineState, Table
from .parallel import CurveKind, curve_C, nearest_distance
from .periodic import P0, Q0, hyperbolic_eigendata

SEED_OFFSET = 1e-7
MAX_GAP = 1e-3
INTERP_TOL = 1e-6


class Base(str, Enum):
    P0 = "P0"
    Q0 = "Q0"


class BranchKind(str, Enum):
    Stable = "Stable"
    Unstable = "Unstable"


class Side(str, Enum):
    PlusQuadrant = "PlusQuadrant"
    Other = "Other"


@dataclass
class ManifoldBranch:
    base: LineState
    base_id: Base
    kind: BranchKind
    side: Side
    polyline: CurveTrace
    seed_offset: float
    growth_steps: int
    b: float
    direction: np.ndarray
    mu: float
    status: str = "ok"
    exit_point: LineState | None = None
    meta: dict = field(default_factory=dict)

    @property
    def map_kind(self) -> GenMapKind:
        return GenMapKind.Theta if self.kind == BranchKind.Unstable else GenMapKind.ThetaInv

    def seed(self, s):
        s = np.asarray(s, dtype=float)
        r = self.seed_offset * self.mu ** s
        base = self.base.as_array()
        return base[0] + r * self.direction[0], base[1] + r * self.direction[1]

    def evaluate(self, sigma):
        """Points of the branch at global parameters ``sigma`` (vectorised)."""
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        k = np.floor(sigma).astype(int)
        x, y = self.seed(sigma - k)
        for j in range(int(k.max(initial=0))):
            m = k > j
            if not m.any():
                break
            u, v = gm.apply_xy(self.b, self.map_kind, x[m], y[m])
            x[m], y[m] = u, v
        return np.column_stack([x, y])


def eigen_direction(t: Table, base: Base, kind: BranchKind, side: Side = Side.PlusQuadrant):
    """Unit eigenvector and expansion factor of the growth map."""
    ed = hyperbolic_eigendata(t)
    stable = kind == BranchKind.Stable
    if base == Base.P0:
        v = np.array([1.0, ed["slope_s"] if stable else ed["slope_u"]])
    else:
        # I Theta I = Theta^{-1}: eigen-directions at Q0 are mirrored and swapped
        v = np.array([ed["slope_u"] if stable else ed["slope_s"], 1.0])
    v /= np.linalg.norm(v)
    if side == Side.Other:
        v = -v
    mu = 1.0 / ed["lambda_s"] ** 2 if stable else ed["lambda_u"] ** 2
    return v, mu


def grow_branch(t: Table, base: Base, kind: BranchKind, side: Side = Side.PlusQuadrant,
                arc_length_budget: float = 2.0, seed_offset: float = SEED_OFFSET,
                max_gap: float = MAX_GAP, n_seed: int = 16, max_steps: int = 3000,
                until_diagonal: bool = False, extra_steps: int = 2) -> ManifoldBranch:
    """Grow one branch by iterating a fundamental segment.

    Growth stops when the budget is used, the branch leaves the domain, a
    whole fundamental segment shrinks below ``seed_offset`` (the branch is
    creeping into another fixed point), or, with ``until_diagonal``,
    ``extra_steps`` after the first diagonal crossing.
    """
    b = t.b
    if not (1.5 < b <= gm.b_max()):
        raise DomainError("branches are grown for 1.5 < b <= b_max")
    base, kind, side = Base(base), BranchKind(kind), Side(side)
    bp = P0(t) if base == Base.P0 else Q0(t)
    v, mu = eigen_direction(t, base, kind, side)
    br = ManifoldBranch(bp, base, kind, side, CurveTrace(np.empty((0, 2)), np.empty(0)),
                        seed_offset, 0, b, v, mu)
    s = np.linspace(0.0, 1.0, n_seed, endpoint=False)
    x, y = br.seed(s)
    sig_all = [s.copy()]
    pts_all = [np.column_stack([x, y])]
    length = float(np.sum(np.linalg.norm(np.diff(pts_all[0], axis=0), axis=1)))
    k = 0
    s0 = np.sign(_diag_gap(bp.as_array()))
    crossed_at = None
    max_seg = 0.0
    while length < arc_length_budget and k < max_steps:
        k += 1
        x, y = gm.apply_xy(b, br.map_kind, x, y)
        # the start of the next segment closes the gap at s = 1
        ex, ey = gm.apply_xy(b, br.map_kind, x[:1], y[:1])
        for _ in range(40):
            sx = np.append(s, 1.0)
            px, py = np.append(x, ex), np.append(y, ey)
            gaps = np.hypot(np.diff(px), np.diff(py))
            bad = np.where(~(gaps <= max_gap))[0]
            bad = bad[np.isfinite(gaps[bad])]
            if len(bad) == 0:
                break
            mids = 0.5 * (sx[bad] + sx[bad + 1])
            mp = br.evaluate(k + mids)
            s = np.insert(s, bad + 1, mids)
            x = np.insert(x, bad + 1, mp[:, 0])
            y = np.insert(y, bad + 1, mp[:, 1])
        ok = np.isfinite(x) & np.isfinite(y) & gm.in_domain_xy(b, x, y)
        if not ok.all():
            first = int(np.argmin(ok))
            sig_all.append(k + s[:first])
            pts_all.append(np.column_stack([x[:first], y[:first]]))
            br.status = "left_domain"
            if np.isfinite(x[first]) and np.isfinite(y[first]):
                br.exit_point = LineState(float(x[first]), float(y[first]))
            break
        seg = np.column_stack([x, y])
        seg_len = float(np.linalg.norm(seg[0] - pts_all[-1][-1]))
        seg_len += float(np.sum(np.linalg.norm(np.diff(seg, axis=0), axis=1)))
        length += seg_len
        sig_all.append(k + s)
        pts_all.append(seg)
        if crossed_at is None and np.any(np.sign(_diag_gap(seg)) != s0):
            crossed_at = k
        if until_diagonal and crossed_at is not None and k - crossed_at >= extra_steps:
            br.status = "crossed"
            break
        max_seg = max(max_seg, seg_len)
        if seg_len < 1e-4 * max_seg:
            br.status = "stalled"
            break
    br.growth_steps = k
    br.polyline = CurveTrace(np.vstack(pts_all), np.concatenate(sig_all),
                             f"{kind.value}({base.value}, {side.value})", {"b": b})
    return br


@dataclass
class Crossing:
    point: LineState
    angle: float
    sigma: float


def _diag_gap(p):
    return p[..., 0] - p[..., 1]


def diagonal_crossing(branch: ManifoldBranch, tol: float = 1e-15) -> Crossing | None:
    """First crossing of the diagonal, refined by bisection in sigma."""
    pts = branch.polyline.points
    sig = branch.polyline.param
    if len(pts) < 2:
        return None
    g = _diag_gap(pts)
    s0 = np.sign(_diag_gap(branch.base.as_array()))
    idx = np.where(np.sign(g) != s0)[0]
    if len(idx) == 0 or idx[0] == 0:
        return None
    i = idx[0]
    lo, hi = sig[i - 1], sig[i]
    p_lo, p_hi = pts[i - 1], pts[i]
    # Points carry along-branch jitter of order 1e-16 * mu^k, so bisect
    # until the bracket is tiny and intersect its chord with the diagonal.
    for _ in range(200):
        if hi - lo < tol * max(1.0, abs(hi)) or np.linalg.norm(p_hi - p_lo) < 1e-9:
            break
        mid = 0.5 * (lo + hi)
        pm = branch.evaluate(mid)[0]
        if np.sign(_diag_gap(pm)) == s0:
            lo, p_lo = mid, pm
        else:
            hi, p_hi = mid, pm
    g_lo, g_hi = _diag_gap(p_lo), _diag_gap(p_hi)
    w = g_lo / (g_lo - g_hi) if g_lo != g_hi else 0.5
    p = p_lo + w * (p_hi - p_lo)
    sc = lo + w * (hi - lo)
    # tangent from the parametrisation
    h = 1e-3
    q = branch.evaluate(np.array([sc - h, sc + h]))
    tv = q[1] - q[0]
    tv /= np.linalg.norm(tv)
    d = np.array([1.0, 1.0]) / math.sqrt(2.0)
    ang = math.acos(min(1.0, abs(float(np.dot(tv, d)))))
    return Crossing(LineState(float(p[0]), float(p[1])), ang, float(sc))


@dataclass
class Splitting:
    delta: float
    crossing_s: LineState
    crossing_u: LineState
    angle_s: float
    angle_u: float

    @property
    def angle_defect(self) -> float:
        """Angle between the branches at the crossing; zero for a smooth connection."""
        return abs(self.angle_s - math.pi / 2) + abs(self.angle_u - math.pi / 2)


def splitting(t: Table, seed_offset: float = SEED_OFFSET, budget: float = 2.0,
              swap: bool = False) -> Splitting:
    """Compare the diagonal crossings of the stable branch of P0 and the unstable branch of Q0.

    Both branches are grown independently.  ``swap`` exchanges the roles of
    P0 and Q0 (stable branch of Q0 against unstable branch of P0).
    """
    first, second = (Base.Q0, Base.P0) if swap else (Base.P0, Base.Q0)
    kw = dict(arc_length_budget=budget, seed_offset=seed_offset, until_diagonal=True)
    # different seed sampling so the mirrored branch is not bitwise identical
    bs = grow_branch(t, first, BranchKind.Stable, n_seed=16, **kw)
    bu = grow_branch(t, second, BranchKind.Unstable, n_seed=23, **kw)
    cs = diagonal_crossing(bs)
    cu = diagonal_crossing(bu)
    if cs is None or cu is None:
        raise MissingCrossing("a branch does not reach the diagonal")
    delta = math.sqrt(2.0) * (cs.point.d_left - cu.point.d_left)
    if swap:
        delta = -delta
    return Splitting(delta, cs.point, cu.point, cs.angle, cu.angle)


def branch_avoids_curves(t: Table, branch: ManifoldBranch, n: int = 2001) -> dict:
    """Minimum distance from the branch polyline to C_prl and to each singular curve."""
    pts = branch.polyline.points
    if len(pts) == 0:
        pts = branch.base.as_array()[None, :]
    out = {}
    prl = curve_C(t, CurveKind.Prl, n)
    out["C_prl"] = float(min(nearest_distance(pts, seg).min() for seg in prl.meta["segments"]))
    for cid in SingularCurveId:
        c = gm.singular_curve(t, cid, n)
        out[cid.value] = float(nearest_distance(pts, c.points).min())
    return out


def invariance_error(branch: ManifoldBranch, extra: int = 2) -> float:
    """Max distance from G(polyline) to the branch extended by ``extra`` steps."""
    pts = branch.polyline.points
    sig = branch.polyline.param
    if len(pts) < 2:
        return 0.0
    u, v = gm.apply_xy(branch.b, branch.map_kind, pts[:, 0], pts[:, 1])
    img = np.column_stack([u, v])
    ext_sig = np.concatenate([sig, np.linspace(sig[-1], sig[-1] + extra, 200 * extra)[1:]])
    ext = branch.evaluate(ext_sig)
    good = np.all(np.isfinite(ext), axis=1)
    ext = ext[good]
    img = img[np.all(np.isfinite(img), axis=1)]
    return float(nearest_distance(img[::max(1, len(img) // 400)], ext).max())
