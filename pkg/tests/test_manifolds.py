import math

import numpy as np
import pytest

from lemonbilliard import genmap as gm
from lemonbilliard import manifolds as mf
from lemonbilliard.errors import DomainError
from lemonbilliard.geometry import Table
from lemonbilliard.genmap import CurveTrace
from lemonbilliard.periodic import P0, Q0, hyperbolic_eigendata

# diagonal crossing of the stable branch of P0 at b = 1.51, frozen from a run
# with both branches grown independently (they agree to 5e-17)
CROSS_151 = 0.21520757364290352


@pytest.fixture(scope="module")
def t151():
    return Table(1.51)


@pytest.fixture(scope="module")
def stable_p0(t151):
    return mf.grow_branch(t151, "P0", "Stable", until_diagonal=True)


def test_seed_near_base(stable_p0):
    pts = stable_p0.polyline.points
    d = np.linalg.norm(pts[0] - stable_p0.base.as_array())
    assert d == pytest.approx(mf.SEED_OFFSET, rel=1e-9)


def test_spacing(stable_p0):
    pts = stable_p0.polyline.points
    gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    assert gaps.max() <= mf.MAX_GAP * (1 + 1e-9)


def test_invariance(stable_p0):
    assert mf.invariance_error(stable_p0) < 1e-6


def test_param_is_monotone(stable_p0):
    assert np.all(np.diff(stable_p0.polyline.param) > 0)


@pytest.mark.parametrize("kind", ["Stable", "Unstable"])
def test_growth_factor(t151, kind):
    br = mf.grow_branch(t151, "P0", kind, arc_length_budget=1e-3)
    ed = hyperbolic_eigendata(t151)
    # one Theta is two Phi-type steps, so the factor is lambda squared
    mu = ed["lambda_u"] ** 2 if kind == "Unstable" else 1 / ed["lambda_s"] ** 2
    assert br.mu == pytest.approx(mu, rel=1e-12)
    a = br.evaluate(np.array([0.0, 1.0]))
    base = br.base.as_array()
    r = np.linalg.norm(a[1] - base) / np.linalg.norm(a[0] - base)
    assert r == pytest.approx(mu, rel=1e-4)


def test_eigen_directions_mirror(t151):
    vp, mp = mf.eigen_direction(t151, "P0", "Stable")
    vq, mq = mf.eigen_direction(t151, "Q0", "Unstable")
    assert vq == pytest.approx(vp[::-1])
    # lambda_s * lambda_u = 1, so both growth maps expand by the same factor
    assert mq == pytest.approx(mp, rel=1e-12)


def test_crossing_value(stable_p0):
    c = mf.diagonal_crossing(stable_p0)
    assert c.point.d_left == pytest.approx(CROSS_151, abs=1e-12)
    assert c.point.d_left == pytest.approx(c.point.d_right, abs=1e-14)


def test_splitting_at_151(t151):
    s = mf.splitting(t151)
    assert abs(s.delta) < 1e-12
    assert s.crossing_s.d_left == pytest.approx(CROSS_151, abs=1e-12)
    assert s.angle_defect < 1e-6


def test_splitting_swap_antisymmetric(t151):
    a = mf.splitting(t151)
    b = mf.splitting(t151, swap=True)
    assert abs(a.delta + b.delta) < 1e-12
    assert b.crossing_s.d_left == pytest.approx(b.crossing_u.d_left, abs=1e-12)


def test_seed_halving_stable(t151):
    a = mf.splitting(t151)
    b = mf.splitting(t151, seed_offset=mf.SEED_OFFSET / 2)
    assert abs(a.delta - b.delta) < 1e-12
    assert a.crossing_s.d_left == pytest.approx(b.crossing_s.d_left, abs=1e-12)


def test_branch_avoids_singular_curves():
    t = Table(1.55)
    br = mf.grow_branch(t, "Q0", "Unstable", until_diagonal=True)
    d = mf.branch_avoids_curves(t, br)
    for cid in gm.SingularCurveId:
        assert d[cid.value] > 1e-3


def test_empty_branch_distances(t151, stable_p0):
    br = mf.grow_branch(t151, "P0", "Stable", arc_length_budget=1e-3)
    br.polyline = CurveTrace(np.empty((0, 2)), np.empty(0))
    d = mf.branch_avoids_curves(t151, br)
    assert d["C_prl"] < 1e-9  # C_prl starts at P0
    assert mf.diagonal_crossing(br) is None


def test_truncated_branch_has_no_crossing(t151):
    br = mf.grow_branch(t151, "P0", "Stable", arc_length_budget=1e-2)
    assert mf.diagonal_crossing(br) is None


def test_domain():
    with pytest.raises(DomainError):
        mf.grow_branch(Table(1.5), "P0", "Stable")


def test_other_side_points_away(t151):
    a = mf.grow_branch(t151, "P0", "Stable", arc_length_budget=1e-3)
    b = mf.grow_branch(t151, "P0", "Stable", "Other", arc_length_budget=1e-3)
    base = a.base.as_array()
    assert np.dot(a.polyline.points[0] - base, b.polyline.points[0] - base) < 0
