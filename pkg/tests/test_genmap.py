import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from lemonbilliard import billiard_core as bc
from lemonbilliard import genmap as gm
from lemonbilliard import parallel as pl
from lemonbilliard import periodic as pd
from lemonbilliard.errors import Branched, CornerHit, OutOfDomain
from lemonbilliard.genmap import GenMapKind as K
from lemonbilliard.genmap import SingularCurveId as S
from lemonbilliard.geometry import Arc, AngularState, LineState, Table, angular_to_line, heading

bs = st.floats(1.505, 1.705)
coords = st.floats(-1.0, 1.0)


def _in_domain(b, x, y):
    return bool(gm.in_domain_xy(b, x, y))


def _safe(b, x, y, margin=1e-6):
    if not _in_domain(b, x, y):
        return False
    for f in (gm.L_xy, gm.R_xy):
        u, v = f(b, x, y)
        if not b * b - (v - u) ** 2 > margin:
            return False
    return True


def test_origin_fixed():
    t = Table(1.6)
    for k in K:
        assert gm.apply(t, k, LineState(0.0, 0.0)) == LineState(0.0, 0.0)


def test_L_point_at_b_max():
    y = gm.apply_L(Table(gm.b_max()), LineState(0.6, 0.6))
    assert y.d_left == pytest.approx(-1.03882, abs=1e-5)
    assert y.d_right == 0.6


@given(bs, coords, coords)
def test_involutions_and_symmetries(b, x, y):
    assume(_safe(b, x, y))
    t = Table(b)
    l = LineState(x, y)
    for f in (gm.apply_L, gm.apply_R):
        back = f(t, f(t, l, True), True)
        assert back.d_left == pytest.approx(x, abs=1e-12)
        assert back.d_right == pytest.approx(y, abs=1e-12)
        neg = f(t, l.reversed(), True)
        img = f(t, l, True)
        assert neg.d_left == pytest.approx(-img.d_left, abs=1e-12)
        assert neg.d_right == pytest.approx(-img.d_right, abs=1e-12)
    irl = gm.apply_I(gm.apply_R(t, gm.apply_I(l), True))
    lx = gm.apply_L(t, l, True)
    assert irl.d_left == pytest.approx(lx.d_left, abs=1e-12)
    assert irl.d_right == pytest.approx(lx.d_right, abs=1e-12)


@given(bs, coords, coords)
def test_phi_is_conjugate_of_psi(b, x, y):
    t = Table(b)
    l = LineState(x, y)
    try:
        a = gm.apply(t, K.Phi, l)
        c = gm.apply_I(gm.apply(t, K.Psi, gm.apply_I(l)))
    except (OutOfDomain, Branched):
        assume(False)
    assert a.d_left == pytest.approx(c.d_left, abs=1e-12)
    assert a.d_right == pytest.approx(c.d_right, abs=1e-12)


@given(bs)
def test_R_fixes_its_fixed_locus(b):
    t = Table(b)
    for s in np.linspace(-0.9, 0.9, 7):
        l = LineState(float(s), float((1 - b) * s))
        y = gm.apply_R(t, l)
        assert y.d_left == l.d_left
        assert y.d_right == pytest.approx(l.d_right, abs=1e-12)


def test_vectorised_matches_scalar(rng):
    b = 1.58
    t = Table(b)
    x = rng.uniform(-0.9, 0.9, (200, 2))
    ok = gm.in_domain_xy(b, x[:, 0], x[:, 1])
    u, v = gm.apply_xy(b, K.Theta, x[ok, 0], x[ok, 1])
    for p, a, c in zip(x[ok], u, v):
        try:
            y = gm.apply(t, K.Theta, LineState.of(p))
        except (OutOfDomain, Branched):
            continue
        if np.isfinite(a):
            assert (y.d_left, y.d_right) == pytest.approx((a, c), abs=1e-14)


@pytest.mark.parametrize("b", np.linspace(1.51, 1.69, 7))
def test_theta_fixes_E0(b):
    t = Table(b)
    y = gm.apply(t, K.Theta, pd.E0(t))
    assert np.allclose(y.as_array(), pd.E0(t).as_array(), atol=1e-10)


def test_D_phi_at_E0():
    t = Table(1.6)
    v = gm.jacobian(t, K.Phi, pd.E0(t)) @ np.array([1.0, 1.0])
    assert v == pytest.approx([1.37815, -0.408], abs=1e-5)


def test_errors():
    t = Table(1.6)
    with pytest.raises(OutOfDomain) as e:
        gm.apply_L(t, LineState(-0.95, 0.95))
    with pytest.raises(Branched):
        gm.apply_L(t, LineState(0.3 - 1.6, 0.3))
    with pytest.raises(OutOfDomain) as e:
        gm.apply(t, K.Phi, LineState(0.2, 0.2 + 1.7))
    assert e.value.stage == 0


def test_branched_allowed_on_request():
    t = Table(1.6)
    y = gm.apply_L(t, LineState(0.3 - 1.6, 0.3), allow_branch=True)
    assert math.isfinite(y.d_left)


# Jacobians

def _fd(t, k, l, h=1e-7):
    m = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        m[:, j] = (gm.apply(t, k, LineState.of(l.as_array() + e)).as_array()
                   - gm.apply(t, k, LineState.of(l.as_array() - e)).as_array()) / (2 * h)
    return m


@given(bs, st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
def test_jacobian_matches_finite_differences(b, x, y):
    assume(_safe(b, x, y, 1e-2))
    t = Table(b)
    l = LineState(x, y)
    for k in (K.L, K.R):
        j = gm.jacobian(t, k, l)
        assert np.allclose(j, _fd(t, k, l), rtol=1e-5, atol=1e-5)


@given(bs, st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
def test_L_determinant_is_heading_ratio(b, x, y):
    assume(_safe(b, x, y, 1e-2))
    t = Table(b)
    l = LineState(x, y)
    d = np.linalg.det(gm.jacobian(t, K.L, l))
    ratio = gm.cos_heading(t, gm.apply_L(t, l)) / gm.cos_heading(t, l)
    assert d == pytest.approx(-ratio, rel=1e-9)
    ll = gm.jacobian(t, K.L, gm.apply_L(t, l)) @ gm.jacobian(t, K.L, l)
    assert np.allclose(ll, np.eye(2), atol=1e-10)


@pytest.mark.parametrize("b", [1.52, 1.58, 1.63, 1.68])
def test_theta_jacobian_unimodular_at_fixed_points(b):
    t = Table(b)
    for p in (pd.E0(t), pd.P0(t), pd.Q0(t)):
        assert np.linalg.det(gm.jacobian(t, K.Theta, p)) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("b", [1.52, 1.58, 1.63, 1.68])
def test_psi_jacobian_closed_forms(b):
    t = Table(b)
    assert np.allclose(gm.jacobian(t, K.Psi, pd.E0(t)), pd.E0_jacobian_closed(b), rtol=1e-10)
    assert np.allclose(gm.jacobian(t, K.Psi, pd.Q0(t)), pd.Q0_jacobian_closed(b), rtol=1e-10)


def test_jacobian_xy_matches_scalar():
    b = 1.57
    t = Table(b)
    pts = np.array([[0.1, 0.2], [0.3, -0.1], [-0.2, 0.4]])
    _, _, m = gm.jacobian_xy(b, K.Theta, pts[:, 0], pts[:, 1])
    for p, mj in zip(pts, m):
        assert np.allclose(mj, gm.jacobian(t, K.Theta, LineState.of(p)), atol=1e-12)


# singular curves

@given(bs)
def test_S0_on_S1plus_and_S2plus(b):
    t = Table(b)
    dl, dr = gm.S0
    assert dl - dr == pytest.approx(b * (1 - 2 * dr * dr), abs=1e-15)
    for cid in (S.S1plus, S.S2plus):
        c = gm.singular_curve(t, cid, 2001).points
        assert pl.nearest_distance(gm.S0[None, :], c)[0] < 1e-7


@given(bs)
def test_L_maps_S1_onto_branched_lines(b):
    t = Table(b)
    for cid, sgn in ((S.S1plus, 1), (S.S1minus, -1)):
        c = gm.singular_curve(t, cid, 50).points
        u, v = gm.L_xy(b, c[:, 0], c[:, 1])
        assert np.allclose(v - u, sgn * b, atol=1e-10)


@given(bs)
def test_partial_derivative_vanishes_on_S1(b):
    t = Table(b)
    h = 1e-6
    for cid in (S.S1plus, S.S1minus):
        for p in gm.singular_curve(t, cid, 12).points[1:-1]:
            f = lambda x: gm.L_xy(b, x, p[1])[0]
            fd = (f(p[0] + h) - f(p[0] - h)) / (2 * h)
            assert abs(fd) < 1e-5
            assert abs(gm.partial_dl(t, LineState.of(p))) < 1e-8


def test_singular_curve_needs_two_samples():
    with pytest.raises(ValueError):
        gm.singular_curve(Table(1.6), S.S1plus, 1)


# fixed loci

def test_fixed_locus_of_phi_crosses_diagonal_three_times():
    b = 1.6
    t = Table(b)
    c = gm.fixed_locus(t, K.Phi, 20001).points
    g = c[:, 0] - c[:, 1]
    idx = np.where(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]
    xs = sorted({round(float(c[i, 0]), 3) for i in idx})
    e0 = pd.e0_coord(b)
    assert xs == pytest.approx([-e0, 0.0, e0], abs=2e-3)


@pytest.mark.parametrize("b", [1.55, 1.6, 1.65])
def test_fixed_locus_points_are_fixed(b):
    t = Table(b)
    for k in (K.L, K.R, K.Phi, K.Psi):
        c = gm.fixed_locus(t, k, 301).points
        u, v = gm.apply_xy(b, k, c[:, 0], c[:, 1])
        ok = np.isfinite(u)
        assert ok.mean() > 0.5
        assert np.max(np.abs(np.column_stack([u, v])[ok] - c[ok])) < 1e-9
        assert pl.nearest_distance(np.zeros((1, 2)), c)[0] < 1e-2


# monotonicity witness

def test_witness_signs():
    b = 1.6
    t = Table(b)
    c = pl.curve_C(t, pl.CurveKind.Phi, 41).points
    for p in c[3:-3]:
        assert abs(gm.monotonicity_witness(t, LineState.of(p))) < 1e-8
    e0 = pd.E0(t).as_array()
    out = e0 + 1e-3 * np.array([1.0, 1.0]) / math.sqrt(2)
    assert gm.monotonicity_witness(t, LineState.of(out)) > 0
    assert gm.monotonicity_witness(t, LineState(0.2, 0.2)) < 0


# agreement with the true billiard map

def test_generalized_maps_match_billiard(rng):
    t = Table(1.56)
    n = 0
    while n < 200:
        x = AngularState(Arc.RIGHT, rng.uniform(-0.9, 0.9) * t.corner_angle, rng.uniform(0.3, math.pi - 0.3))
        if heading(x) > 0:
            continue
        try:
            y = bc.billiard_step(t, x).end
        except CornerHit:
            continue
        if y.arc != Arc.LEFT:
            continue
        l0 = angular_to_line(t, x)
        l1 = angular_to_line(t, y)
        z = gm.apply_L(t, l0, True)
        assert (z.d_left, z.d_right) == pytest.approx((l1.d_left, l1.d_right), abs=1e-10)
        n += 1


def test_fgf_closed_solutions_outside_interval():
    # the right-hand residual vanishes at b_max, an endpoint outside the open interval
    from lemonbilliard.constants import fgf_residual
    assert np.nanmin(fgf_residual(gm.b_max(), 2001)) < 1e-12
    assert np.nanmin(fgf_residual(1.6, 2001)) > 0.1
