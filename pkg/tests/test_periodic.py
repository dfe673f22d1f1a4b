import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lemonbilliard import billiard_core as bc
from lemonbilliard import genmap as gm
from lemonbilliard import periodic as pd
from lemonbilliard.errors import DomainError
from lemonbilliard.genmap import GenMapKind as K
from lemonbilliard.geometry import LineState, Table
from lemonbilliard.periodic import Stability


def test_classify_band():
    assert pd.classify(0.3) == Stability.Elliptic
    assert pd.classify(-1.0 - 5e-9) == Stability.Parabolic
    assert pd.classify(1.2) == Stability.Hyperbolic


def test_o2():
    o = pd.orbit_O2(Table(1.5))
    assert o.multiplier_half_trace == pytest.approx(-0.5, abs=1e-12)
    assert o.points_line == [LineState(0.0, 0.0)]
    o = pd.orbit_O2(Table(1.9))
    assert o.multiplier_half_trace == pytest.approx(0.62, abs=1e-12)
    assert o.classification == Stability.Elliptic
    assert np.allclose(pd.tangent_matrix_O2(Table(1.7)), [[-0.7, 0.3], [-1.7, -0.7]])


def test_f_values():
    assert pd.f_trace(1.5) == pytest.approx(1.0, abs=1e-12)
    assert pd.e0_coord(1.5) == 0.0
    assert pd.e0_coord(1.6) == pytest.approx(0.552771, abs=1e-6)
    assert pd.p0_coord(1.6) == pytest.approx(0.744023, abs=1e-6)


@given(st.floats(1.51, 1.7))
def test_f_prime_matches_difference(b):
    h = 1e-6
    fd = (pd.f_trace(b + h) - pd.f_trace(b - h)) / (2 * h)
    assert pd.f_trace_prime(b) == pytest.approx(fd, rel=1e-6, abs=1e-6)


@given(st.floats(1.501, 1.70))
def test_trace_ell_equals_f(b):
    assert pd.trace_ell(b) == pytest.approx(pd.f_trace(b), abs=1e-10)


def test_hyperbolic_excess_vanishes_at_threshold():
    assert pd.hyperbolic_trace_excess(1.5) == pytest.approx(0.0, abs=1e-15)
    t = Table(1.5 + 1e-12)
    assert math.cos(pd.hyperbolic6_start(t).phi) == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("b", [1.52, 1.58, 1.61])
def test_elliptic_orbit(b):
    t = Table(b)
    o = pd.orbit_elliptic6(t)
    assert o.classification == Stability.Elliptic
    assert o.multiplier_half_trace == pytest.approx(pd.f_trace(b))
    assert len(o.points_angular) == 6
    e0 = o.points_line[0]
    assert gm.apply(t, K.Theta, e0).as_array() == pytest.approx(e0.as_array(), abs=1e-10)


def test_elliptic_orbit_domain():
    with pytest.raises(DomainError):
        pd.orbit_elliptic6(Table(1.5))
    o = pd.orbit_elliptic6(Table(1.65))
    assert o.points_angular is None
    assert o.classification == Stability.Hyperbolic


@pytest.mark.parametrize("b", [1.51, 1.6, 1.7])
def test_hyperbolic_orbit(b):
    t = Table(b)
    o = pd.orbit_hyperbolic6(t)
    assert o.classification == Stability.Hyperbolic
    assert len(o.points_line) == 6
    assert o.points_line[0] == pd.P0(t)
    assert o.points_line[3].as_array() == pytest.approx(pd.Q0(t).as_array(), abs=1e-12)
    x = o.points_angular[0]
    y = bc.iterate(t, x, 6)[-1]
    assert (y.phi, y.theta) == pytest.approx((x.phi, x.theta), abs=1e-10)
    with pytest.raises(DomainError):
        pd.orbit_hyperbolic6(Table(1.75))


def test_b_crit():
    b = pd.find_b_crit()
    assert b == pytest.approx(1.63477, abs=5e-5)
    assert pd.f_trace(b) == pytest.approx(-1.0, abs=1e-12)
    assert pd.classify(pd.f_trace(b)) == Stability.Parabolic
    # independent matrix route: half trace of D Psi J at E0
    t = Table(b)
    m = gm.jacobian(t, K.Psi, pd.E0(t)) @ np.array([[0.0, 1.0], [1.0, 0.0]])
    assert 0.5 * np.trace(m) == pytest.approx(-1.0, abs=1e-7)


@given(st.floats(1.501, 1.705))
def test_eigendata_product_and_slopes(b):
    t = Table(b)
    ed = pd.hyperbolic_eigendata(t)
    assert ed["lambda_s"] * ed["lambda_u"] == pytest.approx(1.0, abs=1e-10)
    assert ed["slope_u"] < ed["slope_s"] < 0


@pytest.mark.parametrize("b", [1.52, 1.6, 1.7])
def test_eigendata_matches_numeric_jacobian(b):
    t = Table(b)
    ed = pd.hyperbolic_eigendata(t)
    w, v = np.linalg.eig(gm.jacobian(t, K.Theta, pd.P0(t)))
    order = np.argsort(np.abs(w))
    slopes = [v[1, i] / v[0, i] for i in order]
    assert slopes == pytest.approx([ed["slope_s"], ed["slope_u"]], abs=1e-6)
    assert np.abs(w[order]) == pytest.approx([ed["lambda_s"] ** 2, ed["lambda_u"] ** 2], rel=1e-8)


def test_gamma_vanishes_at_eta_one():
    b = math.sqrt(2.25 + 1e-12)
    ed = pd.hyperbolic_eigendata(Table(b))
    assert abs(ed["Gamma"]) < 1e-9
    assert ed["slope_s"] == pytest.approx(ed["slope_u"], abs=1e-3)


def test_newton():
    t = Table(1.6)
    e0 = pd.E0(t)
    x = pd.newton_fixed_point(t, K.Theta, LineState(e0.d_left + 1e-3, e0.d_right - 2e-3))
    assert x.as_array() == pytest.approx(e0.as_array(), abs=1e-12)
    x = pd.newton_fixed_point(t, K.Theta, LineState(0.01, 0.75))
    assert x.as_array() == pytest.approx(pd.P0(t).as_array(), abs=1e-12)
    x = pd.newton_fixed_point(t, K.Theta, LineState(0.01, -0.01))
    assert x.as_array() == pytest.approx([0.0, 0.0], abs=1e-12)


def test_exhaustive_empty_region():
    assert pd.exhaustive_theta_fixed_points(Table(1.6), region=(0.2, 0.1, 0.0, 0.5)) == []
    assert pd.exhaustive_theta_fixed_points(Table(1.6), grid=0) == []


def test_exhaustive_small_grid_finds_E0():
    t = Table(1.56)
    pts = pd.exhaustive_theta_fixed_points(t, grid=60)
    assert any(np.allclose(p.as_array(), pd.E0(t).as_array(), atol=1e-9) for p in pts)


@pytest.mark.parametrize("b", [1.64, 1.66, 1.675])
def test_bifurcated_points(b):
    t = Table(b)
    e1, e2 = pd.bifurcated_points(t)
    assert e1.d_left > pd.e0_coord(b) > e2.d_left
    for k in (K.Phi, K.Psi):
        assert gm.apply(t, k, e1).as_array() == pytest.approx(e2.as_array(), abs=1e-9)
    assert gm.apply(t, K.Theta, e1).as_array() == pytest.approx(e1.as_array(), abs=1e-9)


def test_bifurcated_points_need_b_crit():
    with pytest.raises(DomainError):
        pd.bifurcated_points(Table(1.6))
