import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lemonbilliard.errors import DomainError, NoIntersection
from lemonbilliard.geometry import (
    Arc,
    AngularState,
    LineState,
    Table,
    angular_to_line,
    base_point,
    heading,
    is_valid,
    line_to_angular,
)

bs = st.floats(1.4, 1.8)
fracs = st.floats(-0.999, 0.999)
thetas = st.floats(0.01, math.pi - 0.01)
arcs = st.sampled_from([Arc.LEFT, Arc.RIGHT])


def _state(t, arc, u, th):
    return AngularState(arc, u * t.corner_angle, th)


def test_table_rejects_bad_b():
    with pytest.raises(DomainError):
        Table(2.0)
    with pytest.raises(DomainError):
        Table(0.0)


@given(bs)
def test_corners_on_both_circles(b):
    t = Table(b)
    assert math.cos(t.corner_angle) == pytest.approx(b / 2, abs=1e-14)
    for c in t.corners:
        assert np.linalg.norm(c - t.o_left) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(c - t.o_right) == pytest.approx(1.0, abs=1e-12)


def test_axis_state_is_origin():
    t = Table(1.5)
    l = angular_to_line(t, AngularState(Arc.LEFT, 0.0, math.pi / 2))
    assert l.d_left == pytest.approx(0.0, abs=1e-15)
    assert l.d_right == pytest.approx(0.0, abs=1e-15)


@given(thetas)
def test_point_Br_lies_on_fixed_locus_of_R(th):
    t = Table(1.6)
    l = angular_to_line(t, AngularState(Arc.RIGHT, 0.0, th))
    assert l.d_right == pytest.approx((1 - t.b) * l.d_left, abs=1e-12)


@given(bs, arcs, fracs, thetas)
def test_left_reflection_has_d_right_minus_sin_normal_angle(b, arc, u, th):
    # theta_n is measured from the outer normal to the incoming ray, so theta_n = pi/2 - theta
    t = Table(b)
    th_n = math.pi / 2 - th
    l = angular_to_line(t, _state(t, Arc.LEFT, u, th))
    assert l.d_right == pytest.approx(-math.sin(th_n), abs=1e-12)
    assert angular_to_line(t, _state(t, Arc.LEFT, u, th), outgoing=False).d_right == pytest.approx(
        -math.sin(th_n), abs=1e-12)
    r = angular_to_line(t, _state(t, Arc.RIGHT, u, th))
    assert r.d_left == pytest.approx(-math.sin(th_n), abs=1e-12)


@given(bs, arcs, fracs, thetas)
def test_heading_angle(b, arc, u, th):
    t = Table(b)
    x = _state(t, arc, u, th)
    l = angular_to_line(t, x)
    v = base_point(t, x)
    from lemonbilliard.geometry import direction
    assert direction(x)[1] == pytest.approx((l.d_right - l.d_left) / b, abs=1e-12)
    assert is_valid(t, x)
    assert np.linalg.norm(v - t.center(arc)) == pytest.approx(1.0, abs=1e-12)


@given(bs, arcs, fracs, thetas)
def test_chart_round_trip(b, arc, u, th):
    t = Table(b)
    x = _state(t, arc, u, th)
    l = angular_to_line(t, x)
    recs = line_to_angular(t, l, arc, heading(x))
    hit = [r for r in recs if r.entering][0]
    assert hit.on_arc
    assert hit.state.phi == pytest.approx(x.phi, abs=1e-12)
    assert hit.state.theta == pytest.approx(x.theta, abs=1e-12)


def test_chart_round_trip_bulk(rng):
    worst = 0.0
    for b in np.linspace(1.41, 1.79, 20):
        t = Table(float(b))
        for _ in range(50):
            arc = Arc.LEFT if rng.random() < 0.5 else Arc.RIGHT
            x = _state(t, arc, rng.uniform(-0.999, 0.999), rng.uniform(0.01, math.pi - 0.01))
            rec = [r for r in line_to_angular(t, angular_to_line(t, x), arc, heading(x)) if r.entering][0]
            worst = max(worst, abs(rec.state.phi - x.phi), abs(rec.state.theta - x.theta))
    assert worst < 1e-12


def test_origin_line_hits_axis_points():
    t = Table(1.6)
    for arc in Arc:
        recs = line_to_angular(t, LineState(0.0, 0.0), arc)
        xs = sorted(r.point[0] for r in recs)
        c = t.center(arc)[0]
        assert xs == pytest.approx([c - 1, c + 1], abs=1e-15)
        for r in recs:
            assert abs(r.state.theta) == pytest.approx(math.pi / 2, abs=1e-15)


def test_no_intersection_beyond_unit_distance():
    t = Table(1.6)
    with pytest.raises(NoIntersection):
        line_to_angular(t, LineState(1.0, 0.5), Arc.RIGHT)


def test_near_tangent_line_gives_close_points():
    t = Table(1.6)
    recs = line_to_angular(t, LineState(1 - 1e-16, 0.9), Arc.RIGHT)
    assert np.linalg.norm(recs[0].point - recs[1].point) < 1e-6
