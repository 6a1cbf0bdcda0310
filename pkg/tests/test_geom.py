import math

import pytest
from hypothesis import given, strategies as st

from portalgon import geom
from portalgon.geom import (IDENTITY, Degenerate, Isometry, LengthMismatch, Segment,
                            circumcircle, compose, glue_isometry, reflection_x, rotation,
                            translation)

coord = st.floats(-100, 100, allow_nan=False)
point = st.tuples(coord, coord)
angle = st.floats(-math.pi, math.pi, allow_nan=False)


@st.composite
def isometries(draw):
    g = compose(translation(draw(point)), rotation(draw(angle)))
    if draw(st.booleans()):
        g = compose(g, reflection_x())
    return g


def test_compose_identity():
    assert compose(IDENTITY, IDENTITY).is_close(IDENTITY)


def test_compose_quarter_turns():
    assert compose(rotation(math.pi / 2), rotation(math.pi / 2)).is_close(rotation(math.pi), 1e-12)


def test_reflection_involution():
    assert compose(reflection_x(), reflection_x()).is_close(IDENTITY)


def test_glue_identity():
    g = glue_isometry(Segment((0, 0), (1, 0)), Segment((0, 0), (1, 0)), False)
    assert g.is_close(IDENTITY, 1e-12)


def test_glue_translation():
    g = glue_isometry(Segment((0, 0), (1, 0)), Segment((0, 1), (1, 1)), False)
    assert g.is_close(translation((0, 1)), 1e-12)


def test_glue_rotation():
    g = glue_isometry(Segment((0, 0), (2, 0)), Segment((5, 0), (5, 2)), False)
    x, y = g((1, 0))
    assert abs(x - 5) < 1e-12 and abs(y - 1) < 1e-12
    assert not g.orientation_reversing


def test_glue_flip_reverses():
    g = glue_isometry(Segment((0, 0), (1, 0)), Segment((0, 0), (1, 0)), True)
    assert g.orientation_reversing
    assert g((0.5, 1)) == pytest.approx((0.5, -1))


def test_glue_length_mismatch():
    with pytest.raises(LengthMismatch):
        glue_isometry(Segment((0, 0), (1, 0)), Segment((0, 0), (2, 0)), False)


def test_circumcircle_right_triangle():
    c = circumcircle((0, 0), (1, 0), (0, 1))
    assert c.center == pytest.approx((0.5, 0.5))
    assert c.radius == pytest.approx(math.sqrt(2) / 2)


def test_circumcircle_derived():
    c = circumcircle((0, 0), (2, 0), (1, 1))
    assert c.center == pytest.approx((1, 0), abs=1e-12)
    assert c.radius == pytest.approx(1)


def test_circumcircle_collinear():
    with pytest.raises(Degenerate):
        circumcircle((0, 0), (1, 0), (2, 0))


def test_segment_nonzero():
    with pytest.raises(Degenerate):
        Segment((1, 1), (1, 1))


def test_point_in_polygon_codes():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert geom.point_in_polygon((0.5, 0.5), sq) == 1
    assert geom.point_in_polygon((1, 0.5), sq, 1e-12) == 0
    assert geom.point_in_polygon((2, 0.5), sq) == -1


def test_polygon_simple():
    assert geom.polygon_is_simple([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert not geom.polygon_is_simple([(0, 0), (1, 1), (1, 0), (0, 1)])


@given(isometries(), point, point)
def test_isometry_preserves_distance(g, p, q):
    assert g.is_orthogonal(1e-12)
    d = geom.dist(p, q)
    assert abs(geom.dist(g(p), g(q)) - d) <= 1e-9 * max(1.0, d)


@given(isometries(), isometries(), isometries(), point)
def test_compose_associative(f, g, h, p):
    a = compose(f, compose(g, h))
    b = compose(compose(f, g), h)
    assert a.is_close(b, 1e-9 * 300)
    assert geom.dist(a(p), f(g(h(p)))) <= 1e-9 * 300


@given(isometries(), isometries())
def test_compose_orientation_xor(g, h):
    assert compose(g, h).orientation_reversing == (g.orientation_reversing != h.orientation_reversing)


@given(point, angle, point, angle, st.floats(0.1, 10), st.booleans())
def test_glue_inverse(a, t1, c, t2, length, flip):
    src = Segment(a, (a[0] + length * math.cos(t1), a[1] + length * math.sin(t1)))
    dst = Segment(c, (c[0] + length * math.cos(t2), c[1] + length * math.sin(t2)))
    g = glue_isometry(src, dst, flip)
    assert geom.dist(g(src.a), dst.a) <= 1e-9 * 300 and geom.dist(g(src.b), dst.b) <= 1e-9 * 300
    assert g.inverse().is_close(glue_isometry(dst, src, flip), 1e-9 * 300)


@given(point, point, point)
def test_circumcircle_equidistant(a, b, c):
    try:
        circ = circumcircle(a, b, c)
    except Degenerate:
        return
    for x in (a, b, c):
        assert abs(geom.dist(x, circ.center) - circ.radius) <= 1e-6 * circ.radius
