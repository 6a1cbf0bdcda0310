import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from portalgon import corpus
from portalgon.envelope import ApexedFunction
from portalgon.geom import IDENTITY, compose, translation
from portalgon.model import Portal, PortalEdgeRef, Portalgon, SurfacePoint
from portalgon.unfold import (BudgetExceeded, CrossingElement, EmptyInterval, IncoherentSignature,
                              SearchBudget, Signature, crossing_profile, distance_function,
                              oracle_distances, oracle_shortest_path, unfold_along)

LEFT = PortalEdgeRef(0, 3, True)
BOTTOM = PortalEdgeRef(0, 0, False)


def X(h):
    return CrossingElement(h)


def torus_closed_form(a, b):
    return min(math.hypot(b[0] - a[0] + i, b[1] - a[1] + j) for i in (-1, 0, 1) for j in (-1, 0, 1))


def window_instance():
    """Source in a thin wedge whose tip is a 0.2-wide portal opening into a wide quad."""
    f0 = [(0, 0), (1, -0.1), (1, 0.1)]
    f1 = [(0, -0.1), (1, -2), (3, -2), (3, 2), (0, 0.1)]
    return Portalgon([f0, f1], [Portal(PortalEdgeRef(0, 1, False), PortalEdgeRef(1, 4, True))])


def test_unfold_empty_signature():
    assert unfold_along(corpus.torus(), Signature(0), 0).is_close(IDENTITY)


def test_unfold_one_crossing():
    g = unfold_along(corpus.torus(), Signature(0, (X(LEFT),)), 0)
    assert g.is_close(translation((1, 0)), 1e-12)


def test_unfold_two_crossings():
    g = unfold_along(corpus.torus(), Signature(0, (X(LEFT), X(BOTTOM))), 0)
    assert g.is_close(translation((1, 1)), 1e-12)


def test_unfold_incoherent():
    p = window_instance()
    with pytest.raises(IncoherentSignature):
        unfold_along(p, Signature(1, (X(PortalEdgeRef(0, 1, False)),)), 1)


def test_distance_function_full_edge():
    p = Portalgon([[(0, 0), (1, 0), (0, 1)]], [])
    f = distance_function(p, Signature(0), PortalEdgeRef(0, 1, False), SurfacePoint(0, (0, 0)))
    assert f.apex == (0, 0) and f.offset == 0
    assert (f.domain.lo, f.domain.hi) == (0.0, 1.0)


def test_distance_function_window():
    p = window_instance()
    sig = Signature(0, (X(PortalEdgeRef(0, 1, False)),))
    f = distance_function(p, sig, PortalEdgeRef(1, 2, False), SurfacePoint(0, (0.2, 0.0)))
    # rays from (-0.8, 0) through x = 0, |y| <= 0.1 reach x = 3 at |y| <= 0.475
    assert f.domain.lo == pytest.approx((2 - 0.475) / 4, abs=1e-9)
    assert f.domain.hi == pytest.approx((2 + 0.475) / 4, abs=1e-9)
    assert f.apex == pytest.approx((-0.8, 0.0))
    assert f.value(0.5) == pytest.approx(3.8)


def test_distance_function_empty():
    p = window_instance()
    sig = Signature(0, (X(PortalEdgeRef(0, 1, False)),))
    with pytest.raises(EmptyInterval):
        distance_function(p, sig, PortalEdgeRef(1, 1, False), SurfacePoint(0, (0.2, 0.0)))


def test_oracle_same_point():
    s = SurfacePoint(0, (0.3, 0.3))
    path = oracle_shortest_path(corpus.torus(), s, s)
    assert path.length == 0 and path.polyline == []


def test_oracle_torus_canonical():
    path = oracle_shortest_path(corpus.torus(), SurfacePoint(0, (0.25, 0.25)), SurfacePoint(0, (0.75, 0.75)))
    assert abs(path.length - math.sqrt(0.5)) <= 1e-12


@pytest.mark.parametrize("d", [0.5, 1.4, 1.6, 2.5])
def test_oracle_cylinder(d):
    w = 3.0
    x1 = 0.2 + d if 0.2 + d < w else 0.2 + d - w
    path = oracle_shortest_path(corpus.cylinder(w), SurfacePoint(0, (0.2, 0.5)), SurfacePoint(0, (x1, 0.5)))
    assert abs(path.length - min(d, w - d)) <= 1e-12


def test_crossing_profile_single_fragment():
    path = oracle_shortest_path(corpus.square(), SurfacePoint(0, (0.1, 0.1)), SurfacePoint(0, (0.9, 0.8)))
    assert crossing_profile(path) == {0: 1}


def test_crossing_profile_spiral():
    sp = corpus.spiral(7)
    path = oracle_shortest_path(sp.portalgon, sp.s, sp.t)
    assert crossing_profile(path) == {0: 8}
    assert path.length == pytest.approx(sp.closed_form(sp.s.location, sp.t.location), rel=1e-12)


def test_crossing_profile_lowerbound():
    lb = corpus.lowerbound(3, 6)
    path = oracle_shortest_path(lb.portalgon, lb.s, lb.t)
    prof = crossing_profile(path)
    assert max(prof.values()) >= lb.h


def test_path_invariants():
    sp = corpus.spiral(5)
    path = oracle_shortest_path(sp.portalgon, sp.s, sp.t)
    assert path.total_length() == pytest.approx(path.length, rel=1e-9)
    # straight through each crossing: consecutive pieces are collinear after gluing
    p = sp.portalgon
    g = p.glue(p.portals[0].a, p.portals[0].b)
    for a, b in zip(path.polyline, path.polyline[1:]):
        u = (a.points[-1][0] - a.points[0][0], a.points[-1][1] - a.points[0][1])
        v = (b.points[-1][0] - b.points[0][0], b.points[-1][1] - b.points[0][1])
        for iso in (g, g.inverse()):
            w = iso.apply_vector(u)
            if abs(w[0] * v[1] - w[1] * v[0]) <= 1e-9 * math.hypot(*u) * math.hypot(*v):
                break
        else:
            pytest.fail("path bends at a crossing")


def test_budget_exceeded_carries_upper_bound():
    sp = corpus.spiral(40)
    with pytest.raises(BudgetExceeded) as ei:
        oracle_shortest_path(sp.portalgon, sp.s, sp.t, SearchBudget(max_signature=10))
    exact = sp.closed_form(sp.s.location, sp.t.location)
    assert ei.value.upper_bound is None or ei.value.upper_bound >= exact - 1e-12


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_oracle_torus_matches_closed_form(seed):
    rng = random.Random(seed)
    p = corpus.torus()
    pts = corpus.random_points(p, rng, 11)
    ds = oracle_distances(p, pts[0], pts[1:])
    for q, d in zip(pts[1:], ds):
        assert abs(d - torus_closed_form(pts[0].location, q.location)) <= 1e-12


@settings(max_examples=8, deadline=None)
@given(st.sampled_from(["torus", "cylinder", "pyramid", "mobius", "lshape", "random_split"]),
       st.integers(0, 10 ** 6))
def test_oracle_symmetry_triangle_inequality(name, seed):
    p = corpus.named()[name]
    a, b, c = corpus.random_points(p, random.Random(seed), 3)
    ab, ac = oracle_distances(p, a, [b, c])
    ba, bc = oracle_distances(p, b, [a, c])
    assert abs(ab - ba) <= 1e-9 * max(1, ab)
    assert ac <= ab + bc + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.lists(st.sampled_from([LEFT, BOTTOM, PortalEdgeRef(0, 1, False), PortalEdgeRef(0, 2, True)]),
                max_size=6))
def test_unfold_reverse_is_identity(halves):
    p = corpus.torus()
    fwd = unfold_along(p, Signature(0, tuple(X(h) for h in halves)), 0)
    back = [p.twin(h.fragment, h.edge_index)[2] for h in reversed(halves)]
    rev = unfold_along(p, Signature(0, tuple(X(h) for h in back)), 0)
    assert compose(rev, fwd).is_close(IDENTITY, 1e-9)


@settings(max_examples=1000, deadline=None)
@given(st.tuples(*[st.floats(-5, 5)] * 3), st.tuples(*[st.floats(-5, 5)] * 3))
def test_apexed_pairs_cross_at_most_twice(a, b):
    f = ApexedFunction(a[0], a[1], abs(a[2]), -10, 10)
    g = ApexedFunction(b[0], b[1], abs(b[2]), -10, 10)
    xs = [-10 + 20 * i / 2000 for i in range(2001)]
    d = [f.value(x) - g.value(x) for x in xs]
    signs = [1 if v > 1e-12 else -1 for v in d if abs(v) > 1e-12]
    changes = sum(1 for u, v in zip(signs, signs[1:]) if u != v)
    assert changes <= 2
