import math
import random

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from _support import distance_error
from portalgon import corpus, happy
from portalgon.model import Portal, PortalEdgeRef, Portalgon, SurfacePoint, check, validate
from portalgon.unfold import SearchBudget, crossing_profile, oracle_shortest_path


def tilted_pair(alpha, a=0.2, e=0.05, L=1.0):
    """Quadrilateral whose bottom edge is glued to a top edge leaning at ``alpha``.

    The top edge starts at ``(a, e)``, just above the start of the bottom edge.
    """
    t0 = (a, e)
    t1 = (a + L * math.cos(alpha), e + L * math.sin(alpha))
    return check(Portalgon([[(0.0, 0.0), (L, 0.0), t1, t0]],
                           [Portal(PortalEdgeRef(0, 0, False), PortalEdgeRef(0, 2, True))]))


def test_shift_parallel_spiral():
    sp = corpus.spiral(7)
    f, e = sp.portalgon.fragments[0], sp.portalgon.portals[0]
    sh = happy.compute_shift(f, e)
    assert sh.parallel and sh.alpha == 0
    assert sh.delta == pytest.approx(sp.delta, rel=1e-12)


def test_shift_angle():
    p = tilted_pair(math.pi / 3)
    sh = happy.compute_shift(p.fragments[0], p.portals[0])
    assert sh.alpha == pytest.approx(math.pi / 3, rel=1e-12)
    assert not sh.parallel


def test_shift_needs_one_fragment():
    p = corpus.lowerbound(2, 3).portalgon
    with pytest.raises(happy.NotSinglePortal):
        happy.compute_shift(p.fragments[0], p.portals[0])


def test_extremal_segments_translation():
    sp = corpus.spiral(5)
    f, e = sp.portalgon.fragments[0], sp.portalgon.portals[0]
    left, right = happy.extremal_connecting_segments(f, e)
    v = f.vertices
    assert left[0] == pytest.approx(v[0]) and left[1] == pytest.approx(v[3])
    assert right[0] == pytest.approx(v[1]) and right[1] == pytest.approx(v[2])


def test_extremal_segments_reversing_none():
    p = corpus.mobius()
    assert happy.extremal_connecting_segments(p.fragments[0], p.portals[0]) is None


@pytest.mark.parametrize("k", range(2, 9))
def test_angle_bound(k):
    rep = happy.analytic_bounds(tilted_pair(math.pi / k))
    assert rep.upper[0] == k + 1 and rep.rule[0] == "angle"


def test_sixty_degree_witness():
    p = tilted_pair(math.pi / 3)
    path = oracle_shortest_path(p, SurfacePoint(0, (0.62, 0.72)), SurfacePoint(0, (0.12, 0.007)))
    assert crossing_profile(path)[0] == 3
    assert happy.analytic_bounds(p).upper[0] == 4


def test_single_portal_edge_bound():
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    p = Portalgon([sq, sq], [Portal(PortalEdgeRef(0, 1, False), PortalEdgeRef(1, 3, True))])
    rep = happy.analytic_bounds(p)
    assert rep.upper == {0: 2, 1: 2} and rep.rule[1] == "single_portal_edge"


def test_happify_spiral_three_fragments():
    sp = corpus.spiral(8)
    q = happy.happify_single_portal(sp.portalgon)
    assert validate(q) == []
    assert len(q.fragments) <= 3


@pytest.mark.parametrize("h", [8, 64, 4096])
def test_happify_spiral_witness(h):
    sp = corpus.spiral(h)
    tr = happy.happify_transform(sp.portalgon)
    q = tr.portalgon
    path = oracle_shortest_path(q, tr.map_point(sp.s), tr.map_point(sp.t), SearchBudget(max_signature=400))
    assert path.length == pytest.approx(sp.closed_form(sp.s.location, sp.t.location), rel=1e-9)
    assert max(crossing_profile(path).values()) <= 5
    assert q.n_vertices <= 8 * sp.portalgon.n_vertices


def test_happify_estimate_with_adversarial_pairs():
    sp = corpus.spiral(30)
    tr = happy.happify_transform(sp.portalgon)
    extra = [(tr.map_point(sp.s), tr.map_point(sp.t))]
    rep = happy.estimate_happiness(tr.portalgon, samples=200, seed=3, extra_pairs=extra,
                                   budget=SearchBudget(max_signature=400))
    assert rep.pairs >= 200
    assert rep.h_lower <= 5


def test_estimate_consistent_with_bounds():
    sp = corpus.spiral(6)
    rep = happy.estimate_happiness(sp.portalgon, samples=100, seed=1)
    assert rep.consistent()
    assert rep.h_lower >= 1


def test_happify_two_cycles_unsupported():
    with pytest.raises(happy.UnsupportedTopology):
        happy.happify(corpus.two_cycle())


def test_happify_mobius_unchanged():
    p = corpus.mobius()
    q = happy.happify(p)
    assert q.fragments == p.fragments and q.portals == p.portals


def test_happify_tree_unchanged_distances():
    p = corpus.lshape()
    tr = happy.happify_transform(p)
    assert distance_error(p, tr.portalgon, tr.map_point) <= 1e-9


def test_rezero_parallel_preserves_distances():
    sp = corpus.spiral(12)
    tr = happy.rezero_transform(sp.portalgon)
    assert validate(tr.portalgon) == []
    assert distance_error(sp.portalgon, tr.portalgon, tr.map_point, reference=sp.closed_form) <= 1e-9


def test_rezero_quad_zero_shift():
    sp = corpus.spiral(12)
    f = happy.rezero_quad(sp.portalgon)
    q = happy.rezero_transform(sp.portalgon).portalgon
    assert q.fragments[0].vertices == f.vertices
    sh = happy.compute_shift(q.fragments[0], q.portals[0])
    assert abs(sh.delta) <= 1e-9


def test_rezero_rejects_non_quad():
    with pytest.raises(happy.NotQuadPortalPair):
        happy.rezero_quad(corpus.lowerbound(2, 3).portalgon)


def step_crossings(Z, limit=10 ** 5):
    """Walk the zero-shift ray copy by copy in extended precision."""
    ann, _ = happy._quad_annulus(Z)
    B, T = ann.B, ann.T
    with mpmath.workdps(50):
        g = ann.g.inverse()
        p, d = ann.S, ann.u
        for k in range(limit):
            t0 = (mpmath.mpf(T[0][0]), mpmath.mpf(T[0][1]))
            e = (T[1][0] - t0[0], T[1][1] - t0[1])
            den = d[0] * e[1] - d[1] * e[0]
            if den == 0:
                return k
            w = (t0[0] - p[0], t0[1] - p[1])
            s = (w[0] * e[1] - w[1] * e[0]) / den
            u = (w[0] * d[1] - w[1] * d[0]) / den
            if s <= 0 or not (-1e-13 <= u <= 1 + 1e-13):
                return k
            x = (p[0] + s * d[0], p[1] + s * d[1])
            p, d = g(x), g.vec(d)
    raise AssertionError("ray did not leave")


@pytest.mark.parametrize("h", [8, 64, 300])
def test_trace_matches_stepping(h):
    Z = corpus.spiral(h, tilt=0.01 / h).portalgon
    rt = happy.trace_ray_power(Z)
    assert rt.k == step_crossings(Z)
    assert rt.evaluations <= 2 * math.log2(h) + 10


def test_trace_parallel_search_matches_closed_form():
    Z = corpus.spiral(50).portalgon
    ann, _ = happy._quad_annulus(Z)
    assert happy.trace_ray_power(Z).k == ann.closed_form()


@settings(max_examples=10, deadline=None)
@given(st.integers(3, 40), st.floats(0.0, 2e-3))
def test_happify_preserves_distances(h, tilt):
    sp = corpus.spiral(h, tilt=tilt)
    tr = happy.happify_transform(sp.portalgon)
    assert validate(tr.portalgon) == []
    budget = SearchBudget(max_signature=400)
    assert distance_error(sp.portalgon, tr.portalgon, tr.map_point, n=8, seed=h, budget=budget) <= 1e-9


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_estimate_never_exceeds_bounds(seed):
    rng = random.Random(seed)
    k = rng.randint(2, 6)
    rep = happy.estimate_happiness(tilted_pair(math.pi / k, a=rng.uniform(0.1, 0.5), e=rng.uniform(0.01, 0.1)),
                                   samples=60, seed=seed)
    assert rep.consistent()


@pytest.mark.parametrize("h", [4, 20])
def test_happify_three_fragment_cycle(h):
    lb = corpus.lowerbound(3, h)
    tr = happy.happify_transform(lb.portalgon)
    assert "3 cycle fragments glued" in tr.log
    assert len(tr.portalgon.fragments) <= 3
    err = distance_error(lb.portalgon, tr.portalgon, tr.map_point, reference=lb.closed_form,
                         budget=SearchBudget(max_signature=400))
    assert err <= 1e-9
