import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from portalgon import corpus
from portalgon.geom import add, dist, scale
from portalgon.mesh import triangulate
from portalgon.model import Portalgon, SurfacePoint
from portalgon.spm import (Generator, TriangleSPM, compute_edge_spm, extend_to_interior, query,
                           shortest_path_map)
from portalgon.unfold import oracle_distances


def torus_closed_form(a, b):
    return min(math.hypot(b[0] - a[0] + i, b[1] - a[1] + j) for i in (-1, 0, 1) for j in (-1, 0, 1))


def edge_samples(E, per_edge, rng):
    """``(surface point, map value)`` pairs at random parameters of every edge."""
    t = E.triangulation
    out = []
    for em in E.edges:
        k, _ = em.halves[0]
        o, u = E.frames[em.id][0]
        for _ in range(per_edge):
            x = rng.random() * em.length
            v = min((iv.value(x) for iv in em.intervals if iv.x0 <= x <= iv.x1), default=math.inf)
            out.append((SurfacePoint(t.origin[k], add(o, scale(u, x))), v))
    return out


def max_edge_error(p, s, per_edge=3, seed=0):
    E = compute_edge_spm(triangulate(p, [s]), s)
    pts = edge_samples(E, per_edge, random.Random(seed))
    ds = oracle_distances(p, s, [q for q, _ in pts])
    return max(abs(v - d) for (_, v), d in zip(pts, ds))


def test_single_triangle_vertex_source():
    p = corpus.equilateral()
    s = SurfacePoint(0, (0.0, 0.0))
    E = compute_edge_spm(triangulate(p, [s]), s)
    assert len(E.edges) == 3
    for em in E.edges:
        assert len(em.intervals) == 1
        w = em.intervals[0].wave
        assert w.offset == 0 and dist(w.apex, (0.0, 0.0)) <= 1e-12


def test_convex_quad_corner_source():
    p = corpus.square()
    s = SurfacePoint(0, (0.0, 0.0))
    E = compute_edge_spm(triangulate(p, [s]), s)
    pts = edge_samples(E, 10, random.Random(1))
    ds = oracle_distances(p, s, [q for q, _ in pts])
    assert max(abs(v - d) for (_, v), d in zip(pts, ds)) <= 1e-9


def test_torus_corner_source_closed_form():
    p = corpus.torus()
    s = SurfacePoint(0, (0.0, 0.0))
    E = compute_edge_spm(triangulate(p, [s]), s)
    pts = edge_samples(E, 100 // len(E.edges) + 1, random.Random(2))
    assert len(pts) >= 100
    for q, v in pts:
        assert abs(v - torus_closed_form((0, 0), q.location)) <= 1e-9


def test_edge_intervals_partition():
    sp = corpus.spiral(6)
    E = compute_edge_spm(triangulate(sp.portalgon, [sp.s]), sp.s)
    for em in E.edges:
        assert em.intervals[0].x0 == pytest.approx(0, abs=1e-9)
        assert em.intervals[-1].x1 == pytest.approx(em.length, abs=1e-9)
        for a, b in zip(em.intervals, em.intervals[1:]):
            assert a.x1 == pytest.approx(b.x0, abs=1e-9)


def test_interior_single_generator():
    g = Generator((0.0, 0.0), 0.0)
    I = TriangleSPM([[g]], [], 1e-12)
    assert I.evaluate(0, (0.3, 0.4)) == (0.5, g)


def test_interior_symmetric_bisector():
    a, b = Generator((-1.0, 0.0), 0.5), Generator((1.0, 0.0), 0.5)
    I = TriangleSPM([[a, b]], [], 1e-12)
    assert I.evaluate(0, (-0.1, 0.7))[1] is a
    assert I.evaluate(0, (0.1, 0.7))[1] is b
    assert a.value((0.0, 0.7)) == b.value((0.0, 0.7)) == pytest.approx(0.5 + math.hypot(1, 0.7))


def test_interior_matches_oracle():
    p = corpus.pyramid()
    s = SurfacePoint(0, (0.5, 0.1))
    m = shortest_path_map(p, s)
    assert m.complexity["interior_cells"] <= 4 * m.complexity["edge_intervals"]
    qs = corpus.random_points(p, random.Random(3), 100)
    ds = oracle_distances(p, s, qs)
    for q, d in zip(qs, ds):
        assert abs(query(m, q).length - d) <= 1e-9


def test_extend_to_interior_cells_cover():
    p = corpus.lshape()
    s = SurfacePoint(0, (0.3, 0.2))
    t = triangulate(p, [s])
    E = compute_edge_spm(t, s)
    I = extend_to_interior(t, E)
    assert len(I.cells) == len(t.triangles)
    assert all(len(c) >= 1 for c in I.cells)


def test_query_source():
    m = shortest_path_map(corpus.torus(), SurfacePoint(0, (0.25, 0.25)))
    assert query(m, SurfacePoint(0, (0.25, 0.25))).length == 0


def test_query_same_triangle_straight():
    p = corpus.equilateral()
    m = shortest_path_map(p, SurfacePoint(0, (0.2, 0.1)))
    path = query(m, SurfacePoint(0, (0.5, 0.4)))
    assert path.length == pytest.approx(math.hypot(0.3, 0.3), abs=1e-12)
    assert len(path.signature) == 0


def test_query_torus():
    m = shortest_path_map(corpus.torus(), SurfacePoint(0, (0.25, 0.25)))
    path = query(m, SurfacePoint(0, (0.75, 0.75)))
    assert abs(path.length - math.sqrt(0.5)) <= 1e-12
    assert path.total_length() == pytest.approx(path.length, rel=1e-9)


def test_complexity_single_fragment():
    m = shortest_path_map(corpus.equilateral(), SurfacePoint(0, (0.0, 0.0)))
    assert m.complexity["edge_intervals"] == 3


def test_complexity_spiral_doubling():
    ks = []
    for h in (4, 8, 16, 32):
        sp = corpus.spiral(h)
        ks.append(shortest_path_map(sp.portalgon, sp.s, edges_only=True).complexity["edge_intervals"])
    slopes = [math.log2(b / a) for a, b in zip(ks, ks[1:])]
    assert max(slopes) <= 1.15


def corpus_maps():
    for name, p in corpus.named().items():
        s = corpus.random_points(p, random.Random(5), 1)[0]
        yield name, shortest_path_map(p, s, edges_only=True)


def test_prefix_tree_branching_bounded():
    for name, m in corpus_maps():
        assert m.complexity["tree_max_branching"] <= 6, name


def test_signature_runs_contiguous():
    for name, m in corpus_maps():
        for em in m.edge_map.edges:
            for side in (0, 1):
                seq = [iv.wave for iv in em.intervals if iv.side == side]
                runs = [w for i, w in enumerate(seq) if i == 0 or seq[i - 1] is not w]
                assert len(runs) == len(set(map(id, runs))), name


def test_linear_env_and_minimum_events():
    for name, m in corpus_maps():
        for em in m.edge_map.edges:
            nf = sum(em.n_functions)
            assert len(em.intervals) <= 4 * nf, name
            # each envelope minimum sits at a function's own minimum or at one of its domain ends
            assert em.counters.a_events <= 3 * nf, name


def test_env_below_is_spm():
    """At every event, sampled parameters whose envelope value is at most delta carry the true distance."""
    sp = corpus.spiral(5)
    p, s = sp.portalgon, sp.s
    t = triangulate(p, [s])
    rng = random.Random(4)
    seen = []

    def on_event(sw):
        for e in rng.sample(sw.edges, min(3, len(sw.edges))):
            x = rng.random() * e.length
            v = min(e.env[side](x) for side in e.sides)
            if v <= sw.delta:
                k, _ = e.halves[0]
                o, u = e.frames[0]
                seen.append((SurfacePoint(t.origin[k], add(o, scale(u, x))), v))

    compute_edge_spm(t, s, on_event=on_event)
    assert len(seen) >= 20
    ds = [sp.closed_form(s.location, q.location) for q, _ in seen]
    assert max(abs(v - d) for (_, v), d in zip(seen, ds)) <= 1e-9


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(4, 10))
def test_random_split_matches_oracle(seed, n):
    p = corpus.random_split(seed, n)
    s = corpus.random_points(p, random.Random(seed), 1)[0]
    assert max_edge_error(p, s, seed=seed) <= 1e-9


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_torus_matches_oracle(seed):
    p = corpus.random_torus(seed)
    s = corpus.random_points(p, random.Random(seed), 1)[0]
    assert max_edge_error(p, s, seed=seed) <= 1e-9
