"""Acceptance criteria, one test each, at their stated tolerances.

Every test prints ``criterion N: PASS|FAIL  <measurements>``; the lines are
also repeated in the pytest terminal summary.
"""
import math
import random
import time

from _support import distance_error, flippable_edges
from conftest import ACCEPTANCE_LINES
from test_envelope import run_workload
from test_happy import tilted_pair
from portalgon import corpus, happy
from portalgon.delaunay import flip_transform, intrinsic_delaunay, verify_empty_disk
from portalgon.happy import NotQuadPortalPair
from portalgon.mesh import triangulate
from portalgon.model import SurfacePoint
from portalgon.spm import query, shortest_path_map
from portalgon.unfold import SearchBudget, crossing_profile, oracle_distances, oracle_paths, oracle_shortest_path

BUDGET = SearchBudget(max_signature=400)


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def torus_closed_form(a, b):
    return min(math.hypot(b[0] - a[0] + i, b[1] - a[1] + j) for i in (-1, 0, 1) for j in (-1, 0, 1))


def cylinder_closed_form(w, a, b):
    d = abs(b[0] - a[0])
    return math.hypot(min(d, w - d), b[1] - a[1])


def test_criterion_1_spm_matches_oracle():
    names = corpus.named()
    spm_time, worst, pairs = 0.0, 0.0, []
    for name, p in names.items():
        assert p.n_vertices <= 30, name
        rng = random.Random(1)
        n = 0
        for _ in range(4):
            s = corpus.random_points(p, rng, 1)[0]
            ts = corpus.random_points(p, rng, 25)
            t0 = time.perf_counter()
            m = shortest_path_map(p, s)
            vs = [query(m, t).length for t in ts]
            spm_time += time.perf_counter() - t0
            ds = oracle_distances(p, s, ts)
            worst = max(worst, max(abs(v - d) / max(d, 1e-300) for v, d in zip(vs, ds) if d > 0))
            n += len(ts)
        pairs.append(n)
    ok = len(names) >= 10 and min(pairs) >= 100 and worst <= 1e-9 and spm_time <= 10.0
    report(1, ok, f"{len(names)} instances, >= {min(pairs)} pairs each, max rel err {worst:.2e}, "
                  f"SPM+query time {spm_time:.2f}s")


def test_criterion_2_closed_forms():
    rng = random.Random(2)
    torus = corpus.torus()
    canon = oracle_shortest_path(torus, SurfacePoint(0, (0.25, 0.25)), SurfacePoint(0, (0.75, 0.75))).length
    m = shortest_path_map(torus, SurfacePoint(0, (0.25, 0.25)))
    canon_spm = query(m, SurfacePoint(0, (0.75, 0.75))).length
    err_t = max(abs(canon - math.sqrt(0.5)), abs(canon_spm - math.sqrt(0.5)))
    pts = corpus.random_points(torus, rng, 101)
    for q, d in zip(pts[1:], oracle_distances(torus, pts[0], pts[1:])):
        err_t = max(err_t, abs(d - torus_closed_form(pts[0].location, q.location)))
    w = 3.0
    cyl = corpus.cylinder(w)
    pts = corpus.random_points(cyl, rng, 101)
    m = shortest_path_map(cyl, pts[0])
    err_c = 0.0
    for q, d in zip(pts[1:], oracle_distances(cyl, pts[0], pts[1:])):
        ref = cylinder_closed_form(w, pts[0].location, q.location)
        err_c = max(err_c, abs(d - ref), abs(query(m, q).length - ref))
    report(2, err_t <= 1e-12 and err_c <= 1e-12,
           f"torus max err {err_t:.2e} (canonical {canon!r}), cylinder max err {err_c:.2e}")


def test_criterion_3_envelope_workloads():
    worst, bad_counter = 0.0, 0
    for seed in range(1000):
        err, c = run_workload(seed)
        worst = max(worst, err)
        if c.intervals_deleted > c.intervals_created or c.intervals_deleted != len(c.deleted_ids):
            bad_counter += 1
    report(3, worst <= 1e-9 and bad_counter == 0,
           f"1000 workloads, max err vs naive {worst:.2e}, counter violations {bad_counter}")


def test_criterion_4_happification():
    rows, ok = [], True
    for h in (8, 64, 4096, 10 ** 6):
        sp = corpus.spiral(h)
        tr = happy.happify_transform(sp.portalgon)
        err = distance_error(sp.portalgon, tr.portalgon, tr.map_point, n=20, seed=h, budget=BUDGET,
                             reference=sp.closed_form)
        path = oracle_shortest_path(tr.portalgon, tr.map_point(sp.s), tr.map_point(sp.t), BUDGET)
        comps = max(crossing_profile(path).values())
        rt = happy.trace_ray_power(corpus.spiral(h, tilt=0.01 / h).portalgon)
        cap = 2 * math.log2(h) + 10
        ok &= err <= 1e-9 and comps <= 5 and rt.evaluations <= cap
        rows.append(f"h={h}: err {err:.1e}, components {comps}, evals {rt.evaluations}/{cap:.1f} (k={rt.k})")
    report(4, ok, "; ".join(rows))


def test_criterion_5_angle_bounds():
    bounds = {k: happy.analytic_bounds(tilted_pair(math.pi / k)).upper[0] for k in range(2, 9)}
    p = tilted_pair(math.pi / 3)
    path = oracle_shortest_path(p, SurfacePoint(0, (0.62, 0.72)), SurfacePoint(0, (0.12, 0.007)))
    comps = crossing_profile(path)[0]
    ok = all(b == k + 1 for k, b in bounds.items()) and comps == 3 and comps <= bounds[3]
    report(5, ok, f"bounds {bounds}; 60-degree witness components {comps} (bound {bounds[3]})")


def test_criterion_6_delaunay_happiness():
    paths, worst, uncertified, incomplete = 0, 0, 0, 0
    for name, p in corpus.named().items():
        res = intrinsic_delaunay(triangulate(p, separate=False).portalgon)
        incomplete += not res.complete
        q = res.portalgon
        for k in range(len(q.fragments)):
            c = verify_empty_disk(q, k)
            uncertified += not (c.empty and c.injective)
        pts = corpus.random_points(q, random.Random(6), 55)
        for j in range(5):
            for path in oracle_paths(q, pts[11 * j], pts[11 * j + 1:11 * (j + 1)]):
                paths += 1
                worst = max(worst, max(crossing_profile(path).values(), default=0))
    ok = paths >= 500 and worst <= 6 and uncertified == 0 and incomplete == 0
    report(6, ok, f"{paths} paths, max per-triangle components {worst}, uncertified triangles {uncertified}, "
                  f"incomplete runs {incomplete}")


def test_criterion_7_spm_scaling():
    hs = [4, 8, 16, 32, 64, 128]
    ks = []
    for h in hs:
        lb = corpus.lowerbound(3, h)
        ks.append(shortest_path_map(lb.portalgon, lb.s, edges_only=True).complexity["edge_intervals"])
    steps = [math.log2(b / a) for a, b in zip(ks, ks[1:])]
    xs, ys = [math.log(h) for h in hs], [math.log(k) for k in ks]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    fit = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
    over = 0
    for name, p in corpus.named().items():
        s = corpus.random_points(p, random.Random(7), 1)[0]
        for em in shortest_path_map(p, s, edges_only=True).edge_map.edges:
            over += len(em.intervals) > 4 * sum(em.n_functions)
    ok = max(steps) <= 1.15 and fit <= 1.15 and over == 0
    report(7, ok, f"k={ks}, step slopes max {max(steps):.3f}, fitted slope {fit:.3f}, "
                  f"edges over 4|S_A u S_B|: {over}")


def test_criterion_8_lowerbound_path():
    lb = corpus.lowerbound(6, 10)
    path = oracle_shortest_path(lb.portalgon, lb.s, lb.t)
    need = 0.5 * lb.h * 6
    report(8, len(path.signature) >= need, f"signature length {len(path.signature)} >= {need:g}")


def _rezero_target(p):
    try:
        return happy.rezero_transform(p)
    except NotQuadPortalPair:
        return None


def test_criterion_9_equivalence():
    worst = {"triangulate": 0.0, "flip": 0.0, "rezero_quad": 0.0, "happify": 0.0}
    applied = dict.fromkeys(worst, 0)
    names = corpus.named()
    for i, (name, p) in enumerate(names.items()):
        t = triangulate(p, separate=False)
        worst["triangulate"] = max(worst["triangulate"], distance_error(p, t.portalgon, t.map_point, seed=i))
        applied["triangulate"] += 1
        es = flippable_edges(t.portalgon)
        if es:
            tr = flip_transform(t.portalgon, es[0])
            err = distance_error(p, tr.portalgon, lambda x: tr.map_point(t.map_point(x)), seed=i)
            worst["flip"] = max(worst["flip"], err)
            applied["flip"] += 1
        rz = _rezero_target(p)
        if rz is not None:
            worst["rezero_quad"] = max(worst["rezero_quad"], distance_error(p, rz.portalgon, rz.map_point, seed=i))
            applied["rezero_quad"] += 1
        try:
            hp = happy.happify_transform(p)
        except happy.UnsupportedTopology:
            continue
        worst["happify"] = max(worst["happify"], distance_error(p, hp.portalgon, hp.map_point, seed=i, budget=BUDGET))
        applied["happify"] += 1
    ok = all(v <= 1e-9 for v in worst.values()) and applied["triangulate"] == len(names)
    detail = ", ".join(f"{k} {applied[k]}/{len(names)} max err {v:.1e}" for k, v in worst.items())
    report(9, ok, detail)
