import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from portalgon.envelope import (ApexedFunction, LowerEnvelope, NotOnEnvelope, PolyFunction,
                                intersections)


def naive(fs, x):
    return min((f.value(x) for f in fs if f.lo <= x <= f.hi), default=math.inf)


def random_apexed(rng):
    lo = rng.uniform(0, 8)
    hi = min(10.0, lo + rng.uniform(0.5, 6))
    return ApexedFunction(rng.uniform(-2, 12), rng.uniform(0, 3), rng.uniform(0, 4), lo, hi)


def run_workload(seed, n_ops=40, samples=200):
    """Interleave inserts and mutating queries, then compare with the naive minimum.

    Returns ``(max abs error, counters)``.
    """
    rng = random.Random(seed)
    env = LowerEnvelope()
    fs = []
    last_min = -math.inf
    for _ in range(n_ops):
        r = rng.random()
        if r < 0.6 or not fs:
            f = random_apexed(rng)
            env.insert(f)
            fs.append(f)
        elif r < 0.85:
            x = rng.uniform(0, 10)
            v, f = env.value(x)
            if f is not None:
                res = env.next_vertex(f, x)
                if res is not None:
                    assert res[1] > v
        else:
            m = env.next_local_minimum(last_min)
            if m is not None:
                assert m[1] >= last_min
                last_min = m[1]
    err = 0.0
    for i in range(samples + 1):
        x = 10 * i / samples
        a, b = env(x), naive(fs, x)
        if math.isinf(a) or math.isinf(b):
            assert math.isinf(a) == math.isinf(b)
            continue
        err = max(err, abs(a - b))
    return err, env.counters


def test_insert_constant():
    env = LowerEnvelope()
    env.insert(PolyFunction((1,), 0, 1))
    assert env.occupied() == [0]
    assert len(env.pieces()) == 1 and env(0.5) == 1


def test_insert_two_lines():
    env = LowerEnvelope()
    env.insert(PolyFunction((0, 1), 0, 1))
    env.insert(PolyFunction((1, -1), 0, 1))
    ps = env.pieces()
    assert len(ps) == 2 and ps[0][1] == pytest.approx(0.5)
    assert env(0.25) == pytest.approx(0.25) and env(0.75) == pytest.approx(0.25)


def test_eight_inserts_single_level():
    env = LowerEnvelope()
    for k in range(8):
        env.insert(PolyFunction((k,), 0, 1))
    assert env.occupied() == [3]


def test_next_local_minimum_empty():
    assert LowerEnvelope().next_local_minimum(0) is None


def test_next_local_minimum_disjoint():
    env = LowerEnvelope()
    env.insert(PolyFunction((1, 0, 1), -1, 1))
    env.insert(PolyFunction((11, -6, 1), 2, 4))
    x, v, _ = env.next_local_minimum(1.5)
    assert x == pytest.approx(3) and v == pytest.approx(2)
    assert env.next_local_minimum(100) is None


def test_next_vertex_single():
    env = LowerEnvelope()
    f = PolyFunction((1, 0, 1), -1, 2)
    env.insert(f)
    assert env.next_vertex(f, 0.0) == pytest.approx((-1, 2))


def test_next_vertex_crossing():
    env = LowerEnvelope()
    f = PolyFunction((0, 1), 0, 1)
    env.insert(f)
    env.insert(PolyFunction((1, -1), 0, 1))
    assert env.next_vertex(f, 0.2) == pytest.approx((0.5, 0.5))


def test_next_vertex_dominating_deletes():
    env = LowerEnvelope()
    for c in (5, 6):
        env.insert(PolyFunction((c,), 0, 10))
    f = PolyFunction((1, 0, 0.01), -math.inf, math.inf)
    env.insert(f)
    before = env.counters.intervals_deleted
    assert env.next_vertex(f, 0.0) is None
    assert env.counters.intervals_deleted > before


def test_next_vertex_not_on_envelope():
    env = LowerEnvelope()
    env.insert(PolyFunction((0,), 0, 1))
    g = PolyFunction((1,), 0, 1)
    env.insert(g)
    with pytest.raises(NotOnEnvelope):
        env.next_vertex(g, 0.5)


def test_apexed_intersections_exact():
    f = ApexedFunction(0, 1, 0, -5, 5)
    g = ApexedFunction(2, 1, 0, -5, 5)
    xs = intersections(f, g)
    assert xs == pytest.approx([1.0])


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_differential_against_naive(seed):
    err, c = run_workload(seed)
    assert err <= 1e-9
    assert c.intervals_deleted <= c.intervals_created
    assert c.intervals_deleted == len(c.deleted_ids)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_local_minima_monotone(seed):
    rng = random.Random(seed)
    env = LowerEnvelope()
    for _ in range(30):
        env.insert(random_apexed(rng))
    d, last = -math.inf, -math.inf
    for _ in range(40):
        m = env.next_local_minimum(d)
        if m is None:
            break
        assert m[1] >= last
        last = d = m[1]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(2, 7))
def test_created_intervals_logarithmic(seed, k):
    rng = random.Random(seed)
    env = LowerEnvelope()
    m = 2 ** k
    fs = [random_apexed(rng) for _ in range(m)]
    for f in fs:
        env.insert(f)
    # the complexity bound of m functions is at least m, so the final size is floored at m
    lam = max(len(env.pieces()), m)
    assert env.counters.intervals_created <= 2 * lam * (math.log2(m) + 1)
