"""Insertion-only lower envelope of partial functions.

Each member is defined on one closed interval and any two members cross at
most twice. The envelope is kept as a logarithmic-method stack of static
envelopes; level ``i`` holds the envelope of ``2**i`` functions. Queries walk
the static envelopes and physically delete intervals that a present function
dominates, so the structure mutates on reads.
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

INF = math.inf
_ids = itertools.count()
_pieces = itertools.count()


class NotOnEnvelope(ValueError):
    pass


# --------------------------------------------------------------------------
# functions


class PartialFunction:
    """Base class: subclasses provide ``lo``, ``hi``, ``value`` and ``argmin``."""

    lo: float
    hi: float
    fid: int

    def value(self, x: float) -> float:  # pragma: no cover - interface
        raise NotImplementedError

    def argmin(self) -> float:  # pragma: no cover - interface
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)

    def contains(self, x: float, eps: float = 0.0) -> bool:
        return self.lo - eps <= x <= self.hi + eps


class ApexedFunction(PartialFunction):
    """``offset + sqrt((x - ax)**2 + ay**2)`` on ``[lo, hi]``.

    This is the distance along a line to a source point at perpendicular
    height ``ay`` above parameter ``ax``, plus an additive weight.
    """

    __slots__ = ("ax", "ay", "offset", "lo", "hi", "fid", "payload")

    def __init__(self, ax, ay, offset, lo, hi, payload=None, fid=None):
        self.ax = float(ax)
        self.ay = abs(float(ay))
        self.offset = float(offset)
        self.lo = float(lo)
        self.hi = float(hi)
        self.payload = payload
        self.fid = next(_ids) if fid is None else fid

    def value(self, x):
        return self.offset + math.hypot(x - self.ax, self.ay)

    def argmin(self):
        return min(self.hi, max(self.lo, self.ax))

    def derivative(self, x):
        r = math.hypot(x - self.ax, self.ay)
        return (x - self.ax) / r if r > 0 else 0.0

    def __repr__(self):
        return (f"ApexedFunction(ax={self.ax:.6g}, ay={self.ay:.6g}, offset={self.offset:.6g}, "
                f"[{self.lo:.6g}, {self.hi:.6g}], id={self.fid})")


class PolyFunction(PartialFunction):
    """``c0 + c1 x + c2 x**2`` on ``[lo, hi]`` (test workloads)."""

    __slots__ = ("c", "lo", "hi", "fid", "payload")

    def __init__(self, c, lo, hi, payload=None):
        self.c = tuple(float(v) for v in c) + (0.0,) * (3 - len(c))
        self.lo = float(lo)
        self.hi = float(hi)
        self.payload = payload
        self.fid = next(_ids)

    def value(self, x):
        c0, c1, c2 = self.c
        return c0 + x * (c1 + x * c2)

    def argmin(self):
        c0, c1, c2 = self.c
        cands = [self.lo, self.hi]
        if c2 > 0 and math.isfinite(self.lo + self.hi):
            cands.append(min(self.hi, max(self.lo, -c1 / (2 * c2))))
        elif c2 > 0:
            cands.append(-c1 / (2 * c2))
        cands = [x for x in cands if math.isfinite(x)]
        if not cands:
            return 0.0
        return min(cands, key=self.value)

    def __repr__(self):
        return f"PolyFunction({self.c}, [{self.lo}, {self.hi}], id={self.fid})"


def _quadratic_roots(a, b, c):
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0:
        return []
    a, b, c = a / scale, b / scale, c / scale
    if abs(a) < 1e-14:
        if abs(b) < 1e-300:
            return []
        return [-c / b]
    disc = b * b - 4 * a * c
    if disc < 0:
        if disc > -1e-12 * (b * b + abs(4 * a * c)):
            disc = 0.0
        else:
            return []
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    roots = []
    if q != 0:
        roots.append(c / q)
    roots.append(q / a)
    return roots


def _polish(f, g, x, lo, hi):
    """A few secant steps on ``f - g`` to clean up algebraic roots."""
    h = 1e-7 * (1 + abs(x))
    for _ in range(3):
        d0 = f.value(x) - g.value(x)
        if d0 == 0:
            break
        x1 = x + h
        d1 = f.value(x1) - g.value(x1)
        den = d1 - d0
        if den == 0:
            break
        xn = x - d0 * h / den
        if not (lo <= xn <= hi) or abs(xn - x) > 1e-6 * (1 + abs(x)):
            break
        x = xn
        h = max(1e-3 * abs(d0 * h / den), 1e-15 * (1 + abs(x)))
    return x


def intersections(f: PartialFunction, g: PartialFunction) -> list:
    """Sorted parameters in the common domain where ``f`` and ``g`` agree."""
    lo, hi = max(f.lo, g.lo), min(f.hi, g.hi)
    if lo > hi:
        return []
    if isinstance(f, ApexedFunction) and isinstance(g, ApexedFunction):
        cands = _apexed_roots(f, g)
    elif isinstance(f, PolyFunction) and isinstance(g, PolyFunction):
        d = [x - y for x, y in zip(f.c, g.c)]
        cands = _quadratic_roots(d[2], d[1], d[0])
    else:
        cands = _numeric_roots(f, g, lo, hi)
    out = []
    for x in sorted(cands):
        if not math.isfinite(x):
            continue
        eps = 1e-12 * (1 + abs(x))
        if x < lo - eps or x > hi + eps:
            continue
        x = min(hi, max(lo, x))
        x = _polish(f, g, x, lo, hi)
        fv, gv = f.value(x), g.value(x)
        if abs(fv - gv) > 1e-9 * (1 + abs(fv)):
            continue
        if out and abs(out[-1] - x) <= 1e-12 * (1 + abs(x)):
            continue
        out.append(x)
    return out


def _apexed_roots(f: ApexedFunction, g: ApexedFunction):
    a1, b1, a2, b2 = f.ax, f.ay, g.ax, g.ay
    D = g.offset - f.offset
    m = 2.0 * (a2 - a1)
    c = a1 * a1 - a2 * a2 + b1 * b1 - b2 * b2 - D * D
    scale = 1.0 + abs(a1) + abs(a2) + b1 + b2 + abs(D)
    if abs(D) <= 1e-15 * scale:
        if abs(m) <= 1e-15 * scale:
            return []
        return [-c / m]
    A = m * m - 4 * D * D
    B = 2 * m * c + 8 * D * D * a2
    C = c * c - 4 * D * D * (a2 * a2 + b2 * b2)
    return _quadratic_roots(A, B, C)


def _numeric_roots(f, g, lo, hi, samples=256):
    from scipy.optimize import brentq

    lo_ = lo if math.isfinite(lo) else -1e6
    hi_ = hi if math.isfinite(hi) else 1e6
    if lo_ == hi_:
        return [lo_] if abs(f.value(lo_) - g.value(lo_)) < 1e-12 else []
    xs = [lo_ + (hi_ - lo_) * k / samples for k in range(samples + 1)]
    ds = [f.value(x) - g.value(x) for x in xs]
    out = []
    for k in range(samples):
        if ds[k] == 0:
            out.append(xs[k])
        elif ds[k] * ds[k + 1] < 0:
            out.append(brentq(lambda x: f.value(x) - g.value(x), xs[k], xs[k + 1], xtol=1e-15))
    if ds[-1] == 0:
        out.append(xs[-1])
    return out


# --------------------------------------------------------------------------
# static envelope


class Piece:
    __slots__ = ("x0", "x1", "f", "alive", "serial")

    def __init__(self, x0, x1, f):
        self.x0 = x0
        self.x1 = x1
        self.f = f
        self.alive = True
        self.serial = next(_pieces)

    def __repr__(self):
        return f"Piece([{self.x0:.6g}, {self.x1:.6g}], f={self.f.fid})"


def _lower(f, g, x):
    """The lower of two functions at ``x``, ties broken by id."""
    fv, gv = f.value(x), g.value(x)
    if fv < gv or (fv == gv and f.fid <= g.fid):
        return f
    return g


def _midpoint(a, b):
    if math.isinf(a) and math.isinf(b):
        return 0.0
    if math.isinf(a):
        return b - 1.0 - abs(b)
    if math.isinf(b):
        return a + 1.0 + abs(a)
    return 0.5 * (a + b)


@dataclass
class Counters:
    intervals_created: int = 0
    intervals_deleted: int = 0
    walk_steps: int = 0
    structures_created: int = 0
    merges: int = 0
    deleted_ids: set = field(default_factory=set)


class StaticEnvelope:
    """Envelope of a fixed function set: x-sorted pieces plus minima sorted by value."""

    def __init__(self, pieces, size, counters: Counters):
        self.pieces = pieces
        self.starts = [p.x0 for p in pieces]
        self.size = size
        self.counters = counters
        counters.intervals_created += len(pieces)
        counters.structures_created += 1
        self.minima = self._find_minima()

    @classmethod
    def single(cls, f, counters):
        return cls([Piece(f.lo, f.hi, f)], 1, counters)

    def functions(self):
        return {p.f for p in self.pieces}

    def _find_minima(self):
        out = []
        ps = self.pieces
        for k, p in enumerate(ps):
            f = p.f
            xm = min(p.x1, max(p.x0, f.argmin()))
            if not math.isfinite(xm):
                continue
            v = f.value(xm)
            # a minimum at a piece end counts only if the neighbour does not go lower
            if xm == p.x0 and k > 0 and ps[k - 1].x1 >= p.x0:
                left = ps[k - 1].f.value(p.x0)
                if left < v:
                    continue
                if left == v and ps[k - 1].f.argmin() >= p.x0:
                    continue  # reported by the left neighbour
            if xm == p.x1 and k + 1 < len(ps) and ps[k + 1].x0 <= p.x1:
                right = ps[k + 1].f.value(p.x1)
                if right < v:
                    continue
            out.append((v, xm, f.fid, p))
        out.sort(key=lambda t: (t[0], t[1], t[2]))
        return out

    def locate(self, x):
        """Index of the piece containing ``x`` (preferring the later one at a breakpoint), or None."""
        k = bisect.bisect_right(self.starts, x) - 1
        if k >= 0 and self.pieces[k].x0 <= x <= self.pieces[k].x1:
            return k
        if k >= 1 and self.pieces[k - 1].x1 >= x:
            return k - 1
        return None

    def value(self, x):
        """Envelope value and function at ``x`` (``(inf, None)`` in a gap)."""
        k = bisect.bisect_right(self.starts, x) - 1
        best = (INF, None)
        for j in (k, k - 1, k + 1):
            if 0 <= j < len(self.pieces):
                p = self.pieces[j]
                if p.x0 <= x <= p.x1:
                    v = p.f.value(x)
                    if v < best[0]:
                        best = (v, p.f)
        return best

    def delete(self, k):
        p = self.pieces.pop(k)
        self.starts.pop(k)
        p.alive = False
        c = self.counters
        if p.serial in c.deleted_ids:
            raise AssertionError("interval deleted twice")
        c.deleted_ids.add(p.serial)
        c.intervals_deleted += 1


def merge(a: StaticEnvelope, b: StaticEnvelope, counters: Counters) -> StaticEnvelope:
    """Simultaneous scan of two envelopes producing the envelope of the union."""
    cuts = sorted({p.x0 for p in a.pieces} | {p.x1 for p in a.pieces}
                  | {p.x0 for p in b.pieces} | {p.x1 for p in b.pieces})
    out = []

    def emit(x0, x1, f):
        if out and out[-1].f is f and out[-1].x1 == x0:
            out[-1].x1 = x1
        else:
            out.append(Piece(x0, x1, f))

    ia = ib = 0
    pa, pb = a.pieces, b.pieces
    for k in range(len(cuts) - 1):
        x0, x1 = cuts[k], cuts[k + 1]
        mid = _midpoint(x0, x1)
        while ia < len(pa) and pa[ia].x1 <= x0:
            ia += 1
        while ib < len(pb) and pb[ib].x1 <= x0:
            ib += 1
        fa = pa[ia].f if ia < len(pa) and pa[ia].x0 <= mid <= pa[ia].x1 else None
        fb = pb[ib].f if ib < len(pb) and pb[ib].x0 <= mid <= pb[ib].x1 else None
        if fa is None and fb is None:
            continue
        if fa is None or fb is None:
            emit(x0, x1, fa or fb)
            continue
        xs = [x for x in intersections(fa, fb) if x0 < x < x1]
        bounds = [x0] + xs + [x1]
        for j in range(len(bounds) - 1):
            u0, u1 = bounds[j], bounds[j + 1]
            emit(u0, u1, _lower(fa, fb, _midpoint(u0, u1)))
    # isolated single-point pieces (degenerate domains)
    for src in (pa, pb):
        for p in src:
            if p.x0 == p.x1:
                emit_point(out, p)
    counters.merges += 1
    return StaticEnvelope(out, a.size + b.size, counters)


def emit_point(out, p):
    x = p.x0
    k = bisect.bisect_left([q.x0 for q in out], x)
    for j in (k - 1, k):
        if 0 <= j < len(out) and out[j].x0 <= x <= out[j].x1:
            if out[j].f.value(x) <= p.f.value(x):
                return
    out.insert(k, Piece(x, x, p.f))


# --------------------------------------------------------------------------
# dynamic structure


class LowerEnvelope:
    """Logarithmic-method lower envelope supporting insertions and mutating queries."""

    def __init__(self, tol: float = 1e-9):
        self.levels: list = []
        self.counters = Counters()
        self.tol = tol
        self.count = 0

    # ---- updates ----------------------------------------------------------
    def insert(self, f: PartialFunction) -> None:
        cur = StaticEnvelope.single(f, self.counters)
        i = 0
        while True:
            if i == len(self.levels):
                self.levels.append(None)
            if self.levels[i] is None:
                self.levels[i] = cur
                break
            cur = merge(self.levels[i], cur, self.counters)
            self.levels[i] = None
            i += 1
        self.count += 1

    # ---- plain evaluation -------------------------------------------------
    def value(self, x: float):
        """``(value, function)`` of the envelope at ``x``; ``(inf, None)`` if uncovered."""
        best = (INF, None)
        for lev in self.levels:
            if lev is None:
                continue
            v, f = lev.value(x)
            if f is not None and (v < best[0] or (v == best[0] and f.fid < best[1].fid)):
                best = (v, f)
        return best

    def __call__(self, x):
        return self.value(x)[0]

    def occupied(self) -> list:
        return [i for i, lev in enumerate(self.levels) if lev is not None]

    def pieces(self):
        """The current envelope as merged ``(x0, x1, f)`` pieces (for rendering and tests)."""
        cuts = sorted({x for lev in self.levels if lev for p in lev.pieces for x in (p.x0, p.x1)})
        out = []
        for k in range(len(cuts) - 1):
            a, b = cuts[k], cuts[k + 1]
            cand = []
            for lev in self.levels:
                if lev is None:
                    continue
                j = lev.locate(_midpoint(a, b))
                if j is not None:
                    cand.append(lev.pieces[j].f)
            if not cand:
                continue
            bounds = [a]
            for i1 in range(len(cand)):
                for i2 in range(i1 + 1, len(cand)):
                    bounds.extend(x for x in intersections(cand[i1], cand[i2]) if a < x < b)
            bounds = sorted(set(bounds)) + [b]
            for j in range(len(bounds) - 1):
                m = _midpoint(bounds[j], bounds[j + 1])
                f = min(cand, key=lambda g: (g.value(m), g.fid))
                if out and out[-1][2] is f and out[-1][1] == bounds[j]:
                    out[-1] = (out[-1][0], bounds[j + 1], f)
                else:
                    out.append((bounds[j], bounds[j + 1], f))
        return out

    # ---- queries ----------------------------------------------------------
    def next_local_minimum(self, delta: float):
        """Lowest local minimum of the envelope with value ``> delta``: ``(x, value, f)`` or None."""
        best = None
        for lev in self.levels:
            if lev is None:
                continue
            mins = lev.minima
            k = bisect.bisect_right(mins, delta, key=lambda t: t[0])
            while k < len(mins):
                v, x, fid, piece = mins[k]
                if not piece.alive or self.value(x)[0] < v - self.tol * (1 + abs(v)):
                    # no longer on the envelope; it never will be again
                    del mins[k]
                    continue
                if best is None or (v, x) < (best[1], best[0]):
                    best = (x, v, piece.f)
                break
        return best

    def next_local_minimum_after(self, key):
        """Like :meth:`next_local_minimum` but strictly after ``key = (value, x, fid)`` lexicographically."""
        best = None
        for lev in self.levels:
            if lev is None:
                continue
            mins = lev.minima
            k = bisect.bisect_right(mins, key, key=lambda t: (t[0], t[1], t[2]))
            while k < len(mins):
                v, x, fid, piece = mins[k]
                if not piece.alive or self.value(x)[0] < v - self.tol * (1 + abs(v)):
                    del mins[k]
                    continue
                if best is None or (v, x, fid) < best[0]:
                    best = ((v, x, fid), piece.f)
                break
        if best is None:
            return None
        (v, x, fid), f = best
        return (x, v, f)

    def segment_end(self, f: PartialFunction, q: float, direction: int) -> float:
        """End, in ``direction``, of the envelope segment realized by ``f`` around ``q``.

        This is the first parameter beyond ``q`` where another function drops
        below ``f`` or where ``f``'s domain ends. Dominated intervals met on the
        way are deleted.
        """
        end = f.hi if direction > 0 else f.lo
        for lev in self.levels:
            if lev is None:
                continue
            x = self._walk(lev, f, q, direction)
            end = min(end, x) if direction > 0 else max(end, x)
        return end

    def beyond(self, v: float, direction: int):
        """``(value at v, function)`` of the lowest function covering ``[v, v + direction * eps]``.

        Values within rounding of each other are compared just beyond ``v``.
        """
        cands = []
        for lev in self.levels:
            if lev is None:
                continue
            k = bisect.bisect_right(lev.starts, v) - 1
            for j in (k - 1, k, k + 1):
                if not (0 <= j < len(lev.pieces)):
                    continue
                p = lev.pieces[j]
                ok = (p.x0 <= v < p.x1) if direction > 0 else (p.x0 < v <= p.x1)
                if not ok:
                    continue
                cands.append((p.f.value(v), p.f))
        if not cands:
            return (INF, None)
        low = min(c[0] for c in cands)
        near = [c for c in cands if c[0] <= low + 1e-12 * (1.0 + abs(low))]
        best = near[0]
        for c in near[1:]:
            if self._steeper(c[1], best[1], v, direction):
                best = c
        return best

    @staticmethod
    def _steeper(g, h, v, direction):
        """True if ``g`` stays below ``h`` just beyond ``v``."""
        span = min(g.hi - v, h.hi - v) if direction > 0 else min(v - g.lo, v - h.lo)
        step = max(1e-9 * (1 + abs(v)), 1e-6 * span) * direction
        return g.value(v + step) < h.value(v + step)

    def next_vertex(self, f: PartialFunction, q: float):
        """Lowest endpoint above ``f(q)`` of the envelope segment realized by ``f`` around ``q``.

        Walks every level in both directions, deleting intervals that ``f``
        dominates throughout. Returns ``(x, value)`` or None.
        """
        fq = f.value(q)
        if not f.contains(q, 1e-12 * (1 + abs(q))):
            raise NotOnEnvelope(f"q={q} outside the domain of {f}")
        env = self.value(q)[0]
        if fq > env + self.tol:
            raise NotOnEnvelope(f"f(q)={fq} above envelope value {env}")
        right = self.segment_end(f, q, +1)
        left = self.segment_end(f, q, -1)
        cands = []
        for x in (left, right):
            if math.isfinite(x):
                v = f.value(x)
                if v > fq:
                    cands.append((v, x))
        if not cands:
            return None
        v, x = min(cands)
        return (x, v)

    def _walk(self, lev: StaticEnvelope, f, q, direction):
        """First parameter beyond ``q`` where this level drops below ``f``."""
        limit = f.hi if direction > 0 else f.lo
        k = bisect.bisect_right(lev.starts, q) - 1
        if direction > 0:
            if k < 0:
                k = 0
            elif lev.pieces[k].x1 < q:
                k += 1
        else:
            if k < 0:
                return -INF
        while 0 <= k < len(lev.pieces):
            p = lev.pieces[k]
            self.counters.walk_steps += 1
            if direction > 0 and p.x0 > limit:
                break
            if direction < 0 and p.x1 < limit:
                break
            a = max(p.x0, q) if direction > 0 else p.x0
            b = p.x1 if direction > 0 else min(p.x1, q)
            a, b = max(a, f.lo), min(b, f.hi)
            g = p.f
            beyond = p.x1 > q if direction > 0 else p.x0 < q
            if g is f or a > b or not beyond:
                k += direction
                continue
            hit = self._first_drop(f, g, a, b, direction)
            if hit is not None:
                return hit
            # g stays above f on the part we looked at; delete if dominated on the whole piece
            if p.x0 >= f.lo and p.x1 <= f.hi and self._dominated(f, g, p.x0, p.x1):
                lev.delete(k)
                if direction > 0:
                    continue
            k += direction
        return INF if direction > 0 else -INF

    def _first_drop(self, f, g, a, b, direction):
        xs = [x for x in intersections(f, g) if a < x < b]
        bounds = [a] + xs + [b]
        idx = range(len(bounds) - 1)
        if direction < 0:
            idx = reversed(idx)
        for j in idx:
            u0, u1 = bounds[j], bounds[j + 1]
            m = _midpoint(u0, u1) if u1 > u0 else u0
            if g.value(m) < f.value(m) - 1e-15 * (1 + abs(f.value(m))):
                return u0 if direction > 0 else u1
        return None

    def _dominated(self, f, g, a, b):
        xs = [x for x in intersections(f, g) if a < x < b]
        bounds = [a] + xs + [b]
        for j in range(len(bounds) - 1):
            m = _midpoint(bounds[j], bounds[j + 1]) if bounds[j + 1] > bounds[j] else bounds[j]
            if g.value(m) < f.value(m):
                return False
        return True
