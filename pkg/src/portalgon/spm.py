"""Shortest path maps by a continuous-Dijkstra sweep over triangle edges.

Each edge ``e`` of a triangulated portalgon keeps two lower envelopes of apexed
distance functions, one per incident triangle (side 0 is the triangle owning
the edge's canonical half, side 1 its twin). A function on side ``X`` describes
paths that reach ``e`` through triangle ``X``. The sweep value ``delta`` rises
monotonically; on each edge and side the set ``{x : env_X(x) <= delta}`` is a
union of intervals whose moving endpoints are called fronts.

Events per edge:

* ``a``: a local minimum of ``env_X`` is reached, so a new interval is born;
* ``b``: a front reaches the end of its envelope segment (switch, stall, merge);
* ``c``: a front hidden inside the other side's realized set catches up with
  that set's boundary and becomes exposed.

A function is on the realized map the moment one of its fronts is exposed. It
is then extended across ``e`` into the opposite triangle and inserted on that
triangle's other two edges. Vertices are finalized when a front reaches an
edge end and, if a shortest path may bend there, they seed new functions.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

from . import geom
from .envelope import INF, ApexedFunction, LowerEnvelope, intersections
from .geom import add, cross, dist, dot, lerp, orient, scale, sub
from .mesh import TriMesh, Triangulation
from .model import NotOnSurface, SurfacePoint
from .unfold import CrossingElement, GeodesicPath, PathPiece, Signature, VertexElement, crossing_profile


class NumericalStall(RuntimeError):
    """The sweep value went backwards by more than the tolerance."""


# --------------------------------------------------------------------------
# records


@dataclass(eq=False)
class VertexRecord:
    """A finalized surface vertex (or the source) acting as a path root."""

    cls: int
    dist: float
    corner: tuple  # (triangle, corner) where the arriving path ends
    via: Optional["Wave"] = None  # function realizing the vertex; None for the source
    seeded: bool = False


@dataclass(eq=False)
class Wave:
    """Payload of one apexed function: a signature restricted to an edge.

    ``apex`` is the unfolded pseudo-source in triangle ``tri``'s frame, where
    ``tri`` is the triangle the paths cross just before reaching ``edge``.
    """

    edge: int
    side: int
    tri: int
    apex: tuple
    offset: float
    pred: Optional["Wave"]
    root: VertexRecord
    depth: int
    fn: Optional[ApexedFunction] = None
    propagated: bool = False


@dataclass(eq=False)
class Front:
    side: int
    dir: int  # -1 left end of an interval, +1 right end
    f: ApexedFunction
    anchor: float
    stalled: bool = False
    at_end: bool = False
    end_cache: Optional[float] = None

    def pos(self, delta: float) -> float:
        if self.stalled:
            return self.anchor
        f = self.f
        r = math.sqrt(max(0.0, (delta - f.offset) ** 2 - f.ay ** 2))
        x = f.ax + self.dir * r
        x = max(x, self.anchor) if self.dir > 0 else min(x, self.anchor)
        return min(f.hi, max(f.lo, x))


@dataclass
class EdgeCounters:
    a_events: int = 0
    b_events: int = 0
    c_events: int = 0
    functions: int = 0
    late_insertions: int = 0


class EdgeState:
    """Sweep state of one triangle edge (items 1-5 of the per-edge bookkeeping)."""

    def __init__(self, eid, halves, length, frames, corners, isos):
        self.id = eid
        self.halves = halves  # [(tri, side)] or two of them
        self.length = length
        self.frames = frames  # per side: (origin, unit direction) in that triangle's frame
        self.corners = corners  # per side: (corner at x=0, corner at x=L)
        self.isos = isos  # per side: isometry into the other side's triangle frame
        nside = len(halves)
        self.env = [LowerEnvelope() for _ in range(nside)]
        self.waves = [[] for _ in range(nside)]
        self.intervals = [[] for _ in range(nside)]  # [left front, right front] pairs
        self.a_key = [(-INF, -INF, -1) for _ in range(nside)]
        self.version = 0
        self.counters = EdgeCounters()

    @property
    def sides(self):
        return range(len(self.halves))

    def fronts(self, side):
        for iv in self.intervals[side]:
            yield from iv

    def inside(self, side, x, delta, tol):
        """True if ``x`` lies strictly inside a realized interval of ``side``."""
        for lf, rf in self.intervals[side]:
            if lf.pos(delta) + tol < x < rf.pos(delta) - tol:
                return (lf, rf)
        return None


def _edge_frames(m: TriMesh):
    """Edge records with shared arclength coordinates on both sides."""
    edge_of = {}
    edges = []
    for k in range(m.n):
        for j in range(3):
            if (k, j) in edge_of:
                continue
            V = m.verts[k]
            o, b = V[j], V[(j + 1) % 3]
            L = dist(o, b)
            u = scale(sub(b, o), 1.0 / L)
            halves = [(k, j)]
            frames = [(o, u)]
            corners = [(j, (j + 1) % 3)]
            isos = [None]
            nb = m.nbr[k][j]
            if nb is not None:
                k2, j2, iso = nb
                halves.append((k2, j2))
                o2 = iso(o)
                frames.append((o2, iso.apply_vector(u)))
                W = m.verts[k2]
                c0 = j2 if dist(o2, W[j2]) <= dist(o2, W[(j2 + 1) % 3]) else (j2 + 1) % 3
                corners.append((c0, (j2 + 1) % 3 if c0 == j2 else j2))
                isos = [iso, iso.inverse()]
            eid = len(edges)
            edges.append(EdgeState(eid, halves, L, frames, corners, isos))
            for s, h in enumerate(halves):
                edge_of[h] = (eid, s)
    return edges, edge_of


_RANK = {"a": 0, "b": 1, "resume": 1, "c": 2}


class _Sweep:
    def __init__(self, mesh: TriMesh, on_event=None):
        self.m = mesh
        self.scale = mesh.scale
        self.tolx = 1e-12 * self.scale
        self.edges, self.edge_of = _edge_frames(mesh)
        self.delta = 0.0
        self.heap = []
        self.seq = itertools.count()
        self.vertices = {}
        self.source = None
        self.on_event = on_event
        self.events = 0
        self.dirty = set()
        self._repeat = (None, 0)

    # ---- functions ---------------------------------------------------------
    def make_wave(self, eid, side, apex, offset, lo, hi, pred, root):
        e = self.edges[eid]
        o, u = e.frames[side]
        v = sub(apex, o)
        lo, hi = max(0.0, lo), min(e.length, hi)
        if hi < lo:
            if hi < lo - self.tolx:
                return None
            lo = hi = 0.5 * (lo + hi)
        depth = pred.depth + 1 if pred is not None else (root.via.depth + 1 if root.via is not None else 0)
        w = Wave(eid, side, e.halves[side][0], apex, offset, pred, root, depth)
        w.fn = ApexedFunction(dot(v, u), cross(u, v), offset, lo, hi, payload=w)
        return w

    def insert(self, w: Wave):
        e = self.edges[w.edge]
        s = w.side
        f = w.fn
        e.env[s].insert(f)
        e.waves[s].append(w)
        e.counters.functions += 1
        for F in e.fronts(s):
            F.end_cache = None
        # late insertion: the part already below the sweep line becomes realized at once
        d = self.delta - f.offset
        if d >= f.ay - 1e-12 * (1.0 + abs(self.delta)):
            r = math.sqrt(max(0.0, d * d - f.ay * f.ay))
            a, b = max(f.lo, f.ax - r), min(f.hi, f.ax + r)
            if a <= b:
                e.counters.late_insertions += 1
                e.intervals[s].append([Front(s, -1, f, a), Front(s, +1, f, b)])
                self.normalize(e, s)
        self.dirty.add(e.id)

    # ---- vertices ----------------------------------------------------------
    def finalize(self, cls, d, corner, via):
        if cls in self.vertices:
            return
        rec = VertexRecord(cls, d, corner, via)
        self.vertices[cls] = rec
        if self.m.classes.needs_bend(cls):
            self.seed(rec)

    def seed(self, rec: VertexRecord):
        rec.seeded = True
        for k, c in self.m.classes.members[rec.cls]:
            P = self.m.verts[k][c]
            for j in (c, (c + 1) % 3, (c + 2) % 3):
                eid, s = self.edge_of[(k, j)]
                w = self.make_wave(eid, s, P, rec.dist, 0.0, self.edges[eid].length, None, rec)
                if w is not None:
                    self.insert(w)

    # ---- propagation -------------------------------------------------------
    def propagate(self, w: Wave):
        """Extend ``w`` across its edge onto the other two edges of the far triangle."""
        w.propagated = True
        e = self.edges[w.edge]
        s = w.side
        if len(e.halves) < 2 or w.fn.ay <= self.tolx:
            return
        k2, j2 = e.halves[1 - s]
        P = e.isos[s](w.apex)
        o, u = e.frames[1 - s]
        R, L = add(o, scale(u, w.fn.lo)), add(o, scale(u, w.fn.hi))
        if orient(P, R, L) < 0:
            R, L = L, R
        V = self.m.verts[k2]
        tol = 1e-12 * self.scale * self.scale
        for j in ((j2 + 1) % 3, (j2 + 2) % 3):
            Q0, Q1 = V[j], V[(j + 1) % 3]
            lo, hi = geom.clip_segment_halfplane(0.0, 1.0, orient(P, R, Q0), orient(P, R, Q1), tol)
            lo, hi = geom.clip_segment_halfplane(lo, hi, -orient(P, L, Q0), -orient(P, L, Q1), tol)
            if hi - lo <= 1e-9:
                continue  # only a vertex is visible; its own wave takes over from there
            eid, s2 = self.edge_of[(k2, j)]
            o2, u2 = self.edges[eid].frames[s2]
            x0 = dot(sub(lerp(Q0, Q1, lo), o2), u2)
            x1 = dot(sub(lerp(Q0, Q1, hi), o2), u2)
            nw = self.make_wave(eid, s2, P, w.offset, min(x0, x1), max(x0, x1), w, w.root)
            if nw is not None:
                self.insert(nw)

    # ---- sweep-line bookkeeping --------------------------------------------
    def normalize(self, e: EdgeState, s: int):
        """Sort the realized intervals of one side and merge those that touch."""
        d = self.delta
        ivs = sorted(e.intervals[s], key=lambda iv: iv[0].pos(d))
        out = []
        for iv in ivs:
            if out and out[-1][1].pos(d) >= iv[0].pos(d) - self.tolx:
                if iv[1].pos(d) > out[-1][1].pos(d):
                    out[-1][1] = iv[1]
            else:
                out.append(list(iv))
        e.intervals[s] = out

    def settle(self, e: EdgeState):
        """Advance anchors, merge, finalize reached vertices, propagate exposed fronts, reschedule."""
        d = self.delta
        for s in e.sides:
            for F in e.fronts(s):
                if not F.stalled:
                    F.anchor = F.pos(d)
            self.normalize(e, s)
            for F in list(e.fronts(s)):
                if F.at_end:
                    continue
                end = 0.0 if F.dir < 0 else e.length
                if abs(F.anchor - end) <= self.tolx and F.f.contains(end, self.tolx):
                    F.anchor, F.stalled, F.at_end = end, True, True
                    k, cc = e.halves[s][0], e.corners[s][0 if F.dir < 0 else 1]
                    self.finalize(self.m.corner_class[k][cc], F.f.value(end), (k, cc), F.f.payload)
        for s in e.sides:
            for F in list(e.fronts(s)):
                if not F.f.payload.propagated and self.exposed(e, F):
                    self.propagate(F.f.payload)
        self.schedule(e)

    def exposed(self, e: EdgeState, F: Front) -> bool:
        if len(e.halves) < 2:
            return True
        return e.inside(1 - F.side, F.pos(self.delta), self.delta, self.tolx) is None

    def schedule(self, e: EdgeState):
        e.version += 1
        d = self.delta
        best = None

        def cand(t, kind, payload):
            nonlocal best
            key = (t, _RANK[kind])
            if best is None or key < best[0]:
                best = (key, kind, payload)

        for s in e.sides:
            env = e.env[s]
            r = env.next_local_minimum_after(e.a_key[s])
            if r is not None:
                cand(max(r[1], d), "a", (s, r))
            for F in e.fronts(s):
                if F.at_end:
                    continue
                if F.stalled:
                    val, g = env.beyond(F.anchor, F.dir)
                    if g is not None:
                        cand(max(val, d), "resume", (F, g))
                    continue
                if F.end_cache is None:
                    F.end_cache = env.segment_end(F.f, F.anchor, F.dir)
                cand(max(F.f.value(F.end_cache), d), "b", (F, F.end_cache))
                t = self.catch_time(e, F)
                if t is not None:
                    cand(t, "c", (F,))
        if best is not None:
            (t, rank), kind, payload = best
            heapq.heappush(self.heap, (t, rank, e.id, next(self.seq), e.version, kind, payload))

    def catch_time(self, e: EdgeState, F: Front):
        """When a hidden moving front leaves the other side's realized interval, or None."""
        if len(e.halves) < 2:
            return None
        d = self.delta
        x = F.pos(d)
        iv = e.inside(1 - F.side, x, d, self.tolx)
        if iv is None:
            return None
        G = iv[1] if F.dir > 0 else iv[0]
        if G.stalled:
            w = G.anchor
            if F.f.contains(w, self.tolx):
                return max(F.f.value(w), d)
            return None
        best = None
        for xi in intersections(F.f, G.f):
            if (xi - x) * F.dir < -self.tolx:
                continue
            v = F.f.value(xi)
            if v > d and (best is None or v < best):
                best = v
        return best

    def flush(self):
        while self.dirty:
            eid = min(self.dirty)
            self.dirty.discard(eid)
            self.settle(self.edges[eid])

    # ---- event loop --------------------------------------------------------
    def start(self, k, c):
        cls = self.m.corner_class[k][c]
        rec = VertexRecord(cls, 0.0, (k, c), None)
        self.vertices[cls] = rec
        self.source = rec
        self.seed(rec)
        for e in self.edges:
            self.dirty.add(e.id)
        self.flush()

    def run(self):
        while self.heap:
            t, rank, eid, _, ver, kind, payload = heapq.heappop(self.heap)
            e = self.edges[eid]
            if ver != e.version:
                continue
            if t < self.delta - 1e-9 * (1.0 + self.delta):
                raise NumericalStall(f"event {kind} on edge {eid} at {t!r} below sweep value {self.delta!r}")
            if t == self.delta and self._repeat[0] == (eid, kind):
                self._repeat = (self._repeat[0], self._repeat[1] + 1)
                if self._repeat[1] > 1000:
                    raise NumericalStall(f"event {kind} on edge {eid} repeats at {t!r}")
            else:
                self._repeat = ((eid, kind), 0)
            self.delta = max(self.delta, t)
            self.events += 1
            self.process(e, kind, payload)
            self.dirty.add(e.id)
            self.flush()
            if self.on_event is not None:
                self.on_event(self)

    def process(self, e: EdgeState, kind, payload):
        d = self.delta
        if kind == "a":
            s, (x, v, f) = payload
            e.a_key[s] = (v, x, f.fid)
            e.counters.a_events += 1
            if any(lf.pos(d) - self.tolx <= x <= rf.pos(d) + self.tolx for lf, rf in e.intervals[s]):
                return
            if v < d - 1e-9 * (1.0 + d):
                raise NumericalStall(f"minimum at {v!r} on edge {e.id} found below sweep value {d!r}")
            e.intervals[s].append([Front(s, -1, f, x), Front(s, +1, f, x)])
            self.normalize(e, s)
        elif kind == "c":
            e.counters.c_events += 1
            (F,) = payload
            if not F.f.payload.propagated:
                self.propagate(F.f.payload)
        elif kind == "resume":
            F, g = payload
            e.counters.b_events += 1
            F.f, F.stalled, F.end_cache = g, False, None
        else:
            F, v = payload
            e.counters.b_events += 1
            F.anchor, F.end_cache = v, None
            end = 0.0 if F.dir < 0 else e.length
            if abs(v - end) <= self.tolx:
                return  # settle() marks the edge end reached
            val, g = e.env[F.side].beyond(v, F.dir)
            if g is None or val > d + 1e-12 * (1.0 + d):
                F.stalled = True
            else:
                F.f, F.stalled = g, False


# --------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class MapInterval:
    x0: float
    x1: float
    wave: Wave
    side: int

    def value(self, x):
        return self.wave.fn.value(x)


@dataclass
class EdgeMap:
    id: int
    halves: tuple
    length: float
    intervals: list
    n_functions: tuple  # |S_A|, |S_B|
    counters: EdgeCounters


@dataclass
class EdgeSPM:
    triangulation: Triangulation
    mesh: TriMesh
    source: SurfacePoint
    source_corner: tuple
    edges: list
    edge_of: dict
    frames: list
    isos: list
    vertices: dict
    events: int

    @property
    def n_intervals(self) -> int:
        return sum(len(em.intervals) for em in self.edges)


def _combine(e: EdgeState):
    """Lower envelope of both sides as labeled intervals."""
    parts = [(x0, x1, f, s) for s in e.sides for (x0, x1, f) in e.env[s].pieces()]
    cuts = sorted({x for x0, x1, _, _ in parts for x in (x0, x1)})
    out = []
    for k in range(len(cuts) - 1):
        a, b = cuts[k], cuts[k + 1]
        m = 0.5 * (a + b)
        cand = [(f, s) for x0, x1, f, s in parts if x0 <= m <= x1]
        if not cand:
            continue
        bounds = {a, b}
        for i in range(len(cand)):
            for j in range(i + 1, len(cand)):
                bounds.update(x for x in intersections(cand[i][0], cand[j][0]) if a < x < b)
        bounds = sorted(bounds)
        for j in range(len(bounds) - 1):
            u0, u1 = bounds[j], bounds[j + 1]
            mm = 0.5 * (u0 + u1)
            vals = [c[0].value(mm) for c in cand]
            lo = min(vals)
            # numerically tied waves keep the running label so no sliver interval is emitted
            tied = [c for c, v in zip(cand, vals) if v <= lo + 1e-12 * (1.0 + lo)]
            prev = out[-1].wave if out and out[-1].x1 == u0 else None
            f, s = min(tied, key=lambda c: (c[0].payload is not prev, c[0].payload.depth, c[0].fid))
            if out and out[-1].wave is f.payload and out[-1].x1 == u0:
                out[-1] = MapInterval(out[-1].x0, u1, f.payload, s)
            else:
                out.append(MapInterval(u0, u1, f.payload, s))
    return _absorb_slivers(out, 1e-12 * (1.0 + e.length))


def _absorb_slivers(ivs, eps):
    """Give intervals of width at most ``eps`` to a neighbour, then merge equal labels."""
    keep = [iv for iv in ivs if iv.x1 - iv.x0 > eps] or ivs[:1]
    out = []
    for iv in keep:
        if out and iv.x0 - out[-1].x1 <= eps:
            if out[-1].wave is iv.wave:
                out[-1] = MapInterval(out[-1].x0, iv.x1, iv.wave, iv.side)
            else:
                out.append(MapInterval(out[-1].x1, iv.x1, iv.wave, iv.side))
        else:
            out.append(iv)
    if out and ivs:
        out[0] = MapInterval(ivs[0].x0, out[0].x1, out[0].wave, out[0].side)
        out[-1] = MapInterval(out[-1].x0, ivs[-1].x1, out[-1].wave, out[-1].side)
    return out


def _source_corner(m: TriMesh, s: SurfacePoint):
    tol = 1e-12 * m.scale
    for k, x in m.triangles_at(s):
        for c in range(3):
            if dist(m.verts[k][c], x) <= tol:
                return k, c
    raise ValueError("the source must be a vertex of the triangulation")


def compute_edge_spm(t: Triangulation, s: SurfacePoint, on_event=None) -> EdgeSPM:
    """Shortest path map from vertex ``s`` restricted to the triangulation edges.

    ``on_event(sweep)`` is called after every processed event (instrumentation).
    """
    m = TriMesh(t)
    k, c = _source_corner(m, s)
    sw = _Sweep(m, on_event)
    sw.start(k, c)
    sw.run()
    edges = []
    for e in sw.edges:
        edges.append(EdgeMap(e.id, tuple(e.halves), e.length, _combine(e),
                             tuple(len(w) for w in e.waves) + (0,) * (2 - len(e.waves)), e.counters))
    return EdgeSPM(t, m, s, (k, c), edges, sw.edge_of, [e.frames for e in sw.edges],
                   [e.isos for e in sw.edges], sw.vertices, sw.events)


# --------------------------------------------------------------------------
# interior extension


@dataclass(frozen=True)
class Generator:
    """A weighted site inside one triangle frame.

    ``window`` is the boundary interval ``(R, L)`` the paths enter through, or
    None for a vertex site, which sees the whole triangle.
    """

    apex: tuple
    offset: float
    wave: Optional[Wave] = None
    vertex: Optional[VertexRecord] = None
    window: Optional[tuple] = None

    def sees(self, X, tol) -> bool:
        if self.window is None:
            return True
        R, L = self.window
        return orient(self.apex, R, X) >= -tol and orient(self.apex, L, X) <= tol

    def value(self, X) -> float:
        return self.offset + dist(self.apex, X)


@dataclass
class TriangleSPM:
    generators: list  # per triangle
    cells: list  # per triangle: indices of generators owning a cell
    tol: float

    def evaluate(self, k: int, X):
        """``(distance, generator)`` at a point of triangle ``k`` (its own frame)."""
        best = (INF, None)
        for g in self.generators[k]:
            if g.sees(X, self.tol):
                v = g.value(X)
                if v < best[0] - 1e-15 or (v <= best[0] + 1e-15 and best[1] is not None
                                           and _depth(g) < _depth(best[1])):
                    best = (v, g)
        return best


def _depth(g: Generator) -> int:
    if g.wave is not None:
        return g.wave.depth
    return g.vertex.via.depth + 1 if g.vertex.via is not None else 0


def _generators(E: EdgeSPM, k: int):
    m = E.mesh
    out = []
    for c in range(3):
        rec = E.vertices.get(m.corner_class[k][c])
        if rec is not None and rec.seeded:
            out.append(Generator(m.verts[k][c], rec.dist, vertex=rec))
    tol = 1e-12 * m.scale
    for j in range(3):
        eid, s = E.edge_of[(k, j)]
        em = E.edges[eid]
        if len(em.halves) < 2:
            continue
        iso = E.isos[eid][1 - s]
        o, u = E.frames[eid][s]
        for iv in em.intervals:
            if iv.side == s or iv.wave.fn.ay <= tol:
                continue
            P = iso(iv.wave.apex)
            R, L = add(o, scale(u, iv.x0)), add(o, scale(u, iv.x1))
            if orient(P, R, L) < 0:
                R, L = L, R
            out.append(Generator(P, iv.wave.offset, wave=iv.wave, window=(R, L)))
    return out


def extend_to_interior(t: Triangulation, edge_spm: EdgeSPM, samples: int = 12) -> TriangleSPM:
    """Per triangle, the weighted sites whose minimum gives the distance inside it.

    Cells are reported as the sites that win somewhere on a barycentric sample
    grid of ``samples`` subdivisions per side, plus every site's window midpoint.
    """
    m = edge_spm.mesh
    tol = 1e-12 * m.scale * m.scale
    gens = [_generators(edge_spm, k) for k in range(m.n)]
    spm = TriangleSPM(gens, [], tol)
    for k in range(m.n):
        a, b, c = m.verts[k]
        pts = []
        for i in range(samples + 1):
            for j in range(samples + 1 - i):
                w0, w1 = i / samples, j / samples
                w2 = 1.0 - w0 - w1
                pts.append((w0 * a[0] + w1 * b[0] + w2 * c[0], w0 * a[1] + w1 * b[1] + w2 * c[1]))
        # nudge window midpoints inside so the owning site is visible there
        cen = ((a[0] + b[0] + c[0]) / 3, (a[1] + b[1] + c[1]) / 3)
        for g in gens[k]:
            if g.window is not None:
                mid = lerp(*g.window, 0.5)
                pts.append(lerp(mid, cen, 1e-6))
        won = set()
        for X in pts:
            _, g = spm.evaluate(k, X)
            if g is not None:
                won.add(gens[k].index(g))
        spm.cells.append(sorted(won))
    return spm


# --------------------------------------------------------------------------
# maps and queries


@dataclass
class ShortestPathMap:
    source: SurfacePoint
    edge_map: EdgeSPM
    interior_map: TriangleSPM
    complexity: dict = field(default_factory=dict)


def shortest_path_map(p, s: SurfacePoint, edges_only: bool = False, on_event=None) -> ShortestPathMap:
    """Triangulate with ``s`` as a vertex, sweep the edges, then fill the triangles."""
    from .mesh import triangulate

    t = triangulate(p, [s])
    E = compute_edge_spm(t, s, on_event=on_event)
    interior = TriangleSPM([_generators(E, k) for k in range(E.mesh.n)], [], 1e-12 * E.mesh.scale ** 2) \
        if edges_only else extend_to_interior(t, E)
    spm = ShortestPathMap(s, E, interior)
    spm.complexity = spm_complexity(spm)
    return spm


def _edge_candidates(E: EdgeSPM, k: int, X):
    tol = 1e-12 * E.mesh.scale
    for j in range(3):
        eid, s = E.edge_of[(k, j)]
        o, u = E.frames[eid][s]
        em = E.edges[eid]
        B = add(o, scale(u, em.length))
        if geom.point_segment_distance(X, o, B) > tol:
            continue
        x = min(em.length, max(0.0, dot(sub(X, o), u)))
        for iv in em.intervals:
            if iv.x0 - tol <= x <= iv.x1 + tol:
                yield iv.value(min(iv.x1, max(iv.x0, x))), iv.wave


def query(spm: ShortestPathMap, q: SurfacePoint) -> GeodesicPath:
    """Shortest path from the map's source to ``q`` with its polyline."""
    E = spm.edge_map
    m = E.mesh
    pairs = m.triangles_at(q)
    if not pairs:
        raise NotOnSurface(f"{q} is not on the surface")
    ks, kc = E.source_corner
    tol = 1e-12 * m.scale
    best = None
    for k, X in pairs:
        if k == ks and dist(X, m.verts[ks][kc]) <= tol:
            return GeodesicPath(0.0, Signature(spm.source.fragment, ()), [])
        v, g = spm.interior_map.evaluate(k, X)
        if g is not None and (best is None or v < best[0]):
            best = (v, k, X, g.wave, g.vertex, g.apex)
        for v, w in _edge_candidates(E, k, X):
            if best is None or v < best[0]:
                best = (v, k, X, w, None, None)
    if best is None:
        raise NotOnSurface(f"{q} is not reachable from the source")
    v, k, X, w, rec, apex = best
    return _reconstruct(spm, v, k, X, w, rec, apex)


def _reconstruct(spm, length, k, X, w, rec, apex) -> GeodesicPath:
    from .unfold import _hit

    E = spm.edge_map
    m = E.mesh
    pieces, elems = [], []
    if rec is not None:
        pieces.append((k, apex, X))
    while True:
        if rec is not None:
            if rec.via is None:
                break
            kk, cc = rec.corner
            fv = m.tri.corner_source.get((kk, cc), (m.tri.origin[kk], cc))
            elems.append(VertexElement(fv[0], fv[1], rec.cls))
            k, X, w, rec = kk, m.verts[kk][cc], rec.via, None
        e_id, side = w.edge, w.side
        if w.tri != k:
            sk = 1 - side
            P = E.isos[e_id][side](w.apex)
            o, u = E.frames[e_id][sk]
            Y = _hit(P, X, o, add(o, scale(u, E.edges[e_id].length)))
            pieces.append((k, Y, X))
            tw, jw = E.edges[e_id].halves[side]
            h = m.orig_half[tw][jw]
            if h is not None:
                elems.append(CrossingElement(h))
            X, k = E.isos[e_id][sk](Y), w.tri
        if w.pred is not None:
            w = w.pred
            continue
        pieces.append((k, w.apex, X))
        rec = w.root
    pieces.reverse()
    elems.reverse()
    return _assemble(m, spm.source.fragment, length, pieces, elems)


def _assemble(m: TriMesh, start, length, pieces, elems) -> GeodesicPath:
    poly = []
    tol = 1e-12 * m.scale
    for k, a, b in pieces:
        f = m.tri.origin[k]
        if poly and poly[-1].fragment == f and dist(poly[-1].points[-1], a) <= tol:
            if dist(a, b) > 0:
                poly[-1].points.append(b)
        else:
            poly.append(PathPiece(f, [a, b]))
    poly = [pc for pc in poly if pc.length > tol]
    path = GeodesicPath(length, Signature(start, tuple(elems)), poly)
    path.crossing_count = crossing_profile(path)
    return path


def spm_complexity(spm: ShortestPathMap) -> dict:
    """Interval, cell and signature counts plus prefix-tree statistics."""
    E = spm.edge_map
    waves = {iv.wave for em in E.edges for iv in em.intervals}
    keys = {}

    def key(node):
        if id(node) in keys:
            return keys[id(node)]
        if isinstance(node, Wave):
            k = key(node.pred) + (("e", node.pred.edge),) if node.pred is not None else key(node.root)
        else:
            k = key(node.via) + (("v", node.cls),) if node.via is not None else ()
        keys[id(node)] = k
        return k

    sigs = {key(w) for w in waves}
    nodes = set()
    for sg in sigs:
        for i in range(len(sg) + 1):
            nodes.add(sg[:i])
    children = {}
    for nd in nodes:
        if nd:
            children.setdefault(nd[:-1], set()).add(nd)
    leaves = [nd for nd in nodes if nd not in children]
    return {
        "edge_intervals": E.n_intervals,
        "interior_cells": sum(len(c) for c in spm.interior_map.cells),
        "signatures": len(sigs),
        "functions": sum(sum(em.n_functions) for em in E.edges),
        "tree_nodes": len(nodes),
        "tree_leaves": len(leaves),
        "tree_depth": max((len(nd) for nd in nodes), default=0),
        "tree_max_branching": max((len(c) for c in children.values()), default=0),
        "events": E.events,
    }
