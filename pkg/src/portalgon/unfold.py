"""Signatures, unfolding, apexed distance functions and a brute-force path oracle.

The oracle is an exact best-first search over *windows*: cones of straight
segments leaving an apex (the source or a surface vertex where the path
bends), followed triangle by triangle through an internal triangulation.
Keys are admissible lower bounds, so the first time a target is popped its
distance is exact.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

from . import geom
from .envelope import ApexedFunction
from .geom import EdgeInterval, Isometry, IDENTITY, compose, dist, orient
from .mesh import TriMesh, triangulate
from .model import PortalEdgeRef, Portalgon, SurfacePoint, check


class IncoherentSignature(ValueError):
    pass


class EmptyInterval(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    def __init__(self, message, upper_bound=None):
        super().__init__(message)
        self.upper_bound = upper_bound


class Unreachable(ValueError):
    pass


# --------------------------------------------------------------------------
# signatures


@dataclass(frozen=True)
class VertexElement:
    """The path bends at a surface vertex; ``fragment``/``vertex`` name the corner it leaves from."""

    fragment: int
    vertex: int
    cls: Optional[int] = None


@dataclass(frozen=True)
class CrossingElement:
    """The path crosses portal half ``half`` (leaving ``half.fragment``)."""

    half: PortalEdgeRef


@dataclass(frozen=True)
class Signature:
    start: int  # fragment holding the source
    elements: tuple = ()

    def __len__(self):
        return len(self.elements)

    def crossings(self):
        return [e for e in self.elements if isinstance(e, CrossingElement)]

    def vertices(self):
        return [e for e in self.elements if isinstance(e, VertexElement)]

    def suffix(self):
        """``(start fragment, crossings)`` after the last vertex."""
        start = self.start
        tail = []
        for e in self.elements:
            if isinstance(e, VertexElement):
                start = e.fragment
                tail = []
            else:
                tail.append(e)
        return start, tail

    def key(self):
        """Lexicographic tie-break key over (element kind, identifier)."""
        out = []
        for e in self.elements:
            if isinstance(e, VertexElement):
                out.append((0, e.fragment, e.vertex, 0))
            else:
                out.append((1, e.half.fragment, e.half.edge_index, int(e.half.reversed)))
        return tuple(out)


def unfold_along(p: Portalgon, sig: Signature, into_fragment: int) -> Isometry:
    """Isometry from the apex frame (source or last vertex) to ``into_fragment``'s frame."""
    cur, tail = sig.suffix()
    g = IDENTITY
    for e in tail:
        h = e.half
        if h.fragment != cur:
            raise IncoherentSignature(f"crossing {h} does not leave fragment {cur}")
        rec = p.twin(h.fragment, h.edge_index)
        if rec is None or rec[1] != h:
            raise IncoherentSignature(f"{h} is not a portal half")
        o = rec[2]
        g = compose(p.glue(h, o), g)
        cur = o.fragment
    if cur != into_fragment:
        raise IncoherentSignature(f"signature ends in fragment {cur}, not {into_fragment}")
    return g


@dataclass
class ApexedDistanceFunction:
    """``offset + |apex - point(edge, t)|`` for ``t`` in ``domain``; parameters follow the directed edge."""

    edge: PortalEdgeRef
    apex: tuple
    offset: float
    domain: EdgeInterval
    signature: Signature
    segment: tuple  # directed edge endpoints in its fragment frame
    predecessor: Optional["ApexedDistanceFunction"] = None

    @property
    def length(self):
        return dist(*self.segment)

    def point(self, t):
        return geom.lerp(self.segment[0], self.segment[1], t)

    def value(self, t):
        if not (self.domain.lo - 1e-12 <= t <= self.domain.hi + 1e-12):
            return math.inf
        return self.offset + dist(self.apex, self.point(t))

    def as_partial(self, payload=None) -> ApexedFunction:
        """The same function in arclength coordinates along the edge."""
        a, b = self.segment
        L = self.length
        u = geom.scale(geom.sub(b, a), 1.0 / L)
        w = geom.sub(self.apex, a)
        return ApexedFunction(geom.dot(w, u), geom.cross(u, w), self.offset,
                              self.domain.lo * L, self.domain.hi * L, payload=payload)


def _clip_linear(lo, hi, f0, f1):
    """Sub-interval of [lo, hi] (in [0, 1]) where the linear map 0->f0, 1->f1 is >= 0."""
    if f0 >= 0 and f1 >= 0:
        return lo, hi
    if f0 < 0 and f1 < 0:
        return 1.0, 0.0
    s = f0 / (f0 - f1)
    if f0 < 0:
        return max(lo, s), hi
    return lo, min(hi, s)


def distance_function(p: Portalgon, sig: Signature, edge: PortalEdgeRef, source: SurfacePoint,
                      dist_to_last_vertex: float = 0.0) -> ApexedDistanceFunction:
    start, tail = sig.suffix()
    if sig.vertices():
        v = sig.vertices()[-1]
        apex0 = p.fragments[v.fragment].vertices[v.vertex]
    else:
        if source.fragment != start:
            raise IncoherentSignature("source is not in the signature's start fragment")
        apex0 = tuple(source.location)
    # M maps the current fragment frame back to the apex frame
    M = IDENTITY
    cur = start
    copies = []
    for e in tail:
        h = e.half
        if h.fragment != cur:
            raise IncoherentSignature(f"crossing {h} does not leave fragment {cur}")
        a, b = p.half_segment(h)
        copies.append((M(a), M(b)))
        rec = p.twin(h.fragment, h.edge_index)
        if rec is None:
            raise IncoherentSignature(f"{h} is not a portal half")
        o = rec[2]
        M = compose(M, p.glue(o, h))
        cur = o.fragment
    if edge.fragment != cur:
        raise IncoherentSignature(f"edge {edge} is not in fragment {cur}")
    seg = p.half_segment(edge)
    e0, e1 = M(seg[0]), M(seg[1])
    lo, hi = 0.0, 1.0
    A = apex0
    scale = max(dist(A, e0), dist(A, e1), dist(e0, e1))
    tol = 1e-12 * scale * scale
    for P, Q in copies:
        if orient(A, P, Q) < 0:
            P, Q = Q, P
        lo, hi = _clip_linear(lo, hi, orient(A, P, e0) + tol, orient(A, P, e1) + tol)
        lo, hi = _clip_linear(lo, hi, -orient(A, Q, e0) + tol, -orient(A, Q, e1) + tol)
        # beyond the portal copy, on the far side from the apex
        sa = orient(P, Q, A)
        sgn = -1.0 if sa > 0 else 1.0
        lo, hi = _clip_linear(lo, hi, sgn * orient(P, Q, e0) + tol, sgn * orient(P, Q, e1) + tol)
        if lo > hi:
            break
    if lo > hi:
        raise EmptyInterval("no straight segment threads the unfolded portals")
    apex = M.inverse()(A)
    return ApexedDistanceFunction(edge, apex, float(dist_to_last_vertex), EdgeInterval(lo, hi), sig, seg)


# --------------------------------------------------------------------------
# paths


@dataclass
class PathPiece:
    """A maximal straight-or-bent run of the path inside one fragment."""

    fragment: int
    points: list

    @property
    def length(self):
        return sum(dist(a, b) for a, b in zip(self.points, self.points[1:]))


@dataclass
class GeodesicPath:
    length: float
    signature: Signature
    polyline: list = field(default_factory=list)
    crossing_count: dict = field(default_factory=dict)
    budget_exceeded: bool = False

    @property
    def complexity(self) -> int:
        """Size of the combinatorial representation: endpoints, bends and crossings."""
        return 2 + len(self.signature)

    def total_length(self) -> float:
        return sum(pc.length for pc in self.polyline)


def crossing_profile(path: GeodesicPath) -> dict:
    """Number of connected components of the path inside each fragment."""
    out = {}
    for pc in path.polyline:
        if pc.length > 0:
            out[pc.fragment] = out.get(pc.fragment, 0) + 1
    return out


@dataclass
class SearchBudget:
    max_signature: Optional[int] = None  # default: 64 + 16 * portal count
    max_expansions: int = 10 ** 6


class _Win:
    __slots__ = ("k", "A", "R", "L", "d0", "parent", "via", "iso", "root", "depth", "exits")

    def __init__(self, k, A, R, L, d0, parent, via, iso, root, depth, exits):
        self.k = k
        self.A = A
        self.R = R
        self.L = L
        self.d0 = d0
        self.parent = parent
        self.via = via  # (parent triangle, exit side) or None
        self.iso = iso  # parent frame -> this frame
        self.root = root  # _Root for apex windows
        self.depth = depth
        self.exits = exits


class _Root:
    """An apex: the source, or a surface vertex reached by ``arrival``."""

    __slots__ = ("d", "arrival", "k", "x", "cls", "corner")

    def __init__(self, d, arrival, k, x, cls=None, corner=None):
        self.d = d
        self.arrival = arrival  # window that reached the vertex (None for the source)
        self.k = k  # triangle of the arrival window
        self.x = x  # vertex location in that triangle
        self.cls = cls
        self.corner = corner


def oracle_mesh(p: Portalgon) -> TriMesh:
    m = getattr(p, "_oracle_mesh", None)
    if m is None:
        check(p)
        m = TriMesh(triangulate(p, separate=False))
        p._oracle_mesh = m
    return m


class _Search:
    def __init__(self, p: Portalgon, s: SurfacePoint, targets, budget: Optional[SearchBudget]):
        self.p = p
        self.mesh = oracle_mesh(p)
        budget = budget or SearchBudget()
        self.max_sig = budget.max_signature
        if self.max_sig is None:
            self.max_sig = 64 + 16 * len(p.portals)
        self.max_exp = budget.max_expansions
        self.tol = 1e-12 * self.mesh.scale
        self.heap = []
        self.seq = itertools.count()
        self.s = s
        self.t_locs = [self.mesh.triangles_at(t) for t in targets]
        self.t_in_tri = {}
        for ti, locs in enumerate(self.t_locs):
            for k, x in locs:
                self.t_in_tri.setdefault(k, []).append((ti, x))
        self.best_t = [math.inf] * len(targets)
        self.done_t = [None] * len(targets)
        self.best_v = {}
        self.done_v = {}
        self.pruned_key = math.inf
        self.expansions = 0
        m = self.mesh
        self.bend = {c for c in m.classes.members if m.classes.needs_bend(c)}
        self.target_classes = set()
        for locs in self.t_locs:
            for k, x in locs:
                for c in range(3):
                    if dist(m.verts[k][c], x) <= self.tol:
                        self.target_classes.add(m.corner_class[k][c])

    def push(self, key, rank, item):
        heapq.heappush(self.heap, (key, rank, next(self.seq), item))

    # ---- seeding ----------------------------------------------------------
    def seed(self):
        m = self.mesh
        src = m.triangles_at(self.s)
        for k, x in src:
            for c in range(3):
                if dist(m.verts[k][c], x) <= self.tol:
                    cls = m.corner_class[k][c]
                    root = _Root(0.0, None, k, x, cls, (k, c))
                    self.best_v[cls] = 0.0
                    self.push(0.0, 1, ("v", cls, root))
                    return
        root = _Root(0.0, None, None, None)
        for k, x in src:
            exits = tuple(j for j in range(3)
                          if abs(orient(m.verts[k][j], m.verts[k][(j + 1) % 3], x)) > self.tol * self.mesh.scale)
            w = _Win(k, x, None, None, 0.0, None, None, None, root, 0, exits)
            self.push(0.0, 2, ("w", w))

    # ---- main loop --------------------------------------------------------
    def run(self):
        self.seed()
        remaining = sum(1 for d in self.done_t if d is None)
        while self.heap and remaining:
            key, rank, _, item = heapq.heappop(self.heap)
            kind = item[0]
            if kind == "t":
                _, ti, d, w, x = item
                if self.done_t[ti] is None:
                    if self.pruned_key < d - 1e-12 * (1 + d):
                        raise BudgetExceeded(
                            f"signature budget {self.max_sig} too small", upper_bound=d)
                    self.done_t[ti] = (d, w, x)
                    remaining -= 1
            elif kind == "v":
                _, cls, root = item
                if cls in self.done_v:
                    continue
                self.done_v[cls] = root
                self.emit_vertex(cls, root)
            else:
                self.expansions += 1
                if self.expansions > self.max_exp:
                    ub = min((b for b in self.best_t), default=math.inf)
                    raise BudgetExceeded(f"more than {self.max_exp} expansions", upper_bound=ub)
                self.expand(item[1])
        return self.done_t

    def emit_vertex(self, cls, root):
        m = self.mesh
        for (k, c) in m.classes.members[cls]:
            x = m.verts[k][c]
            exits = ((c + 1) % 3,)
            w = _Win(k, x, None, None, root.d, None, None, None,
                     _Root(root.d, root.arrival, root.k, root.x, cls, (k, c)), self._depth_of(root), exits)
            self.push(root.d, 2, ("w", w))

    def _depth_of(self, root):
        if root.arrival is None:
            return 0
        return root.arrival.depth + 1

    def inside(self, w, X):
        if w.R is None:
            return True
        A = w.A
        s = max(dist(A, X), 1e-300) * self.tol
        return orient(A, w.R, X) >= -s and orient(A, w.L, X) <= s

    def expand(self, w: _Win):
        m = self.mesh
        k = w.k
        V = m.verts[k]
        A = w.A
        # targets in this triangle
        for ti, x in self.t_in_tri.get(k, ()):
            if self.done_t[ti] is None and self.inside(w, x):
                d = w.d0 + dist(A, x)
                if d < self.best_t[ti]:
                    self.best_t[ti] = d
                    self.push(d, 0, ("t", ti, d, w, x))
        # corners of this triangle
        for c in range(3):
            cls = m.corner_class[k][c]
            if cls not in self.bend and cls not in self.target_classes:
                continue
            if cls in self.done_v:
                continue
            v = V[c]
            if dist(v, A) <= self.tol:
                continue
            if not self.inside(w, v):
                continue
            d = w.d0 + dist(A, v)
            if d < self.best_v.get(cls, math.inf):
                self.best_v[cls] = d
                self.push(d, 1, ("v", cls, _Root(d, w, k, v, cls, (k, c))))
        # children
        for j in w.exits:
            nb = m.nbr[k][j]
            if nb is None:
                continue
            P, Q = V[j], V[(j + 1) % 3]
            lo, hi = 0.0, 1.0
            if w.R is not None:
                lo, hi = _clip_linear(lo, hi, orient(A, w.R, P), orient(A, w.R, Q))
                lo, hi = _clip_linear(lo, hi, -orient(A, w.L, P), -orient(A, w.L, Q))
            if hi - lo <= 1e-12:
                continue
            k2, j2, g = nb
            X0 = geom.lerp(P, Q, lo)
            X1 = geom.lerp(P, Q, hi)
            A2, Y0, Y1 = g(A), g(X0), g(X1)
            if orient(A2, Y0, Y1) < 0:
                Y0, Y1 = Y1, Y0
            depth = w.depth + (1 if m.orig_half[k][j] is not None else 0)
            key = w.d0 + geom.point_segment_distance(A2, Y0, Y1)
            if depth > self.max_sig:
                self.pruned_key = min(self.pruned_key, key)
                continue
            exits = ((j2 + 1) % 3, (j2 + 2) % 3)
            child = _Win(k2, A2, Y0, Y1, w.d0, w, (k, j), g, None, depth, exits)
            self.push(key, 2, ("w", child))

    # ---- reconstruction ---------------------------------------------------
    def path(self, ti) -> GeodesicPath:
        m = self.mesh
        d, W, X = self.done_t[ti]
        pieces = []
        elems = []
        while True:
            k = W.k
            if W.R is None:
                pieces.append((k, W.A, X))
                root = W.root
                if root.arrival is None:
                    break
                kk, cc = root.corner
                fv = m.tri.corner_source.get((kk, cc), (m.tri.origin[kk], cc))
                elems.append(VertexElement(fv[0], fv[1], root.cls))
                X, W = root.x, root.arrival
                continue
            pk, pj = W.via
            _, j2, _ = m.nbr[pk][pj]
            P, Q = m.verts[k][j2], m.verts[k][(j2 + 1) % 3]
            Y = _hit(W.A, X, P, Q)
            pieces.append((k, Y, X))
            h = m.orig_half[pk][pj]
            if h is not None:
                elems.append(CrossingElement(h))
            X, W = W.iso.inverse()(Y), W.parent
        pieces.reverse()
        elems.reverse()
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
        path = GeodesicPath(d, Signature(self.s.fragment, tuple(elems)), poly)
        path.crossing_count = crossing_profile(path)
        return path


def _hit(A, X, P, Q):
    """Point where segment A->X crosses the line through P, Q (clamped onto PQ)."""
    r = geom.segment_intersection_params(A, X, P, Q)
    if r is None:
        return X
    _, t = r
    return geom.lerp(P, Q, min(1.0, max(0.0, t)))


def _same_point(p: Portalgon, s: SurfacePoint, t: SurfacePoint) -> bool:
    return s.fragment == t.fragment and dist(s.location, t.location) <= 1e-12 * p.diameter_bound()


def oracle_paths(p: Portalgon, s: SurfacePoint, targets, budget: Optional[SearchBudget] = None):
    """Shortest paths from ``s`` to every target (None where unreachable)."""
    search = _Search(p, s, targets, budget)
    search.run()
    out = []
    for ti, t in enumerate(targets):
        if _same_point(p, s, t):
            out.append(GeodesicPath(0.0, Signature(s.fragment, ())))
        elif search.done_t[ti] is None:
            out.append(None)
        else:
            out.append(search.path(ti))
    return out


def oracle_distances(p: Portalgon, s: SurfacePoint, targets, budget: Optional[SearchBudget] = None):
    search = _Search(p, s, targets, budget)
    search.run()
    return [0.0 if _same_point(p, s, t) else (math.inf if r is None else r[0])
            for t, r in zip(targets, search.done_t)]


def oracle_shortest_path(p: Portalgon, s: SurfacePoint, t: SurfacePoint,
                         budget: Optional[SearchBudget] = None) -> GeodesicPath:
    path = oracle_paths(p, s, [t], budget)[0]
    if path is None:
        raise Unreachable(f"{t} is not reachable from {s}")
    return path
