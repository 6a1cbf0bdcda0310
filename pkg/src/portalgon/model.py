"""Portalgon data model: fragments, portals, validation and surface addressing.

Fragments are indexed by their position in ``Portalgon.fragments``; every
fragment keeps its own local coordinate frame. Edge ``i`` of a fragment runs
from vertex ``i`` to vertex ``i + 1``. A portal half ``PortalEdgeRef`` is a
*directed* fragment edge: it runs along the counterclockwise boundary unless
``reversed`` is set. Parameter ``t`` on one half is identified with parameter
``t`` on its twin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import geom
from .geom import EPS_REL, Segment, dist, lerp


class InvalidPortalgon(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations) or "invalid portalgon")


class NotOnSurface(ValueError):
    pass


@dataclass(frozen=True)
class PortalEdgeRef:
    fragment: int
    edge_index: int
    reversed: bool = False


@dataclass(frozen=True)
class Fragment:
    id: int
    vertices: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple((float(x), float(y)) for x, y in self.vertices))

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edge(self, i: int):
        return self.vertices[i % self.n], self.vertices[(i + 1) % self.n]

    def edge_length(self, i: int) -> float:
        a, b = self.edge(i)
        return dist(a, b)


@dataclass(frozen=True)
class Portal:
    a: PortalEdgeRef
    b: PortalEdgeRef

    @property
    def half(self):
        return (self.a, self.b)


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    message: str

    def __str__(self):
        return f"{self.kind} at {self.where}: {self.message}"


@dataclass(frozen=True)
class SurfacePoint:
    fragment: int
    location: tuple
    edge_param: Optional[tuple] = None  # (edge_index, t along the CCW edge)


@dataclass(frozen=True)
class Location:
    """Result of :func:`locate`."""

    kind: str  # "interior" | "edge" | "vertex"
    point: SurfacePoint
    edge_index: Optional[int] = None
    t: Optional[float] = None
    vertex_index: Optional[int] = None
    twin: Optional[SurfacePoint] = None


@dataclass(frozen=True)
class FragmentGraph:
    nodes: tuple
    links: tuple  # (fragment_a, fragment_b, portal_index)


@dataclass
class Portalgon:
    fragments: list
    portals: list
    points: dict = field(default_factory=dict)

    def __post_init__(self):
        self.fragments = [f if isinstance(f, Fragment) else Fragment(i, f)
                          for i, f in enumerate(self.fragments)]
        self._portal_of = None

    # ---- derived lookups -------------------------------------------------
    def portal_of(self) -> dict:
        """Map ``(fragment, edge) -> (portal index, this half, twin half)``."""
        if self._portal_of is None:
            m = {}
            for k, p in enumerate(self.portals):
                m[(p.a.fragment, p.a.edge_index)] = (k, p.a, p.b)
                m[(p.b.fragment, p.b.edge_index)] = (k, p.b, p.a)
            self._portal_of = m
        return self._portal_of

    def twin(self, fragment: int, edge: int):
        return self.portal_of().get((fragment, edge))

    @property
    def n_vertices(self) -> int:
        return sum(f.n for f in self.fragments)

    @property
    def n_portal_edges(self) -> int:
        return 2 * len(self.portals)

    def half_segment(self, h: PortalEdgeRef):
        a, b = self.fragments[h.fragment].edge(h.edge_index)
        return (b, a) if h.reversed else (a, b)

    def half_point(self, h: PortalEdgeRef, t: float):
        a, b = self.half_segment(h)
        return lerp(a, b, t)

    def glue(self, h: PortalEdgeRef, other: PortalEdgeRef) -> geom.Isometry:
        """Isometry from ``h``'s fragment frame to ``other``'s, identifying the halves."""
        sa, sb = self.half_segment(h)
        da, db = self.half_segment(other)
        flip = h.reversed == other.reversed
        return geom.glue_isometry(Segment(sa, sb), Segment(da, db), flip)

    def diameter_bound(self) -> float:
        return sum(geom.diameter(f.vertices) for f in self.fragments)


def glue_across(p: Portalgon, fragment: int, edge: int):
    """``(twin fragment, twin edge, isometry into the twin frame)`` or None for boundary edges."""
    rec = p.twin(fragment, edge)
    if rec is None:
        return None
    _, h, o = rec
    return o.fragment, o.edge_index, p.glue(h, o)


def validate(p: Portalgon) -> list:
    out = []
    nf = len(p.fragments)
    for i, f in enumerate(p.fragments):
        w = f"fragment {i}"
        if f.n < 3:
            out.append(Violation("TooFewVertices", w, f"{f.n} vertices"))
            continue
        scale = max(geom.diameter(f.vertices), 1e-300)
        if geom.signed_area(f.vertices) <= 0:
            out.append(Violation("NotCounterclockwise", w, "signed area is not positive"))
        elif not geom.polygon_is_simple(f.vertices, tol=1e-12 * scale):
            out.append(Violation("NotSimple", w, "boundary self-intersects"))
    used = {}
    for k, por in enumerate(p.portals):
        w = f"portal {k}"
        ok = True
        for h in por.half:
            if not (0 <= h.fragment < nf):
                out.append(Violation("UnknownFragment", w, f"fragment {h.fragment}"))
                ok = False
            elif not (0 <= h.edge_index < p.fragments[h.fragment].n):
                out.append(Violation("EdgeIndexOutOfRange", w, f"edge {h.edge_index}"))
                ok = False
        if not ok:
            continue
        ka = (por.a.fragment, por.a.edge_index)
        kb = (por.b.fragment, por.b.edge_index)
        if ka == kb:
            out.append(Violation("SameEdge", w, "both halves name the same fragment edge"))
        for key in (ka, kb):
            if key in used and used[key] != k:
                out.append(Violation("EdgeReused", w, f"edge {key} already in portal {used[key]}"))
            used[key] = k
        la = p.fragments[ka[0]].edge_length(ka[1])
        lb = p.fragments[kb[0]].edge_length(kb[1])
        if abs(la - lb) > EPS_REL * max(la, lb):
            out.append(Violation("LengthMismatch", w, f"lengths {la!r} and {lb!r}"))
    return out


def check(p: Portalgon) -> Portalgon:
    v = validate(p)
    if v:
        raise InvalidPortalgon(v)
    return p


def fragment_graph(p: Portalgon) -> FragmentGraph:
    links = tuple((q.a.fragment, q.b.fragment, k) for k, q in enumerate(p.portals))
    return FragmentGraph(tuple(range(len(p.fragments))), links)


def _tol(f: Fragment) -> float:
    return 1e-12 * max(geom.diameter(f.vertices), 1e-300)


def locate(p: Portalgon, q: SurfacePoint, tol: Optional[float] = None) -> Location:
    if not (0 <= q.fragment < len(p.fragments)):
        raise NotOnSurface(f"no fragment {q.fragment}")
    f = p.fragments[q.fragment]
    tol = _tol(f) if tol is None else tol
    x = q.location
    for i, v in enumerate(f.vertices):
        if dist(v, x) <= tol:
            return Location("vertex", SurfacePoint(q.fragment, v), vertex_index=i)
    best = None
    for i in range(f.n):
        a, b = f.edge(i)
        d = geom.point_segment_distance(x, a, b)
        if d <= tol and (best is None or d < best[0]):
            ab = geom.sub(b, a)
            t = geom.dot(geom.sub(x, a), ab) / geom.dot(ab, ab)
            best = (d, i, min(1.0, max(0.0, t)))
    if best is not None:
        _, i, t = best
        sp = SurfacePoint(q.fragment, f.edge(i)[0] if t == 0 else lerp(*f.edge(i), t), (i, t))
        twin = None
        rec = p.twin(q.fragment, i)
        if rec is not None:
            _, h, o = rec
            dt = 1.0 - t if h.reversed else t
            ot = 1.0 - dt if o.reversed else dt
            twin = SurfacePoint(o.fragment, p.half_point(o, dt), (o.edge_index, ot))
        return Location("edge", sp, edge_index=i, t=t, twin=twin)
    if geom.point_in_polygon(x, f.vertices) == 1:
        return Location("interior", SurfacePoint(q.fragment, tuple(x)))
    raise NotOnSurface(f"{x} is not in fragment {q.fragment}")


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass(frozen=True)
class VertexClasses:
    """Surface vertices: fragment corners identified through portals."""

    cls: dict  # (fragment, vertex index) -> class id
    members: dict  # class id -> list of (fragment, vertex index)
    angle: dict  # class id -> total corner angle
    boundary: frozenset  # class ids touching a non-portal edge

    def is_cone(self, c, tol: float = 1e-9) -> bool:
        """True if geodesics cannot pass straight through this surface vertex."""
        if c in self.boundary:
            return True
        return abs(self.angle[c] - 2 * math.pi) > tol

    def needs_bend(self, c, tol: float = 1e-9) -> bool:
        """True if a shortest path may bend here (reflex boundary or cone > 2pi)."""
        if c in self.boundary:
            return self.angle[c] > math.pi + tol
        return self.angle[c] > 2 * math.pi + tol


def vertex_classes(p: Portalgon) -> VertexClasses:
    uf = _UnionFind()
    for i, f in enumerate(p.fragments):
        for j in range(f.n):
            uf.find((i, j))
    for por in p.portals:
        ends = []
        for h in por.half:
            n = p.fragments[h.fragment].n
            s, e = h.edge_index, (h.edge_index + 1) % n
            ends.append(((h.fragment, e), (h.fragment, s)) if h.reversed
                        else ((h.fragment, s), (h.fragment, e)))
        uf.union(ends[0][0], ends[1][0])
        uf.union(ends[0][1], ends[1][1])
    roots = {}
    cls = {}
    members = {}
    angle = {}
    boundary = set()
    for i, f in enumerate(p.fragments):
        for j in range(f.n):
            r = uf.find((i, j))
            c = roots.setdefault(r, len(roots))
            cls[(i, j)] = c
            members.setdefault(c, []).append((i, j))
            angle[c] = angle.get(c, 0.0) + geom.angle_at(
                f.vertices[j - 1], f.vertices[j], f.vertices[(j + 1) % f.n])
    po = p.portal_of()
    for i, f in enumerate(p.fragments):
        for j in range(f.n):
            if (i, j) not in po:
                boundary.add(cls[(i, j)])
                boundary.add(cls[(i, (j + 1) % f.n)])
    return VertexClasses(cls, members, angle, frozenset(boundary))
