"""Edge subdivision and triangulation of portalgons."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import geom
from .geom import orient
from .model import (InvalidPortalgon, Portal, PortalEdgeRef, Portalgon, SurfacePoint,
                    locate, validate)


def subdivide_edges(p: Portalgon, cuts: dict):
    """Insert vertices on fragment edges.

    ``cuts`` maps ``(fragment, edge) -> iterable of CCW parameters in (0, 1)``.
    Cuts on a portal edge must be mirrored on its twin. Returns the new portalgon
    and ``edge_map: (fragment, old edge) -> list of new edge indices`` (CCW order).
    """
    frags = []
    edge_map = {}
    for i, f in enumerate(p.fragments):
        verts = []
        for j in range(f.n):
            a, b = f.edge(j)
            ts = sorted(set(float(t) for t in cuts.get((i, j), ()) if 0.0 < t < 1.0))
            first = len(verts)
            verts.append(a)
            for t in ts:
                verts.append(geom.lerp(a, b, t))
            edge_map[(i, j)] = list(range(first, len(verts)))
        frags.append(verts)
    portals = []
    for por in p.portals:
        pieces = []
        for h in por.half:
            es = edge_map[(h.fragment, h.edge_index)]
            if h.reversed:
                es = es[::-1]
            pieces.append([PortalEdgeRef(h.fragment, e, h.reversed) for e in es])
        if len(pieces[0]) != len(pieces[1]):
            raise ValueError("portal halves cut into different numbers of pieces")
        portals.extend(Portal(x, y) for x, y in zip(*pieces))
    return Portalgon(frags, portals, dict(p.points)), edge_map


def mirrored_cut(p: Portalgon, fragment: int, edge: int, t: float):
    """The twin ``((fragment, edge), t)`` of a CCW parameter on a portal edge, or None."""
    rec = p.twin(fragment, edge)
    if rec is None:
        return None
    _, h, o = rec
    dt = 1.0 - t if h.reversed else t
    return (o.fragment, o.edge_index), (1.0 - dt if o.reversed else dt)


def _in_closed_triangle(q, a, b, c, tol):
    return orient(a, b, q) >= -tol and orient(b, c, q) >= -tol and orient(c, a, q) >= -tol


def ear_clip(poly):
    """Triangulate a simple CCW polygon; returns index triples."""
    n = len(poly)
    idx = list(range(n))
    scale = geom.diameter(poly) ** 2
    tol = 1e-14 * scale
    tris = []
    while len(idx) > 3:
        m = len(idx)
        found = False
        # prefer the ear with the largest minimum angle for better-shaped triangles
        best = None
        for k in range(m):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % m]
            a, b, c = poly[i0], poly[i1], poly[i2]
            if orient(a, b, c) <= tol:
                continue
            ok = True
            for j in idx:
                if j in (i0, i1, i2):
                    continue
                q = poly[j]
                if _in_closed_triangle(q, a, b, c, tol) and q not in (a, b, c):
                    ok = False
                    break
            if ok:
                qual = min(geom.corner_angle(a, b, c), geom.corner_angle(b, c, a),
                           geom.corner_angle(c, a, b))
                if best is None or qual > best[0]:
                    best = (qual, k)
        if best is not None:
            k = best[1]
            tris.append((idx[k - 1], idx[k], idx[(k + 1) % m]))
            del idx[k]
            found = True
        if not found:
            raise ValueError("ear clipping failed (polygon not simple?)")
    tris.append(tuple(idx))
    return tris


@dataclass
class Triangulation:
    """A portalgon whose fragments are all triangles.

    ``origin[k]`` is the source fragment of triangle ``k``; triangles keep the
    coordinates of their source fragment. ``diagonals`` maps each new portal
    index to the source fragment it was cut from.
    """

    portalgon: Portalgon
    origin: list
    source: Optional[Portalgon] = None
    diagonals: dict = field(default_factory=dict)
    base: Optional[Portalgon] = None  # source after edge subdivision
    edge_label: dict = field(default_factory=dict)  # (tri, side) -> ("e", frag, edge) | ("d", id)
    corner_source: dict = field(default_factory=dict)  # (tri, corner) -> (frag, vertex) in base

    @property
    def triangles(self):
        return self.portalgon.fragments

    def map_point(self, q: SurfacePoint) -> SurfacePoint:
        """Express a point of the source portalgon in triangle coordinates."""
        tol = 1e-12 * max(geom.diameter(self.portalgon.fragments[0].vertices), 1e-300)
        best = None
        for k, o in enumerate(self.origin):
            if o != q.fragment:
                continue
            a, b, c = self.portalgon.fragments[k].vertices
            m = min(orient(a, b, q.location) / max(geom.dist(a, b), 1e-300),
                    orient(b, c, q.location) / max(geom.dist(b, c), 1e-300),
                    orient(c, a, q.location) / max(geom.dist(c, a), 1e-300))
            if best is None or m > best[0]:
                best = (m, k)
        if best is None or best[0] < -tol * 10:
            from .model import NotOnSurface
            raise NotOnSurface(f"{q} not covered by the triangulation")
        return SurfacePoint(best[1], tuple(q.location))


def triangulate(p: Portalgon, extra_vertices=(), separate: bool = True) -> Triangulation:
    v = validate(p)
    if v:
        raise InvalidPortalgon(v)
    # 1. extra vertices on edges become edge cuts; interior ones are kept for later
    cuts = {}
    interior = []
    for q in extra_vertices:
        loc = locate(p, q)
        if loc.kind == "edge":
            cuts.setdefault((q.fragment, loc.edge_index), set()).add(loc.t)
            tw = mirrored_cut(p, q.fragment, loc.edge_index, loc.t)
            if tw is not None:
                cuts.setdefault(tw[0], set()).add(tw[1])
        elif loc.kind == "interior":
            interior.append((q.fragment, tuple(q.location)))
    if cuts:
        p2, _ = subdivide_edges(p, cuts)
    else:
        p2 = p
    # 2. ear clip; labels: ("e", fragment, edge) for fragment edges, ("d", id) for diagonals
    tris = []  # [verts(3), labels(3), origin]
    counter = [0]

    def new_diag():
        counter[0] += 1
        return ("d", counter[0])

    for i, f in enumerate(p2.fragments):
        n = f.n
        if n == 3:
            tris.append([list(f.vertices), [("e", i, 0), ("e", i, 1), ("e", i, 2)], i])
            continue
        chain = {}  # (u, w) index pair -> label, for directed boundary of remaining polygon
        for j in range(n):
            chain[(j, (j + 1) % n)] = ("e", i, j)
        for (a, b, c) in ear_clip(list(f.vertices)):
            lab_ab = chain.pop((a, b))
            lab_bc = chain.pop((b, c))
            if (c, a) in chain:  # final triangle
                lab_ca = chain.pop((c, a))
            else:
                lab_ca = new_diag()
                chain[(a, c)] = lab_ca
            tris.append([[f.vertices[a], f.vertices[b], f.vertices[c]],
                         [lab_ab, lab_bc, lab_ca], i])
    # 3. interior extra vertices split their containing triangle(s)
    for fi, x in interior:
        _insert_point(tris, fi, x, new_diag)
    # 4. no two triangles may share more than one edge
    if separate:
        _separate(tris, p2, new_diag)
    return _assemble(tris, p2, p)


def _insert_point(tris, fi, x, new_diag):
    cand = [k for k, t in enumerate(tris) if t[2] == fi]
    scale = max(geom.diameter(tris[k][0]) for k in cand)
    tol = 1e-12 * scale * scale
    for k in cand:
        vs, labs, o = tris[k]
        if any(geom.dist(x, v) <= 1e-12 * scale for v in vs):
            return
        s = [orient(vs[j], vs[(j + 1) % 3], x) for j in range(3)]
        if min(s) < -tol:
            continue
        on = [j for j in range(3) if abs(s[j]) <= tol]
        if not on:
            d = [new_diag() for _ in range(3)]
            del tris[k]
            for j in range(3):
                tris.append([[vs[j], vs[(j + 1) % 3], x], [labs[j], d[(j + 1) % 3], d[j]], o])
            return
        j = on[0]
        lab = labs[j]
        if lab[0] != "d":
            raise ValueError("interior point on a fragment edge")
        # split both triangles adjacent to diagonal ``lab``
        d_new = {}
        out = []
        for kk, t in enumerate(tris):
            if lab in t[1]:
                vs2, labs2, o2 = t
                jj = labs2.index(lab)
                a, b, c = vs2[jj], vs2[(jj + 1) % 3], vs2[(jj + 2) % 3]
                mid = new_diag()
                # halves of the split diagonal: keyed by the undirected endpoint pair
                ka = (min(a, x), max(a, x))
                kb = (min(b, x), max(b, x))
                la = d_new.setdefault(ka, new_diag())
                lb = d_new.setdefault(kb, new_diag())
                out.append([[a, x, c], [la, mid, labs2[(jj + 2) % 3]], o2])
                out.append([[x, b, c], [lb, labs2[(jj + 1) % 3], mid], o2])
            else:
                out.append(t)
        tris[:] = out
        return
    raise ValueError(f"extra vertex {x} not found in fragment {fi}")


def _partners(tris, p2):
    """Map (triangle, side) -> (triangle, side) across glued edges."""
    where = {}
    for k, t in enumerate(tris):
        for j, lab in enumerate(t[1]):
            where.setdefault(lab, []).append((k, j))
    part = {}
    for lab, occ in where.items():
        if lab[0] == "d":
            (k1, j1), (k2, j2) = occ
            part[(k1, j1)] = (k2, j2)
            part[(k2, j2)] = (k1, j1)
        else:
            rec = p2.twin(lab[1], lab[2])
            if rec is not None:
                o = rec[2]
                tw = where[("e", o.fragment, o.edge_index)][0]
                part[occ[0]] = tw
    return part


def _separate(tris, p2, new_diag):
    for _ in range(10 * len(tris) + 100):
        part = _partners(tris, p2)
        bad = None
        counts = {}
        for (k, j), (k2, _) in part.items():
            key = (min(k, k2), max(k, k2))
            counts[key] = counts.get(key, 0) + 1
        for (k, k2), c in sorted(counts.items()):
            # each shared edge is counted from both sides
            if (k == k2 and c >= 2) or (k != k2 and c >= 4):
                bad = k
                break
        if bad is None:
            return
        vs, labs, o = tris[bad]
        g = ((vs[0][0] + vs[1][0] + vs[2][0]) / 3.0, (vs[0][1] + vs[1][1] + vs[2][1]) / 3.0)
        d = [new_diag() for _ in range(3)]
        del tris[bad]
        for j in range(3):
            tris.append([[vs[j], vs[(j + 1) % 3], g], [labs[j], d[(j + 1) % 3], d[j]], o])
    raise RuntimeError("could not separate triangles")


def _assemble(tris, p2, source):
    frags = [t[0] for t in tris]
    origin = [t[2] for t in tris]
    where = {}
    for k, t in enumerate(tris):
        for j, lab in enumerate(t[1]):
            where.setdefault(lab, []).append((k, j))
    portals = []
    diagonals = {}
    for por in p2.portals:
        ra = where[("e", por.a.fragment, por.a.edge_index)][0]
        rb = where[("e", por.b.fragment, por.b.edge_index)][0]
        portals.append(Portal(PortalEdgeRef(ra[0], ra[1], por.a.reversed),
                              PortalEdgeRef(rb[0], rb[1], por.b.reversed)))
    for lab, occ in sorted(where.items(), key=lambda kv: str(kv[0])):
        if lab[0] == "d":
            (k1, j1), (k2, j2) = occ
            diagonals[len(portals)] = tris[k1][2]
            portals.append(Portal(PortalEdgeRef(k1, j1, False), PortalEdgeRef(k2, j2, True)))
    tp = Portalgon(frags, portals, dict(source.points))
    edge_label = {kj: lab for lab, occ in where.items() for kj in occ}
    corner_source = {}
    for k, t in enumerate(tris):
        fv = p2.fragments[t[2]].vertices
        for c, v in enumerate(t[0]):
            if v in fv:
                corner_source[(k, c)] = (t[2], fv.index(v))
    return Triangulation(tp, origin, source, diagonals, p2, edge_label, corner_source)


def shared_edge_counts(p: Portalgon) -> dict:
    """Number of portals joining each unordered fragment pair."""
    out = {}
    for por in p.portals:
        key = tuple(sorted((por.a.fragment, por.b.fragment)))
        out[key] = out.get(key, 0) + 1
    return out


class TriMesh:
    """Adjacency view of a triangulation used by the path searches.

    ``nbr[k][j]`` is ``(k2, j2, iso)`` where ``iso`` maps triangle ``k``'s frame
    into ``k2``'s frame across side ``j`` (side ``j`` joins corners ``j`` and
    ``j + 1``), or None on the surface boundary.
    """

    def __init__(self, tri: Triangulation):
        from .model import vertex_classes

        self.tri = tri
        tp = tri.portalgon
        self.verts = [f.vertices for f in tp.fragments]
        self.n = len(self.verts)
        self.nbr = [[None, None, None] for _ in range(self.n)]
        for por in tp.portals:
            for h, o in ((por.a, por.b), (por.b, por.a)):
                self.nbr[h.fragment][h.edge_index] = (o.fragment, o.edge_index, tp.glue(h, o))
        self.classes = vertex_classes(tp)
        self.corner_class = [[self.classes.cls[(k, c)] for c in range(3)] for k in range(self.n)]
        # original portal half crossed when leaving triangle k through side j
        self.orig_half = [[None, None, None] for _ in range(self.n)]
        base = tri.base if tri.base is not None else tri.source
        if base is not None:
            for (k, j), lab in tri.edge_label.items():
                if lab[0] == "e":
                    rec = base.twin(lab[1], lab[2])
                    if rec is not None:
                        self.orig_half[k][j] = rec[1]
        self.scale = max(max(geom.diameter(v) for v in self.verts), 1e-300)

    def corner_point(self, k, c):
        return self.verts[k][c]

    def triangles_at(self, q: SurfacePoint):
        """All ``(triangle, local point)`` pairs covering a source-portalgon point."""
        tp = self.tri.portalgon
        base = self.tri.source
        out = []
        if base is not None:
            loc = locate(base, q)
            pts = [loc.point]
            if loc.kind == "edge" and loc.twin is not None:
                pts.append(loc.twin)
        else:
            pts = [q]
        tol = 1e-12 * self.scale
        seen = set()
        for sp in pts:
            for k in range(self.n):
                if self.tri.origin[k] != sp.fragment:
                    continue
                a, b, c = self.verts[k]
                x = sp.location
                if (orient(a, b, x) >= -tol * geom.dist(a, b) and orient(b, c, x) >= -tol * geom.dist(b, c)
                        and orient(c, a, x) >= -tol * geom.dist(c, a)):
                    if k not in seen:
                        seen.add(k)
                        out.append((k, tuple(x)))
        # a point at a surface vertex lies in every triangle around that vertex
        extra = []
        for k, x in out:
            for c in range(3):
                if geom.dist(self.verts[k][c], x) <= tol:
                    cls = self.corner_class[k][c]
                    for (k2, c2) in self.classes.members[cls]:
                        if k2 not in seen:
                            seen.add(k2)
                            extra.append((k2, self.verts[k2][c2]))
        return out + extra
