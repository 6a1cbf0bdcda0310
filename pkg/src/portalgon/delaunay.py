"""Intrinsic Delaunay triangulations by edge flips, with empty-circumdisk certificates.

A triangulation here is a portalgon whose fragments are all triangles. An
interior edge is a portal; flipping it replaces the two incident triangles by
the other diagonal of their unfolded quadrilateral.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from . import geom
from .geom import dist, orient
from .happy import Transformed
from .model import Portal, PortalEdgeRef, Portalgon, SurfacePoint, check

COCIRCULAR_TOL = 1e-12


class BoundaryEdge(ValueError):
    pass


class NonConvexQuad(ValueError):
    pass


class FlipBudgetExceeded(RuntimeError):
    def __init__(self, result):
        self.result = result
        super().__init__(f"flip budget exhausted after {result.flips} flips")


class DepthCapExceeded(RuntimeError):
    pass


def _portalgon(t) -> Portalgon:
    p = getattr(t, "portalgon", t)
    if any(f.n != 3 for f in p.fragments):
        raise ValueError("every fragment must be a triangle")
    return p


@dataclass(frozen=True)
class FlipEdge:
    """Interior edge ``portal`` with the corner angles opposite it in both triangles."""

    portal: int
    angle_a: float
    angle_b: float

    @property
    def angle_sum(self) -> float:
        return self.angle_a + self.angle_b


def _corner(p: Portalgon, k: int, c: int) -> float:
    v = p.fragments[k].vertices
    return geom.angle_at(v[c - 1], v[c], v[(c + 1) % 3])


def flip_edge(t, e: int) -> FlipEdge:
    p = _portalgon(t)
    por = p.portals[e]
    return FlipEdge(e, _corner(p, por.a.fragment, (por.a.edge_index + 2) % 3),
                    _corner(p, por.b.fragment, (por.b.edge_index + 2) % 3))


def is_locally_delaunay(t, e: int) -> bool:
    """True if the angles opposite portal edge ``e`` sum to at most pi (co-circular counts)."""
    p = _portalgon(t)
    if not (0 <= e < len(p.portals)):
        raise BoundaryEdge(f"no interior edge {e}")
    return flip_edge(p, e).angle_sum <= math.pi + COCIRCULAR_TOL


def _flip(p: Portalgon, e: int) -> Transformed:
    por = p.portals[e]
    A, i, B, j = por.a.fragment, por.a.edge_index, por.b.fragment, por.b.edge_index
    if A == B:
        raise NonConvexQuad("edge joins a triangle to itself")
    iso = p.glue(por.b, por.a)  # B's frame into A's
    if iso.orientation_reversing:
        raise NonConvexQuad("edge glue reverses orientation")
    va, vb = p.fragments[A].vertices, p.fragments[B].vertices
    pp, q, r = va[i], va[(i + 1) % 3], va[(i + 2) % 3]
    s = iso(vb[(j + 2) % 3])
    quad = [pp, s, q, r]
    scale = geom.diameter(quad)
    for k in range(4):
        if orient(quad[k - 1], quad[k], quad[(k + 1) % 4]) <= 1e-12 * scale * scale:
            raise NonConvexQuad("unfolded quadrilateral is not strictly convex")
    t1 = [r, pp, s]  # replaces A
    t2 = [s, q, r]  # replaces B
    # old side -> new side
    side = {(A, (i + 2) % 3): (A, 0), (B, (j + 1) % 3): (A, 1),
            (B, (j + 2) % 3): (B, 0), (A, (i + 1) % 3): (B, 1)}
    portals = []
    for k, x in enumerate(p.portals):
        if k == e:
            continue
        hs = []
        for h in x.half:
            f, ei = side.get((h.fragment, h.edge_index), (h.fragment, h.edge_index))
            hs.append(PortalEdgeRef(f, ei, h.reversed))
        portals.append(Portal(*hs))
    portals.append(Portal(PortalEdgeRef(A, 2, False), PortalEdgeRef(B, 2, True)))
    frags = [f.vertices for f in p.fragments]
    frags[A], frags[B] = t1, t2
    q_ = Portalgon(frags, portals, dict(p.points))
    tol = 1e-12 * scale

    def map_point(x: SurfacePoint) -> SurfacePoint:
        if x.fragment not in (A, B):
            return x
        y = x.location if x.fragment == A else iso(x.location)
        if geom.point_in_polygon(y, t1, tol) >= 0:
            return SurfacePoint(A, y)
        return SurfacePoint(B, y)

    return Transformed(q_, map_point, [f"flip portal {e}"])


def flip(t, e: int) -> Portalgon:
    """Replace interior edge ``e`` by the other diagonal of its unfolded quadrilateral.

    The new diagonal becomes the last portal; the triangles keep their indices.
    """
    return flip_transform(t, e).portalgon


def flip_transform(t, e: int) -> Transformed:
    """Like :func:`flip`, also returning the point map into the new triangles."""
    p = _portalgon(t)
    if not (0 <= e < len(p.portals)):
        raise BoundaryEdge(f"no interior edge {e}")
    return _flip(p, e)


@dataclass
class DelaunayResult:
    portalgon: Portalgon
    flips: int
    complete: bool
    map_point: object = None

    @property
    def triangles(self):
        return self.portalgon.fragments


def intrinsic_delaunay(t, max_flips: Optional[int] = None, strict: bool = False) -> DelaunayResult:
    """Flip the worst non-Delaunay edge until none is left or the budget runs out.

    The default budget is ``50 n^2`` for ``n`` triangles. With ``strict`` an
    exhausted budget raises :class:`FlipBudgetExceeded` carrying the partial
    result; otherwise the result is returned with ``complete`` false.
    """
    p = _portalgon(t)
    check(p)
    n = len(p.fragments)
    if max_flips is None:
        max_flips = 50 * n * n
    maps = []
    flips = 0
    while True:
        worst = None
        for e in range(len(p.portals)):
            por = p.portals[e]
            if por.a.fragment == por.b.fragment or por.a.reversed == por.b.reversed:
                continue  # self-glued or orientation-reversing edges are never flipped
            s = flip_edge(p, e).angle_sum
            if s > math.pi + COCIRCULAR_TOL and (worst is None or s > worst[0]):
                worst = (s, e)
        if worst is None:
            complete = True
            break
        if flips >= max_flips:
            complete = False
            break
        tr = _flip(p, worst[1])
        maps.append(tr.map_point)
        p = tr.portalgon
        flips += 1

    def map_point(x):
        for m in maps:
            x = m(x)
        return x

    res = DelaunayResult(p, flips, complete, map_point)
    if strict and not complete:
        raise FlipBudgetExceeded(res)
    return res


# --------------------------------------------------------------------------
# empty circumdisk certificates


@dataclass
class CoverCopy:
    triangle: int
    vertices: tuple  # in the root triangle's frame
    parent: Optional[int]
    entry: Optional[int]  # side of ``triangle`` through which it was reached


@dataclass
class DiskCertificate:
    triangle: int
    disk: geom.Circle
    copies: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)  # (copy index, corner, point)
    injective: bool = True

    @property
    def empty(self) -> bool:
        return not self.witnesses


def _segment_meets_open_disk(a, b, c: geom.Circle, tol: float) -> bool:
    return geom.point_segment_distance(c.center, a, b) < c.radius - tol


def verify_empty_disk(t, tri: int, depth_cap: int = 10_000) -> DiskCertificate:
    """Explore the unfolded copies meeting the circumdisk of ``tri`` and collect vertices inside.

    Copies are expanded breadth first through sides that meet the open disk,
    never straight back through the side they came from, so the copies form a
    tree. A vertex strictly inside the disk is a witness that ``tri`` is not
    Delaunay.
    """
    p = _portalgon(t)
    v = p.fragments[tri].vertices
    disk = geom.circumcircle(*v)
    tol = 1e-9 * disk.radius
    cert = DiskCertificate(tri, disk)
    cert.copies.append(CoverCopy(tri, tuple(v), None, None))
    isos = [geom.IDENTITY]
    queue = deque([0])
    while queue:
        ci = queue.popleft()
        cp = cert.copies[ci]
        for j in range(3):
            if j == cp.entry:
                continue
            a, b = cp.vertices[j], cp.vertices[(j + 1) % 3]
            if not _segment_meets_open_disk(a, b, disk, tol):
                continue
            rec = p.twin(cp.triangle, j)
            if rec is None:
                continue
            _, h, o = rec
            iso = geom.compose(isos[ci], p.glue(o, h))
            w = tuple(iso(x) for x in p.fragments[o.fragment].vertices)
            if len(cert.copies) >= depth_cap:
                raise DepthCapExceeded(f"more than {depth_cap} copies explored")
            cert.copies.append(CoverCopy(o.fragment, w, ci, o.edge_index))
            isos.append(iso)
            queue.append(len(cert.copies) - 1)
    for ci, cp in enumerate(cert.copies):
        for c, x in enumerate(cp.vertices):
            if dist(x, disk.center) < disk.radius - tol:
                cert.witnesses.append((ci, c, x))
    area = math.pi * disk.radius ** 2
    for i1 in range(len(cert.copies)):
        for i2 in range(i1 + 1, len(cert.copies)):
            ov = geom.clip_convex(list(cert.copies[i1].vertices), list(cert.copies[i2].vertices))
            if len(ov) >= 3 and geom.signed_area(ov) > 1e-9 * area:
                cert.injective = False
                return cert
    return cert
