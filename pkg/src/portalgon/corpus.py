"""Named desk-scale portalgons used by tests, scripts and the CLI."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .model import Portal, PortalEdgeRef, Portalgon, SurfacePoint


def _P(fa, ea, ra, fb, eb, rb):
    return Portal(PortalEdgeRef(fa, ea, ra), PortalEdgeRef(fb, eb, rb))


def square(side: float = 1.0) -> Portalgon:
    return Portalgon([[(0, 0), (side, 0), (side, side), (0, side)]], [])


def torus(w: float = 1.0, h: float = 1.0) -> Portalgon:
    """Flat torus: opposite sides of a rectangle glued by translations."""
    return Portalgon([[(0, 0), (w, 0), (w, h), (0, h)]],
                     [_P(0, 0, False, 0, 2, True), _P(0, 1, False, 0, 3, True)])


def cylinder(w: float = 3.0, h: float = 1.0) -> Portalgon:
    """Left and right sides of a rectangle glued by a translation."""
    return Portalgon([[(0, 0), (w, 0), (w, h), (0, h)]], [_P(0, 1, False, 0, 3, True)])


def mobius(w: float = 3.0, h: float = 1.0) -> Portalgon:
    """Left and right sides of a rectangle glued with a flip."""
    return Portalgon([[(0, 0), (w, 0), (w, h), (0, h)]], [_P(0, 1, False, 0, 3, False)])


def pyramid(base: float = 1.0, height: float = 1.0, sides: int = 4) -> Portalgon:
    """Bottomless pyramid: isosceles triangles glued side to side around the apex."""
    tri = [(0.0, 0.0), (base, 0.0), (base / 2, height)]
    frags = [tri] * sides
    portals = [_P(i, 1, False, (i + 1) % sides, 2, True) for i in range(sides)]
    return Portalgon(frags, portals)


def lshape() -> Portalgon:
    """Single L-shaped fragment; its reflex corner forces bends."""
    return Portalgon([[(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]], [])


def frame(outer: float = 3.0, inner: float = 1.0) -> Portalgon:
    """Square annulus from four trapezoids; the inner corners are reflex."""
    a, b = (outer - inner) / 2, (outer + inner) / 2
    o = [(0, 0), (outer, 0), (outer, outer), (0, outer)]
    i = [(a, a), (b, a), (b, b), (a, b)]
    frags = [[o[k], o[(k + 1) % 4], i[(k + 1) % 4], i[k]] for k in range(4)]
    portals = [_P(k, 1, False, (k + 1) % 4, 3, True) for k in range(4)]
    return Portalgon(frags, portals)


def equilateral() -> Portalgon:
    """A single 60-degree triangle."""
    return Portalgon([[(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)]], [])


def two_cycle() -> Portalgon:
    """Two squares glued along two pairs of edges: the fragment graph has two cycles."""
    sq = [(0, 0), (1, 0), (1, 1), (0, 1)]
    return Portalgon([sq, sq], [_P(0, 1, False, 1, 3, True), _P(0, 3, False, 1, 1, True),
                               _P(0, 0, False, 1, 2, True)])


@dataclass(frozen=True)
class Spiral:
    """Thin parallelogram glued to itself by a translation, with a witness pair.

    The bottom edge is glued to the top edge shifted by ``(delta, eps)``. The
    shortest path from ``s`` to ``t`` goes straight up through the portal
    ``h`` times.
    """

    portalgon: Portalgon
    s: SurfacePoint
    t: SurfacePoint
    h: int
    delta: float
    eps: float
    length: float

    def closed_form(self, a, b) -> float:
        """Distance between two points of the single fragment: the cover is a convex strip."""
        dx, dy = b[0] - a[0], b[1] - a[1]
        c = (self.delta, self.eps)
        # only shifts j with |dy + j eps| <= |dx + j delta| + ... matter; scan around the best real j
        jr = -(dx * c[0] + dy * c[1]) / (c[0] ** 2 + c[1] ** 2)
        span = int(abs(self.length) / max(self.eps, 1e-300)) + 2
        lo, hi = math.floor(jr) - 2, math.ceil(jr) + 2
        lo, hi = max(lo, -span), min(hi, span)
        return min(math.hypot(dx + j * c[0], dy + j * c[1]) for j in range(lo, hi + 1))


def spiral(h: int, tilt: float = 0.0, length: float = 1.0) -> Spiral:
    """Spiral instance whose witness path crosses the portal ``h`` times.

    With ``tilt`` the top edge is rotated slightly about its midpoint and the
    right side lengthened, so the two portal halves are not parallel. The
    closed form is only meaningful for ``tilt == 0``.
    """
    delta = length / (h + 2)
    eps = delta / (4 * math.sqrt(h))
    L = length
    if tilt == 0.0:
        verts = [(0.0, 0.0), (L, 0.0), (L + delta, eps), (delta, eps)]
    else:
        # top edge keeps length L but leans: rotate it about its left end by ``tilt``
        ca, sa = math.cos(tilt), math.sin(tilt)
        tl = (delta, eps)
        tr = (delta + L * ca, eps + L * sa)
        verts = [(0.0, 0.0), (L, 0.0), tr, tl]
    p = Portalgon([verts], [_P(0, 0, False, 0, 2, True)])
    y = eps / 2
    xs = (h + 1) * delta
    s = SurfacePoint(0, (xs, y))
    t = SurfacePoint(0, (xs - h * delta, y))
    return Spiral(p, s, t, h, delta, eps, L)


def lowerbound(m: int, h: int, length: float = 1.0) -> Spiral:
    """The spiral cut into ``m`` stacked strips.

    The ``m - 1`` cuts (the inner portals) are parallel to the long sides, so
    the witness path crosses each of them ``h + 1`` times while the outer
    portal is crossed ``h`` times.
    """
    base = spiral(h, length=length)
    d, e, L = base.delta, base.eps, length
    frags = []
    for j in range(m):
        y0, y1 = e * j / m, e * (j + 1) / m
        x0, x1 = d * j / m, d * (j + 1) / m
        frags.append([(x0, y0), (x0 + L, y0), (x1 + L, y1), (x1, y1)])
    portals = [_P(0, 0, False, m - 1, 2, True)]
    portals += [_P(j + 1, 0, False, j, 2, True) for j in range(m - 1)]
    p = Portalgon(frags, portals)
    y = e / (2 * m)  # inside the bottom strip
    xs = (h + 1) * d
    s = SurfacePoint(0, (xs, y))
    t = SurfacePoint(0, (xs - h * d, y))
    return Spiral(p, s, t, h, d, e, L)


def random_polygon(rng: random.Random, n: int) -> list:
    """A random star-shaped simple polygon around the origin (counterclockwise)."""
    angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(n))
    return [(math.cos(a) * r, math.sin(a) * r)
            for a, r in ((a, rng.uniform(0.4, 1.0)) for a in angles)]


def random_split(seed: int, n: int = 8) -> Portalgon:
    """A random polygon fan-split into triangle fragments glued back together."""
    rng = random.Random(seed)
    while True:
        poly = random_polygon(rng, n)
        if all(_ccw(poly[i], poly[(i + 1) % n]) for i in range(n)):
            break
    c = (0.0, 0.0)
    frags = [[c, poly[i], poly[(i + 1) % n]] for i in range(n)]
    # triangle i: edge 2 is (poly[i+1] -> c), triangle i+1: edge 0 is (c -> poly[i+1])
    portals = [_P(i, 2, False, (i + 1) % n, 0, True) for i in range(n)]
    return Portalgon(frags, portals)


def _ccw(a, b):
    return a[0] * b[1] - a[1] * b[0] > 1e-3


def random_torus(seed: int) -> Portalgon:
    """A random parallelogram with translation gluings on both side pairs."""
    rng = random.Random(seed)
    u = (rng.uniform(0.8, 1.5), rng.uniform(-0.3, 0.3))
    v = (rng.uniform(-0.4, 0.4), rng.uniform(0.8, 1.4))
    verts = [(0, 0), u, (u[0] + v[0], u[1] + v[1]), v]
    return Portalgon([verts], [_P(0, 0, False, 0, 2, True), _P(0, 1, False, 0, 3, True)])


def named() -> dict:
    """The oracle-comparison corpus: name -> portalgon."""
    return {
        "square": square(),
        "torus": torus(),
        "cylinder": cylinder(),
        "mobius": mobius(),
        "pyramid": pyramid(),
        "lshape": lshape(),
        "frame": frame(),
        "equilateral": equilateral(),
        "spiral7": spiral(7).portalgon,
        "lowerbound3x4": lowerbound(3, 4).portalgon,
        "random_split": random_split(3),
        "random_torus": random_torus(5),
    }


def random_points(p: Portalgon, rng: random.Random, count: int) -> list:
    """Uniform-ish interior points: area-weighted fragment choice, rejection sampling."""
    from . import geom

    areas = [geom.signed_area(f.vertices) for f in p.fragments]
    out = []
    while len(out) < count:
        i = rng.choices(range(len(areas)), weights=areas)[0]
        V = p.fragments[i].vertices
        xs, ys = [v[0] for v in V], [v[1] for v in V]
        q = (rng.uniform(min(xs), max(xs)), rng.uniform(min(ys), max(ys)))
        if geom.point_in_polygon(q, V) == 1:
            out.append(SurfacePoint(i, q))
    return out
