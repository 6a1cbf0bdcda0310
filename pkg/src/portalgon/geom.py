"""Planar primitives and plane isometries.

Points are plain ``(x, y)`` tuples of floats; isometries are stored as a
2x2 linear part plus a translation, so that orientation-reversing maps
(needed for non-orientable gluings) are first-class.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

EPS_REL = 1e-9
EPS_DET = 1e-12

Point = tuple  # (x, y)


class GeometryError(ValueError):
    pass


class LengthMismatch(GeometryError):
    pass


class Degenerate(GeometryError):
    pass


def sub(p, q):
    return (p[0] - q[0], p[1] - q[1])


def add(p, q):
    return (p[0] + q[0], p[1] + q[1])


def scale(p, s):
    return (p[0] * s, p[1] * s)


def dot(p, q):
    return p[0] * q[0] + p[1] * q[1]


def cross(p, q):
    return p[0] * q[1] - p[1] * q[0]


def norm(p):
    return math.hypot(p[0], p[1])


def dist(p, q):
    return math.hypot(p[0] - q[0], p[1] - q[1])


def lerp(p, q, t):
    return (p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t)


def orient(a, b, c):
    """Twice the signed area of triangle abc (positive when counterclockwise)."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def signed_area(poly: Sequence) -> float:
    s = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def diameter(points: Iterable) -> float:
    pts = list(points)
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return math.hypot(max(xs) - min(xs), max(ys) - min(ys))


def angle_at(prev, v, nxt) -> float:
    """Interior angle at ``v`` of a counterclockwise polygon, in (0, 2*pi)."""
    a = math.atan2(prev[1] - v[1], prev[0] - v[0])
    b = math.atan2(nxt[1] - v[1], nxt[0] - v[0])
    ang = (a - b) % (2 * math.pi)
    return ang


def corner_angle(a, b, c) -> float:
    """Unsigned angle at ``a`` between rays a->b and a->c, in [0, pi]."""
    u = sub(b, a)
    v = sub(c, a)
    return math.atan2(abs(cross(u, v)), dot(u, v))


@dataclass(frozen=True)
class Segment:
    a: tuple
    b: tuple

    def __post_init__(self):
        if self.a == self.b:
            raise Degenerate("segment endpoints coincide")

    @property
    def length(self) -> float:
        return dist(self.a, self.b)

    def at(self, t: float):
        return lerp(self.a, self.b, t)


@dataclass(frozen=True)
class EdgeInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi <= 1.0):
            raise ValueError(f"bad interval [{self.lo}, {self.hi}]")

    def __contains__(self, t) -> bool:
        return self.lo <= t <= self.hi


@dataclass(frozen=True)
class Circle:
    center: tuple
    radius: float

    def contains(self, p, strict: bool = True, tol: float = 0.0) -> bool:
        d = dist(self.center, p)
        if strict:
            return d < self.radius - tol
        return d <= self.radius + tol


@dataclass(frozen=True)
class Isometry:
    """``p -> linear @ p + translation``; ``linear`` is row-major (a, b, c, d)."""

    linear: tuple = (1.0, 0.0, 0.0, 1.0)
    translation: tuple = (0.0, 0.0)

    @property
    def orientation_reversing(self) -> bool:
        a, b, c, d = self.linear
        return a * d - b * c < 0

    @property
    def det(self) -> float:
        a, b, c, d = self.linear
        return a * d - b * c

    def __call__(self, p):
        a, b, c, d = self.linear
        return (a * p[0] + b * p[1] + self.translation[0],
                c * p[0] + d * p[1] + self.translation[1])

    def apply_vector(self, v):
        a, b, c, d = self.linear
        return (a * v[0] + b * v[1], c * v[0] + d * v[1])

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return compose(self, other)

    def inverse(self) -> "Isometry":
        a, b, c, d = self.linear
        # orthogonal: inverse is the transpose
        lin = (a, c, b, d)
        tx, ty = self.translation
        return Isometry(lin, (-(a * tx + c * ty), -(b * tx + d * ty)))

    def is_close(self, other: "Isometry", tol: float = 1e-9) -> bool:
        return (all(abs(x - y) <= tol for x, y in zip(self.linear, other.linear))
                and all(abs(x - y) <= tol for x, y in zip(self.translation, other.translation)))

    def is_orthogonal(self, tol: float = 1e-12) -> bool:
        a, b, c, d = self.linear
        return (abs(a * a + c * c - 1) <= tol and abs(b * b + d * d - 1) <= tol
                and abs(a * b + c * d) <= tol)


IDENTITY = Isometry()


def compose(g: Isometry, h: Isometry) -> Isometry:
    """The isometry applying ``h`` first, then ``g``."""
    a, b, c, d = g.linear
    e, f, k, l = h.linear
    lin = (a * e + b * k, a * f + b * l, c * e + d * k, c * f + d * l)
    t = g(h.translation)
    return Isometry(lin, t)


def rotation(theta: float, center=(0.0, 0.0)) -> Isometry:
    c, s = math.cos(theta), math.sin(theta)
    lin = (c, -s, s, c)
    cx, cy = center
    return Isometry(lin, (cx - (c * cx - s * cy), cy - (s * cx + c * cy)))


def translation(v) -> Isometry:
    return Isometry((1.0, 0.0, 0.0, 1.0), (float(v[0]), float(v[1])))


def reflection_x() -> Isometry:
    """Reflection across the x-axis."""
    return Isometry((1.0, 0.0, 0.0, -1.0), (0.0, 0.0))


def frame_to(a, b) -> Isometry:
    """Rigid motion taking ``a`` to the origin and ``b`` onto the positive x-axis."""
    ux, uy = b[0] - a[0], b[1] - a[1]
    L = math.hypot(ux, uy)
    if L == 0:
        raise Degenerate("zero-length frame")
    c, s = ux / L, uy / L
    lin = (c, s, -s, c)
    return Isometry(lin, (-(c * a[0] + s * a[1]), -(-s * a[0] + c * a[1])))


def glue_isometry(src: Segment, dst: Segment, flip: bool) -> Isometry:
    """Plane isometry sending ``src.a -> dst.a`` and ``src.b -> dst.b``.

    ``flip`` selects the orientation-reversing solution.
    """
    ls, ld = src.length, dst.length
    if abs(ls - ld) > EPS_REL * max(ls, ld):
        raise LengthMismatch(f"portal lengths differ: {ls} vs {ld}")
    to_src = frame_to(src.a, src.b)
    from_dst = frame_to(dst.a, dst.b).inverse()
    if flip:
        return compose(from_dst, compose(reflection_x(), to_src))
    return compose(from_dst, to_src)


def circumcircle(a, b, c) -> Circle:
    scale2 = max(dist(a, b), dist(b, c), dist(a, c)) ** 2
    d = 2.0 * orient(a, b, c)
    if abs(d) <= EPS_DET * max(scale2, 1e-300):
        raise Degenerate("collinear points have no circumcircle")
    bx, by = b[0] - a[0], b[1] - a[1]
    cx, cy = c[0] - a[0], c[1] - a[1]
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    center = (a[0] + ux, a[1] + uy)
    return Circle(center, math.hypot(ux, uy))


def segment_intersection_params(p, p2, q, q2, tol: float = 0.0):
    """Parameters (s, t) where p + s(p2-p) meets q + t(q2-q), or None if parallel."""
    r = sub(p2, p)
    s_ = sub(q2, q)
    den = cross(r, s_)
    if den == 0.0:
        return None
    qp = sub(q, p)
    s = cross(qp, s_) / den
    t = cross(qp, r) / den
    return s, t


def segments_intersect(p, p2, q, q2, tol: float = 0.0) -> bool:
    """Closed segment intersection test; ``tol`` is a distance slack."""
    lq = dist(q, q2) or 1.0
    lp = dist(p, p2) or 1.0
    d1 = orient(q, q2, p) / lq
    d2 = orient(q, q2, p2) / lq
    d3 = orient(p, p2, q) / lp
    d4 = orient(p, p2, q2) / lp
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and \
       ((d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)):
        return True

    def on_seg(a, b, c, d):
        return abs(d) <= tol and min(a[0], b[0]) - tol <= c[0] <= max(a[0], b[0]) + tol \
            and min(a[1], b[1]) - tol <= c[1] <= max(a[1], b[1]) + tol

    return (on_seg(q, q2, p, d1) or on_seg(q, q2, p2, d2)
            or on_seg(p, p2, q, d3) or on_seg(p, p2, q2, d4))


def segments_cross_properly(p, p2, q, q2, tol: float) -> bool:
    d1 = orient(q, q2, p)
    d2 = orient(q, q2, p2)
    d3 = orient(p, p2, q)
    d4 = orient(p, p2, q2)
    return (((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and
            ((d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)))


def point_segment_distance(p, a, b) -> float:
    ab = sub(b, a)
    L2 = dot(ab, ab)
    if L2 == 0:
        return dist(p, a)
    t = max(0.0, min(1.0, dot(sub(p, a), ab) / L2))
    return dist(p, lerp(a, b, t))


def point_in_polygon(p, poly: Sequence, tol: float = 0.0) -> int:
    """1 inside, 0 on the boundary (within ``tol``), -1 outside."""
    n = len(poly)
    for i in range(n):
        if point_segment_distance(p, poly[i], poly[(i + 1) % n]) <= tol:
            return 0
    inside = False
    x, y = p
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if xi > x:
                inside = not inside
    return 1 if inside else -1


def polygon_is_simple(poly: Sequence, tol: float = 0.0) -> bool:
    n = len(poly)
    if n < 3:
        return False
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if dist(a, b) <= tol:
            return False
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = poly[j], poly[(j + 1) % n]
            if segments_intersect(a, b, c, d, tol):
                return False
    # adjacent edges folding back onto each other
    for i in range(n):
        a, b, c = poly[i - 1], poly[i], poly[(i + 1) % n]
        if abs(orient(a, b, c)) <= tol * dist(a, c) and dot(sub(a, b), sub(c, b)) > 0:
            return False
    return True


def clip_convex(subject: Sequence, clip: Sequence) -> list:
    """Sutherland-Hodgman clipping of a polygon against a convex CCW polygon."""
    out = list(subject)
    n = len(clip)
    for i in range(n):
        a, b = clip[i], clip[(i + 1) % n]
        inp = out
        out = []
        if not inp:
            break
        m = len(inp)
        for j in range(m):
            cur, prv = inp[j], inp[j - 1]
            cin = orient(a, b, cur) >= 0
            pin = orient(a, b, prv) >= 0
            if cin:
                if not pin:
                    out.append(_line_hit(prv, cur, a, b))
                out.append(cur)
            elif pin:
                out.append(_line_hit(prv, cur, a, b))
    return out


def _line_hit(p, q, a, b):
    dp = orient(a, b, p)
    dq = orient(a, b, q)
    t = dp / (dp - dq)
    return lerp(p, q, t)


def clip_segment_halfplane(lo: float, hi: float, f0: float, f1: float, tol: float = 0.0):
    """Restrict parameter range [lo, hi] of s in [0,1] to where f0 + s*(f1-f0) >= -tol."""
    if f0 >= -tol and f1 >= -tol:
        return lo, hi
    if f0 < -tol and f1 < -tol:
        return 1.0, 0.0
    s = (-tol - f0) / (f1 - f0)
    if f0 < -tol:
        return max(lo, s), hi
    return lo, min(hi, s)
