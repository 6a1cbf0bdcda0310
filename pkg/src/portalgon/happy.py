"""Happiness bounds and estimates, and transforms that make a portalgon 5-happy.

A single self-glued portal pair on one fragment turns the fragment into an
annulus (or a Moebius band). Cutting the annulus along a straight arc that
joins its two boundary components gives a disk; gluing the disk back along
that arc is the "rezero" step. The arc is chosen so the new portal pair has
zero shift. It is found as a straight ray in the universal cover, whose
fundamental domains are the copies ``g^j(Z)`` of the quadrilateral ``Z``
under the glue map ``g``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

import mpmath

from . import geom
from .geom import dist, lerp, orient
from .model import (Fragment, Portal, PortalEdgeRef, Portalgon, SurfacePoint, check,
                    fragment_graph)

EPS_GEO = 1e-3  # relative inset of the middle quadrilateral
PARALLEL_TOL = 1e-14  # |sin| of the glue rotation below which the portal edges are parallel
MP_DPS = 60


class UnsupportedTopology(ValueError):
    pass


class NotQuadPortalPair(ValueError):
    pass


class NotSinglePortal(ValueError):
    pass


class NonTerminating(RuntimeError):
    pass


@dataclass(frozen=True)
class Shift:
    """Shift of a self-glued portal pair.

    ``delta`` is signed; ``bisector`` is ``(point, unit direction)``; ``alpha``
    is the absolute rotation angle of the glue map.
    """

    delta: float
    bisector: tuple
    alpha: float

    @property
    def parallel(self) -> bool:
        return self.alpha <= PARALLEL_TOL


@dataclass
class HappinessReport:
    lower: dict = field(default_factory=dict)  # fragment -> max observed components
    upper: dict = field(default_factory=dict)  # fragment -> analytic bound
    rule: dict = field(default_factory=dict)  # fragment -> rule name for ``upper``
    pairs: int = 0

    @property
    def h_lower(self) -> int:
        return max(self.lower.values(), default=0)

    @property
    def h_upper(self) -> Optional[int]:
        if not self.upper:
            return None
        return max(self.upper.values())

    def consistent(self) -> bool:
        return all(self.lower[f] <= self.upper[f] for f in self.lower if f in self.upper)


@dataclass
class Transformed:
    """A transform result: the new portalgon plus a point map from the old one."""

    portalgon: Portalgon
    map_point: Callable
    log: list = field(default_factory=list)
    edge_map: dict = field(default_factory=dict)  # surviving boundary edges: old -> new


@dataclass(frozen=True)
class Hourglass:
    """Range ``[t_lo, t_hi]`` of connecting segments ``x -> g(x)`` inside the region."""

    t_lo: float
    t_hi: float
    simple: bool = True


def _identity(p: Portalgon, log=None) -> Transformed:
    edges = {(i, j): (i, j) for i, f in enumerate(p.fragments) for j in range(f.n)}
    return Transformed(p, lambda q: q, list(log or []), edges)


# --------------------------------------------------------------------------
# self-glued portal pairs


@dataclass(frozen=True)
class _Pair:
    """Self-glued portal on one fragment; ``g`` maps ``B(t)`` to ``T(t)``.

    ``B`` is the half that runs along the counterclockwise boundary. For an
    orientation-reversing glue both halves may run that way; then ``g`` is a
    reflection and most operations here do not apply.
    """

    fragment: int
    bh: PortalEdgeRef
    th: PortalEdgeRef
    B: tuple
    T: tuple
    g: geom.Isometry

    @property
    def reversing(self) -> bool:
        return self.g.orientation_reversing

    def b(self, t):
        return lerp(self.B[0], self.B[1], t)

    def t(self, t):
        return lerp(self.T[0], self.T[1], t)


def _pair(p: Portalgon, k: int) -> _Pair:
    por = p.portals[k]
    if por.a.fragment != por.b.fragment:
        raise NotSinglePortal(f"portal {k} joins two different fragments")
    bh, th = (por.b, por.a) if por.a.reversed and not por.b.reversed else (por.a, por.b)
    return _Pair(bh.fragment, bh, th, p.half_segment(bh), p.half_segment(th), p.glue(bh, th))


def _rotation_angle(g: geom.Isometry) -> float:
    a, b, c, d = g.linear
    return math.atan2(c, a)


def _unit(v):
    n = math.hypot(v[0], v[1])
    return (v[0] / n, v[1] / n)


def compute_shift(f: Fragment, e: Portal) -> Shift:
    """Shift ``delta``, bisector and angle of a portal whose halves both lie on ``f``."""
    if e.a.fragment != e.b.fragment:
        raise NotSinglePortal("both portal halves must lie on the fragment")
    p = Portalgon([Fragment(0, f.vertices)],
                  [Portal(PortalEdgeRef(0, e.a.edge_index, e.a.reversed),
                          PortalEdgeRef(0, e.b.edge_index, e.b.reversed))])
    return _shift(_pair(p, 0))


def _shift(pr: _Pair) -> Shift:
    ub = _unit(geom.sub(pr.B[1], pr.B[0]))
    ut = _unit(geom.sub(pr.T[1], pr.T[0]))
    c = geom.sub(pr.T[0], pr.B[0])
    theta = 0.0 if pr.reversing else _rotation_angle(pr.g)
    alpha = abs(theta)
    if alpha <= PARALLEL_TOL:
        return Shift(geom.dot(c, ub), (pr.B[0], ub), 0.0)
    w = geom.add(ub, ut)
    w = _unit(w) if math.hypot(*w) > 1e-12 else (-ub[1], ub[0])
    # the supporting lines meet at the bisector's anchor
    r = geom.segment_intersection_params(pr.B[0], pr.B[1], pr.T[0], pr.T[1])
    anchor = lerp(pr.B[0], pr.B[1], r[0]) if r is not None else pr.B[0]
    return Shift(geom.dot(c, w), (anchor, w), alpha)


# --------------------------------------------------------------------------
# connecting segments x -> g(x)


def segment_in_polygon(a, b, poly, tol: float) -> bool:
    """True if the closed segment ``ab`` lies in the closed polygon."""
    n = len(poly)
    ts = {0.0, 1.0}
    ab = geom.sub(b, a)
    L2 = geom.dot(ab, ab)
    if L2 == 0:
        return geom.point_in_polygon(a, poly, tol) >= 0
    for i in range(n):
        c, d = poly[i], poly[(i + 1) % n]
        r = geom.segment_intersection_params(a, b, c, d)
        if r is not None and -1e-12 <= r[1] <= 1 + 1e-12:
            ts.add(min(1.0, max(0.0, r[0])))
        ts.add(min(1.0, max(0.0, geom.dot(geom.sub(c, a), ab) / L2)))
    ts = sorted(ts)
    probes = ts + [(u + v) / 2 for u, v in zip(ts, ts[1:])]
    return all(geom.point_in_polygon(lerp(a, b, s), poly, tol) >= 0 for s in probes)


def _breakpoints(pr: _Pair, poly) -> list:
    """Parameters ``t`` where the segment ``B(t) -> g(B(t))`` passes a polygon vertex."""
    b0, db = pr.B[0], geom.sub(pr.B[1], pr.B[0])
    D0 = geom.sub(pr.T[0], b0)
    D1 = geom.sub(geom.sub(pr.T[1], pr.T[0]), db)
    out = [0.0, 1.0]
    for v in poly:
        W0 = geom.sub(v, b0)
        c0 = geom.cross(D0, W0)
        c1 = geom.cross(D1, W0) - geom.cross(D0, db)
        c2 = -geom.cross(D1, db)
        scale = max(abs(c0), abs(c1), abs(c2), 1e-300)
        if abs(c2) <= 1e-14 * scale:
            roots = [] if abs(c1) <= 1e-14 * scale else [-c0 / c1]
        else:
            disc = c1 * c1 - 4 * c2 * c0
            if disc < 0:
                continue
            s = math.sqrt(disc)
            roots = [(-c1 - s) / (2 * c2), (-c1 + s) / (2 * c2)]
        out += [t for t in roots if 0.0 < t < 1.0]
    return sorted(set(out))


def connecting_range(pr: _Pair, poly) -> Optional[Hourglass]:
    """Widest interval of ``t`` whose connecting segments lie in ``poly``, or None."""
    scale = geom.diameter(poly)
    tol = 1e-12 * scale
    bps = _breakpoints(pr, poly)
    probes = sorted(set(bps + [(u + v) / 2 for u, v in zip(bps, bps[1:])]))

    def ok(t):
        a, b = pr.b(t), pr.t(t)
        return dist(a, b) > tol and segment_in_polygon(a, b, poly, tol)

    best, run = None, None
    for t in probes:
        if ok(t):
            run = (t, t) if run is None else (run[0], t)
            if best is None or run[1] - run[0] > best[1] - best[0]:
                best = run
        else:
            run = None
    if best is None or best[1] - best[0] <= 1e-9:
        return None
    return Hourglass(best[0], best[1])


def extremal_connecting_segments(f: Fragment, e: Portal):
    """``(s_left, s_right)`` as point pairs, or None if no connecting segment exists."""
    p = Portalgon([Fragment(0, f.vertices)],
                  [Portal(PortalEdgeRef(0, e.a.edge_index, e.a.reversed),
                          PortalEdgeRef(0, e.b.edge_index, e.b.reversed))])
    pr = _pair(p, 0)
    if pr.reversing:
        return None
    hg = connecting_range(pr, f.vertices)
    if hg is None:
        return None
    return (pr.b(hg.t_lo), pr.t(hg.t_lo)), (pr.b(hg.t_hi), pr.t(hg.t_hi))


# --------------------------------------------------------------------------
# affine maps in extended precision


def _mp(v):
    return (mpmath.mpf(v[0]), mpmath.mpf(v[1]))


class _Affine:
    """Orientation-preserving rigid motion ``x -> R x + t`` with mpmath entries.

    Equivalent to a 3x3 homogeneous matrix; only the six free entries are kept.
    """

    __slots__ = ("c", "s", "tx", "ty")

    def __init__(self, c, s, tx, ty):
        self.c, self.s, self.tx, self.ty = c, s, tx, ty

    def __matmul__(self, o: "_Affine") -> "_Affine":
        c = self.c * o.c - self.s * o.s
        s = self.s * o.c + self.c * o.s
        x, y = self(o.tx, o.ty)
        return _Affine(c, s, x, y)

    def __call__(self, x, y=None):
        if y is None:
            x, y = x
        return (self.c * x - self.s * y + self.tx, self.s * x + self.c * y + self.ty)

    def vec(self, v):
        return (self.c * v[0] - self.s * v[1], self.s * v[0] + self.c * v[1])

    def inverse(self) -> "_Affine":
        c, s = self.c, -self.s
        return _Affine(c, s, -(c * self.tx - s * self.ty), -(s * self.tx + c * self.ty))


_ONE = None


def _identity_affine():
    return _Affine(mpmath.mpf(1), mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(0))


class _Powers:
    """Integer powers of an affine map by repeated squaring (translations in closed form)."""

    def __init__(self, g: _Affine, translation: bool):
        self.g = g
        self.translation = translation
        self.sq = [g]
        self.sq_inv = [g.inverse()]
        self.multiplications = 0

    def __call__(self, j: int) -> _Affine:
        if self.translation:
            return _Affine(mpmath.mpf(1), mpmath.mpf(0), self.g.tx * j, self.g.ty * j)
        table = self.sq if j >= 0 else self.sq_inv
        j = abs(j)
        out = _identity_affine()
        i = 0
        while j:
            while len(table) <= i:
                table.append(table[-1] @ table[-1])
                self.multiplications += 1
            if j & 1:
                out = out @ table[i]
                self.multiplications += 1
            j >>= 1
            i += 1
        return out


def _affine_from_segments(B, T, translation: bool) -> _Affine:
    """The rigid motion sending ``B[0] -> T[0]`` and ``B[1] -> T[1]``."""
    b0, b1, t0, t1 = (_mp(v) for v in (B[0], B[1], T[0], T[1]))
    if translation:
        return _Affine(mpmath.mpf(1), mpmath.mpf(0), t0[0] - b0[0], t0[1] - b0[1])
    u = (b1[0] - b0[0], b1[1] - b0[1])
    v = (t1[0] - t0[0], t1[1] - t0[1])
    nu, nv = mpmath.hypot(*u), mpmath.hypot(*v)
    c = (u[0] * v[0] + u[1] * v[1]) / (nu * nv)
    s = (u[0] * v[1] - u[1] * v[0]) / (nu * nv)
    r = _Affine(c, s, mpmath.mpf(0), mpmath.mpf(0))
    x, y = r(b0)
    return _Affine(c, s, t0[0] - x, t0[1] - y)


def _line_params(p, d, a, b):
    """``(r, u)`` with ``p + r d = a + u (b - a)``, or None if parallel."""
    e = (b[0] - a[0], b[1] - a[1])
    den = d[0] * e[1] - d[1] * e[0]
    if den == 0:
        return None
    w = (a[0] - p[0], a[1] - p[1])
    r = (w[0] * e[1] - w[1] * e[0]) / den
    u = (w[0] * d[1] - w[1] * d[0]) / den
    return r, u


def _f(v):
    return (float(v[0]), float(v[1]))


# --------------------------------------------------------------------------
# the annulus of a self-glued quadrilateral


@dataclass
class RayTrace:
    """Result of tracing the zero-shift ray through the cover of ``Z``."""

    k: int  # full portal crossings
    length: float  # ray length from its start to where it leaves the cover
    fragment: Optional[tuple]  # vertices of the rezeroed fragment, None if unchanged
    evaluations: int = 0  # affine-power evaluations spent on the search
    start_left: bool = True
    u_exit: float = 0.0  # exit parameter along the opposite side


class _Annulus:
    """Quadrilateral ``Z = [B0, B1, T1, T0]`` with ``B(t)`` glued to ``T(t)``.

    The cover is ``U_j g^j(Z)``; the zero-shift ray starts at a corner ``S`` on
    ``B`` and crosses copies until it hits the opposite side chain.
    """

    def __init__(self, B, T):
        self.B, self.T = tuple(B), tuple(T)
        self.Z = [B[0], B[1], T[1], T[0]]
        if geom.signed_area(self.Z) <= 0:
            raise NotQuadPortalPair("quadrilateral is not counterclockwise")
        ub, ut = geom.sub(B[1], B[0]), geom.sub(T[1], T[0])
        self.theta = math.atan2(geom.cross(ub, ut), geom.dot(ub, ut))
        self.translation = abs(math.sin(self.theta)) <= PARALLEL_TOL
        self.scale = geom.diameter(self.Z)
        with mpmath.workdps(MP_DPS):
            self.g = _affine_from_segments(B, T, self.translation)
            self.pow = _Powers(self.g, self.translation)
        self.evaluations = 0
        self._setup()

    def _setup(self):
        B, T = self.B, self.T
        th = 0.0 if self.translation else self.theta
        self.ray = None
        for left in (True, False):
            S, gS = (B[0], T[0]) if left else (B[1], T[1])
            c = geom.sub(gS, S)
            for sgn in (1.0, -1.0):
                n = (-c[1] * sgn, c[0] * sgn)
                ca, sa = math.cos(-th / 2), math.sin(-th / 2)
                u = _unit((ca * n[0] - sa * n[1], sa * n[0] + ca * n[1]))
                if left:
                    inside = geom.cross(geom.sub(B[1], B[0]), u) > 1e-12 and geom.cross(u, c) > 1e-12 * math.hypot(*c)
                else:
                    inside = (geom.cross(c, u) > 1e-12 * math.hypot(*c)
                              and geom.cross(u, geom.sub(B[0], B[1])) > 1e-12)
                if inside:
                    self.ray = (left, S, gS, u)
                    break
            if self.ray is not None:
                break
        if self.ray is not None:
            left = self.ray[0]
            self.O = (B[1], T[1]) if left else (B[0], T[0])
            with mpmath.workdps(MP_DPS):
                # the ray direction exactly perpendicular to the mp chord keeps the shift at zero
                S, gS = _mp(self.ray[1]), self.g(_mp(self.ray[1]))
                c = (gS[0] - S[0], gS[1] - S[1])
                sgn = 1 if geom.cross(c, self.ray[3]) > 0 else -1
                n = (-c[1] * sgn, c[0] * sgn)
                if self.translation:
                    u = n
                else:
                    half = -mpmath.atan2(self.g.s, self.g.c) / 2
                    r = _Affine(mpmath.cos(half), mpmath.sin(half), 0, 0)
                    u = r.vec(n)
                nu = mpmath.hypot(*u)
                self.S, self.gS, self.u = S, gS, (u[0] / nu, u[1] / nu)

    # ---- the crossing predicate ------------------------------------------
    def _piece(self, j):
        m = self.pow(-j)
        return m(self.S), m.vec(self.u)

    def full(self, j: int) -> bool:
        """True if the ray's piece in copy ``j`` runs from ``B`` to ``T`` inside ``Z``."""
        self.evaluations += 1
        with mpmath.workdps(MP_DPS):
            p, d = self._piece(j)
            tol = mpmath.mpf(1e-13)
            if j > 0:
                rb = _line_params(p, d, _mp(self.B[0]), _mp(self.B[1]))
                if rb is None or not (-tol <= rb[1] <= 1 + tol):
                    return False
            rt = _line_params(p, d, _mp(self.T[0]), _mp(self.T[1]))
            return rt is not None and rt[0] > 0 and -tol <= rt[1] <= 1 + tol

    def search(self, max_k: Optional[int] = None) -> int:
        """Smallest ``j`` whose piece is not full: exponential search then bisection."""
        if not self.full(0):
            return 0
        if max_k is None:
            max_k = 1 << 62 if self.translation else int(math.pi / abs(self.theta)) + 4
        lo, hi = 0, 1
        while self.full(hi):
            lo = hi
            hi *= 2
            if hi > max_k:
                if self.full(max_k):
                    raise NonTerminating("the ray crosses the portal without bound")
                hi = max_k
                break
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.full(mid):
                lo = mid
            else:
                hi = mid
        return hi

    def closed_form(self) -> int:
        """Crossing count of the translation case, from where the ray meets the side line."""
        with mpmath.workdps(MP_DPS):
            O0 = _mp(self.O[0])
            c = (self.g.tx, self.g.ty)
            r = _line_params(self.S, self.u, O0, (O0[0] + c[0], O0[1] + c[1]))
            if r is None or r[0] <= 0:
                raise NonTerminating("the ray never meets the opposite side")
            return int(mpmath.floor(r[1]))

    # ---- the fundamental domain ------------------------------------------
    def trace(self, use_closed_form: bool) -> RayTrace:
        if self.ray is None:
            return RayTrace(0, 0.0, None, self.evaluations)
        k = self.closed_form() if use_closed_form and self.translation else self.search()
        with mpmath.workdps(MP_DPS):
            p, d = self._piece(k)
            O0, O1 = _mp(self.O[0]), _mp(self.O[1])
            r = _line_params(p, d, O0, O1)
            if r is None:
                raise geom.GeometryError("ray is parallel to the opposite side")
            ustar = r[1]
            if not (-1e-9 <= ustar <= 1 + 1e-9):
                raise geom.GeometryError("ray leaves through its own side")
            ustar = min(mpmath.mpf(1), max(mpmath.mpf(0), ustar))
            if ustar < 1e-12:
                ustar = mpmath.mpf(0)
            elif ustar > 1 - 1e-12:
                ustar = mpmath.mpf(1)
            Y = (O0[0] + ustar * (O1[0] - O0[0]), O0[1] + ustar * (O1[1] - O0[1]))
            gk, gk1 = self.pow(k), self.pow(k + 1)
            X, gX, V = gk(Y), gk1(Y), gk(O1)
            length = mpmath.hypot(X[0] - self.S[0], X[1] - self.S[1])
            self.k, self.Y, self.ustar = k, _f(Y), float(ustar)
            self.X, self.gX, self.V = _f(X), _f(gX), _f(V)
        return RayTrace(k, float(length), self.polygon(), self.evaluations, self.ray[0], self.ustar)

    def polygon(self):
        S, gS = _f(self.S), self.ray[2]
        pts = [S, self.X, self.V, self.gX, gS]
        if not self.ray[0]:
            pts = pts[::-1]
        tol = 1e-12 * self.scale
        out = []
        for q in pts:
            if not out or dist(out[-1], q) > tol:
                out.append(q)
        if dist(out[0], out[-1]) <= tol:
            out.pop()
        if geom.signed_area(out) <= 0:
            raise geom.GeometryError("rezeroed fragment is not counterclockwise")
        return out

    def seams(self):
        """``(kind, segment in the new fragment, matching segment of Z)`` for each glued piece."""
        S, gS = _f(self.S), self.ray[2]
        O0, O1 = self.O
        tol = 1e-12 * self.scale
        out = [("ray", (S, self.X), (gS, self.gX)), ("side_s", (S, gS), (S, gS)),
               ("side_o", (self.X, self.V), (self.Y, O1)),
               ("side_o", (self.V, self.gX), (O0, self.Y))]
        return [s for s in out if dist(*s[1]) > tol]

    # ---- point map -------------------------------------------------------
    def to_domain(self, x, poly):
        """Image of a point of ``Z`` in the rezeroed fragment ``poly``."""
        with mpmath.workdps(MP_DPS):
            S, X = self.S, _mp(self.X)
            ref = 1 if orient(_f(self.S), self.X, self.ray[2]) > 0 else -1
            xm = _mp(x)

            def img(j):
                return self.pow(j)(xm)

            def above(j):
                y = img(j)
                o = (X[0] - S[0]) * (y[1] - S[1]) - (X[1] - S[1]) * (y[0] - S[0])
                return o * ref >= 0

            lo, hi = -1, self.k + 1
            if not above(hi):
                hi = self.k + 2
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if above(mid):
                    hi = mid
                else:
                    lo = mid
            tol = 1e-9 * self.scale
            best = None
            for j in (hi, hi - 1, hi + 1, hi - 2, hi + 2):
                y = _f(img(j))
                if geom.point_in_polygon(y, poly, tol) >= 0:
                    return y
                if best is None:
                    best = y
            return best


def trace_ray_power(Z: Portalgon) -> RayTrace:
    """Trace the zero-shift ray of a self-glued quadrilateral by affine powers.

    ``Z`` must be a single quadrilateral whose opposite edges 0 and 2 (or 1
    and 3) form its only portal. The crossing count is found with an
    exponential search over powers of the glue map, so the work is
    logarithmic in the count.
    """
    ann, _ = _quad_annulus(Z)
    return ann.trace(use_closed_form=False)


def _quad_annulus(Z: Portalgon):
    if len(Z.fragments) != 1 or len(Z.portals) != 1 or Z.fragments[0].n != 4:
        raise NotQuadPortalPair("expected one quadrilateral with one portal")
    pr = _pair(Z, 0)
    if pr.reversing:
        raise NotQuadPortalPair("portal glue reverses orientation")
    if (pr.th.edge_index - pr.bh.edge_index) % 4 != 2 or not pr.th.reversed or pr.bh.reversed:
        raise NotQuadPortalPair("portal halves must be opposite edges glued in parallel")
    return _Annulus(pr.B, pr.T), pr


# --------------------------------------------------------------------------
# building portals between new fragments by matching coordinates


def _find_edge(frag, a, b, tol):
    n = len(frag)
    for i in range(n):
        u, v = frag[i], frag[(i + 1) % n]
        if dist(u, a) <= tol and dist(v, b) <= tol:
            return i, False
        if dist(u, b) <= tol and dist(v, a) <= tol:
            return i, True
    raise geom.GeometryError(f"no edge {a} -> {b}")


def _glue_points(frags, fa, sa, fb, sb, tol) -> Portal:
    """Portal identifying segment ``sa`` of fragment ``fa`` with ``sb`` of ``fb``, endpoint to endpoint."""
    ia, ra = _find_edge(frags[fa], sa[0], sa[1], tol)
    ib, rb = _find_edge(frags[fb], sb[0], sb[1], tol)
    if ra == rb:
        raise geom.GeometryError("seam would reverse orientation")
    return Portal(PortalEdgeRef(fa, ia, ra), PortalEdgeRef(fb, ib, rb))


def _seg_dist(a, b, c, d) -> float:
    if geom.segments_intersect(a, b, c, d):
        return 0.0
    return min(geom.point_segment_distance(a, c, d), geom.point_segment_distance(b, c, d),
               geom.point_segment_distance(c, a, b), geom.point_segment_distance(d, a, b))


# --------------------------------------------------------------------------
# rezero


def _rezero(Z: Portalgon) -> Transformed:
    ann, pr = _quad_annulus(Z)
    rt = ann.trace(use_closed_form=True)
    if rt.fragment is None:
        return _identity(Z, ["zero shift already: unchanged"])
    poly = rt.fragment
    tol = 1e-9 * ann.scale
    ray = next(s for s in ann.seams() if s[0] == "ray")
    q = Portalgon([poly], [_glue_points([poly], 0, ray[1], 0, ray[2], tol)])
    log = [f"rezero: ray crosses {rt.k} times, length {rt.length!r}"]
    return Transformed(q, lambda x: SurfacePoint(0, ann.to_domain(x.location, poly)), log, {})


def rezero_quad(f) -> Fragment:
    """Equivalent zero-shift fragment of a self-glued quadrilateral.

    ``f`` is a one-fragment portalgon whose quadrilateral has a portal between
    opposite edges. The parallel case uses the closed form; the non-parallel
    case traces the ray with affine powers. The returned fragment has one
    portal between its edges 0 and 3 (see :func:`rezero_transform`).
    """
    return rezero_transform(f).portalgon.fragments[0]


def rezero_transform(Z: Portalgon) -> Transformed:
    return _rezero(Z)


# --------------------------------------------------------------------------
# single self-glued portal


def _boundary_walk(n, start, stop):
    """Vertex indices ``start, start+1, ..., stop`` modulo ``n``."""
    out = [start % n]
    while out[-1] != stop % n:
        out.append((out[-1] + 1) % n)
    return out


def _inset_points(pr: _Pair, xl: float, dr: float):
    """Chord ends at arclength ``xl`` from the start and ``dr`` from the end of ``B``.

    ``B`` must lie on the x-axis from the origin. When ``T`` is horizontal to
    working precision the offsets are snapped so that the short pieces cut
    off ``B`` and ``T`` have bitwise equal lengths.
    """
    Lb = pr.B[1][0]
    T0, T1 = pr.T
    ut = _unit(geom.sub(T1, T0))
    if ut[0] == 1.0:
        xl = (T0[0] + xl) - T0[0]
        for _ in range(4):
            dr = Lb - (Lb - dr)
            dr = T1[0] - (T1[0] - dr)
    bl, br = (xl, 0.0), (Lb - dr, 0.0)
    tl = (T0[0] + xl * ut[0], T0[1] + xl * ut[1])
    tr = (T1[0] - dr * ut[0], T1[1] - dr * ut[1])
    return bl, tl, br, tr


def _happify_single(p: Portalgon) -> Transformed:
    if len(p.fragments) != 1 or len(p.portals) != 1:
        raise NotSinglePortal("expected one fragment with one self-glued portal")
    pr = _pair(p, 0)
    if pr.reversing:
        return _identity(p, ["orientation-reversing portal: unchanged"])
    bound, rule = _fragment_bound(p, 0)
    if bound is not None and bound <= 5:
        return _identity(p, [f"already {bound}-happy ({rule}): unchanged"])
    # work where B runs from the origin along the x-axis
    N = geom.frame_to(pr.B[0], pr.B[1])
    Lb = dist(*pr.B)
    iB, iT = pr.bh.edge_index, pr.th.edge_index
    n = p.fragments[0].n
    V = [N(v) for v in p.fragments[0].vertices]
    V[iB], V[(iB + 1) % n] = (0.0, 0.0), (Lb, 0.0)
    pn = Portalgon([V], p.portals)
    pr = _pair(pn, 0)
    hg = connecting_range(pr, V)
    if hg is None:
        return _identity(p, ["no connecting segment: unchanged"])
    scale = geom.diameter(V)
    tl, tr = hg.t_lo, hg.t_hi
    eps = EPS_GEO * min(_seg_dist(pr.b(tl), pr.b(tr), pr.t(tl), pr.t(tr)),
                        _seg_dist(pr.b(tl), pr.t(tl), pr.b(tr), pr.t(tr)))
    bl, tl_, br, tr_ = _inset_points(pr, tl * Lb + eps, Lb - tr * Lb + eps)
    left_idx = _boundary_walk(n, iT + 1, iB)
    right_idx = _boundary_walk(n, iB + 1, iT)
    left = [tl_] + [V[i] for i in left_idx] + [bl]
    right = [br] + [V[i] for i in right_idx] + [tr_]
    ann = _Annulus((bl, br), (tl_, tr_))
    rt = ann.trace(use_closed_form=True)
    if rt.fragment is None:
        return _identity(p, ["middle quadrilateral already has zero shift: unchanged"])
    mid = rt.fragment
    # split the opposite side where the ray leaves it
    if 0.0 < rt.u_exit < 1.0:
        if rt.start_left:
            right.append(ann.Y)
        else:
            left.append(ann.Y)
    frags = [left, mid, right]
    shortest = min(dist(f[i], f[(i + 1) % len(f)]) for f in frags for i in range(len(f)))
    tol = min(1e-9 * scale, 1e-3 * shortest)
    portals = [
        _glue_points(frags, 0, (V[iB], bl), 0, (pr.T[0], tl_), tol),
        _glue_points(frags, 2, (br, V[(iB + 1) % n]), 2, (tr_, pr.T[1]), tol),
    ]
    nb_s, nb_o = (0, 2) if rt.start_left else (2, 0)
    for kind, seg, zseg in ann.seams():
        if kind == "ray":
            portals.append(_glue_points(frags, 1, seg, 1, zseg, tol))
        else:
            portals.append(_glue_points(frags, 1, seg, nb_s if kind == "side_s" else nb_o, zseg, tol))
    q = Portalgon(frags, portals)
    edge_map = {}
    for m in range(1, len(left_idx)):
        edge_map[(0, left_idx[m - 1])] = (0, m)
    for m in range(1, len(right_idx)):
        edge_map[(0, right_idx[m - 1])] = (2, m)

    def map_point(x: SurfacePoint) -> SurfacePoint:
        y = N(x.location)
        if geom.point_in_polygon(y, left, tol) >= 0:
            return SurfacePoint(0, y)
        if geom.point_in_polygon(y, right, tol) >= 0:
            return SurfacePoint(2, y)
        return SurfacePoint(1, ann.to_domain(y, mid))

    log = [f"connecting segments t in [{hg.t_lo!r}, {hg.t_hi!r}], inset {eps!r}",
           f"middle quadrilateral rezeroed: {rt.k} crossings, {rt.evaluations} power evaluations"]
    return Transformed(q, map_point, log, edge_map)


def happify_single_portal(p: Portalgon, h_hint: Optional[int] = None) -> Portalgon:
    """Equivalent portalgon of at most three 5-happy fragments.

    ``h_hint`` is accepted for interface compatibility and ignored.
    """
    return _happify_single(p).portalgon


# --------------------------------------------------------------------------
# bounds and estimates


def _fragment_bound(p: Portalgon, i: int, segments: bool = True):
    """``(bound, rule)`` for fragment ``i``, or ``(None, None)``.

    With ``segments`` false the connecting-segment rule is skipped, which is
    needed when the fragment polygon is only weakly simple.
    """
    halves = [(k, h) for k, por in enumerate(p.portals) for h in por.half if h.fragment == i]
    if len(halves) <= 1:
        return 2, "single_portal_edge"
    if len(halves) != 2 or halves[0][0] != halves[1][0]:
        return None, None
    pr = _pair(p, halves[0][0])
    if pr.reversing:
        return None, None
    sh = _shift(pr)
    scale = geom.diameter(p.fragments[i].vertices)
    cands = []
    if abs(sh.delta) <= 1e-9 * scale:
        cands.append((2, "zero_shift"))
    if sh.alpha > PARALLEL_TOL:
        # the angle comes from atan2, so pi / alpha may land just below an integer
        cands.append((int(math.floor(math.pi / sh.alpha + 1e-9)) + 1, "angle"))
    if segments and (not cands or min(cands)[0] > 5):
        if connecting_range(pr, p.fragments[i].vertices) is None:
            cands.append((5, "no_connecting_segment"))
    return min(cands) if cands else (None, None)


def analytic_bounds(p: Portalgon) -> HappinessReport:
    """Per-fragment analytic happiness upper bounds, where a rule applies."""
    rep = HappinessReport()
    for i in range(len(p.fragments)):
        b, rule = _fragment_bound(p, i)
        if b is not None:
            rep.upper[i], rep.rule[i] = b, rule
    return rep


def estimate_happiness(p: Portalgon, samples: int = 200, seed: int = 0, extra_pairs=(),
                       budget=None) -> HappinessReport:
    """Observed crossing components over sampled shortest paths (a lower bound).

    Pairs are drawn as ``ceil(samples / 10)`` sources with ten targets each,
    plus every pair in ``extra_pairs``.
    """
    from . import corpus, unfold

    rng = random.Random(seed)
    rep = analytic_bounds(p)
    rep.lower = {i: 0 for i in range(len(p.fragments))}
    groups = []
    n_src = max(1, -(-samples // 10))
    pts = corpus.random_points(p, rng, n_src * 11)
    for j in range(n_src):
        groups.append((pts[j * 11], pts[j * 11 + 1:(j + 1) * 11]))
    groups += [(s, [t]) for s, t in extra_pairs]
    for s, targets in groups:
        for path in unfold.oracle_paths(p, s, targets, budget):
            if path is None:
                continue
            rep.pairs += 1
            for f, c in unfold.crossing_profile(path).items():
                rep.lower[f] = max(rep.lower[f], c)
    return rep


# --------------------------------------------------------------------------
# fragment-graph pipeline


def _strip_leaves(p: Portalgon):
    """``(removed fragments in order, removed portals, remaining fragments, remaining portals)``."""
    deg = {i: 0 for i in range(len(p.fragments))}
    for por in p.portals:
        deg[por.a.fragment] += 1
        deg[por.b.fragment] += 1
    alive_f = set(deg)
    alive_p = set(range(len(p.portals)))
    removed_f, removed_p = [], []
    queue = [i for i in deg if deg[i] <= 1]
    while queue:
        f = queue.pop()
        if f not in alive_f or deg[f] > 1:
            continue
        alive_f.discard(f)
        removed_f.append(f)
        for k in sorted(alive_p):
            por = p.portals[k]
            if f in (por.a.fragment, por.b.fragment):
                alive_p.discard(k)
                removed_p.append(k)
                other = por.b.fragment if por.a.fragment == f else por.a.fragment
                deg[other] -= 1
                if other in alive_f and deg[other] <= 1:
                    queue.append(other)
    return removed_f, removed_p, sorted(alive_f), sorted(alive_p)


def _cyclomatic(p: Portalgon) -> int:
    g = fragment_graph(p)
    parent = list(g.nodes)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, _ in g.links:
        parent[find(a)] = find(b)
    comps = len({find(x) for x in g.nodes})
    return len(g.links) - len(g.nodes) + comps


def _glue_cycle(p: Portalgon, nodes, cyc_portals):
    """Glue the cycle fragments along all but one portal.

    Returns ``(polygon, origin, placement, closing portal index)`` where
    ``origin[i]`` is the ``(fragment, edge)`` of output edge ``i``.
    """
    r0 = nodes[0]
    place = {r0: geom.IDENTITY}
    order = []
    used = set()
    cur = r0
    while True:
        step = None
        for k in cyc_portals:
            if k in used:
                continue
            por = p.portals[k]
            for h, o in ((por.a, por.b), (por.b, por.a)):
                if h.fragment == cur and (o.fragment not in place or (o.fragment == r0 and len(order) == len(nodes) - 1)):
                    step = (k, h, o)
                    break
            if step:
                break
        if step is None:
            raise UnsupportedTopology("remaining fragments do not form a simple cycle")
        k, h, o = step
        used.add(k)
        if o.fragment == r0 and o.fragment in place:
            closing = k
            break
        place[o.fragment] = geom.compose(place[cur], p.glue(o, h))
        order.append(k)
        cur = o.fragment
    chain = {}
    for k in order:
        por = p.portals[k]
        chain[(por.a.fragment, por.a.edge_index)] = (por.b.fragment, por.b.edge_index)
        chain[(por.b.fragment, por.b.edge_index)] = (por.a.fragment, por.a.edge_index)
    f0 = p.fragments[r0]
    e0 = next(e for e in range(f0.n) if (r0, e) not in chain)
    start = (r0, e0)
    poly, origin = [], []
    cur = start
    limit = p.n_vertices + 1
    while True:
        f, e = cur
        frag = p.fragments[f]
        poly.append(place[f](frag.vertices[e]))
        origin.append(cur)
        nxt = (f, (e + 1) % frag.n)
        while nxt in chain:
            f2, e2 = chain[nxt]
            nxt = (f2, (e2 + 1) % p.fragments[f2].n)
        cur = nxt
        if cur == start:
            break
        if len(poly) > limit:
            raise geom.GeometryError("glued boundary walk did not close")
    return poly, origin, place, closing


def _happify(p: Portalgon) -> Transformed:
    check(p)
    if _cyclomatic(p) >= 2:
        raise UnsupportedTopology("fragment graph has two or more independent cycles")
    removed_f, removed_p, nodes, cyc = _strip_leaves(p)
    if not nodes:
        return _identity(p, ["fragment graph is a forest: unchanged"])
    poly, origin, place, closing = _glue_cycle(p, nodes, cyc)
    where = {o: i for i, o in enumerate(origin)}
    cp = p.portals[closing]
    p3 = Portalgon([poly], [Portal(PortalEdgeRef(0, where[(cp.a.fragment, cp.a.edge_index)], cp.a.reversed),
                                   PortalEdgeRef(0, where[(cp.b.fragment, cp.b.edge_index)], cp.b.reversed))])
    if _pair(p3, 0).reversing:
        return _identity(p, ["orientation-reversing cycle: unchanged"])
    bound, rule = _fragment_bound(p3, 0, segments=False)
    if bound is not None and bound <= 5:
        return _identity(p, [f"glued cycle already {bound}-happy ({rule}): unchanged"])
    scale = geom.diameter(poly)
    if geom.signed_area(poly) <= 0 or not geom.polygon_is_simple(poly, 1e-12 * scale):
        raise UnsupportedTopology("the glued cycle overlaps itself; pocket cutting is not implemented")
    t4 = _happify_single(p3)
    if t4.portalgon is p3:
        return _identity(p, [f"{len(removed_f)} leaves stripped, cycle glued"] + t4.log)
    frags = [f.vertices for f in t4.portalgon.fragments]
    leaf_id = {}
    for f in removed_f:
        leaf_id[f] = len(frags)
        frags.append(p.fragments[f].vertices)

    def new_half(h: PortalEdgeRef) -> PortalEdgeRef:
        if h.fragment in leaf_id:
            return PortalEdgeRef(leaf_id[h.fragment], h.edge_index, h.reversed)
        nf, ne = t4.edge_map[(0, where[(h.fragment, h.edge_index)])]
        return PortalEdgeRef(nf, ne, h.reversed)

    portals = list(t4.portalgon.portals)
    portals += [Portal(new_half(p.portals[k].a), new_half(p.portals[k].b)) for k in removed_p]
    q = Portalgon(frags, portals)
    edge_map = {(f, e): (leaf_id[f], e) for f in removed_f for e in range(p.fragments[f].n)}
    for (f, e), i in where.items():
        if (0, i) in t4.edge_map:
            edge_map[(f, e)] = t4.edge_map[(0, i)]

    def map_point(x: SurfacePoint) -> SurfacePoint:
        if x.fragment in leaf_id:
            return SurfacePoint(leaf_id[x.fragment], x.location)
        return t4.map_point(SurfacePoint(0, place[x.fragment](x.location)))

    log = [f"{len(removed_f)} leaves stripped", f"{len(nodes)} cycle fragments glued"] + t4.log
    return Transformed(q, map_point, log, edge_map)


def happify(p: Portalgon) -> Portalgon:
    """Equivalent 5-happy portalgon for fragment graphs with at most one cycle."""
    return _happify(p).portalgon


def happify_transform(p: Portalgon) -> Transformed:
    """:func:`happify` together with the point map and change log."""
    return _happify(p)
