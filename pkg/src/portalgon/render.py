"""Deterministic SVG pictures of portalgons with optional path and map overlays.

Fragments are placed on a grid in their own coordinates (y up). Both halves
of a portal share a color and carry an arrow in the direction the glue
identifies, so matching arrows show how the edges are attached.
"""
from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from . import geom
from .model import Portalgon

CELL = 220.0  # pixels per grid cell
PAD = 20.0


def palette(i: int) -> str:
    """Well separated deterministic colors (golden-ratio hue walk)."""
    h = (i * 0.6180339887498949) % 1.0
    r, g, b = colorsys.hls_to_rgb(h, 0.45, 0.75)
    return "#%02x%02x%02x" % (round(r * 255), round(g * 255), round(b * 255))


def _num(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


@dataclass
class Layout:
    """Maps fragment coordinates to page coordinates."""

    cols: int
    rows: int
    boxes: list  # per fragment (minx, miny, maxx, maxy)
    scale: float

    @classmethod
    def of(cls, p: Portalgon) -> "Layout":
        n = len(p.fragments)
        cols = max(1, math.ceil(math.sqrt(n)))
        rows = max(1, math.ceil(n / cols))
        boxes = []
        size = 0.0
        for f in p.fragments:
            xs = [v[0] for v in f.vertices]
            ys = [v[1] for v in f.vertices]
            boxes.append((min(xs), min(ys), max(xs), max(ys)))
            size = max(size, max(xs) - min(xs), max(ys) - min(ys))
        return cls(cols, rows, boxes, (CELL - 2 * PAD) / (size or 1.0))

    @property
    def width(self) -> float:
        return self.cols * CELL

    @property
    def height(self) -> float:
        return self.rows * CELL

    def __call__(self, fragment: int, x) -> tuple:
        minx, miny, maxx, maxy = self.boxes[fragment]
        r, c = divmod(fragment, self.cols)
        s = self.scale
        # center the fragment in its cell
        ox = c * CELL + (CELL - (maxx - minx) * s) / 2
        oy = r * CELL + (CELL - (maxy - miny) * s) / 2
        return (ox + (x[0] - minx) * s, oy + (maxy - x[1]) * s)


def _pts(L, k, xs) -> str:
    return " ".join(f"{_num(a)},{_num(b)}" for a, b in (L(k, x) for x in xs))


def _fragments(p, L):
    out = []
    for k, f in enumerate(p.fragments):
        out.append(f'<polygon class="fragment" data-fragment="{k}" points="{_pts(L, k, f.vertices)}" '
                   f'fill="#f4f4f4" stroke="#222" stroke-width="1"/>')
        cx = sum(v[0] for v in f.vertices) / f.n
        cy = sum(v[1] for v in f.vertices) / f.n
        X, Y = L(k, (cx, cy))
        out.append(f'<text class="label" x="{_num(X)}" y="{_num(Y)}" font-size="11" '
                   f'text-anchor="middle" fill="#888">F{k}</text>')
    return out


def _portals(p, L):
    out = []
    for i, por in enumerate(p.portals):
        col = palette(i)
        for h in por.half:
            a, b = p.half_segment(h)
            (x1, y1), (x2, y2) = L(h.fragment, a), L(h.fragment, b)
            out.append(f'<line class="portal" data-portal="{i}" x1="{_num(x1)}" y1="{_num(y1)}" '
                       f'x2="{_num(x2)}" y2="{_num(y2)}" stroke="{col}" stroke-width="3"/>')
            mx, my = (x1 + x2) / 2, (y1 + y2) / 2
            d = math.hypot(x2 - x1, y2 - y1) or 1.0
            ux, uy = (x2 - x1) / d, (y2 - y1) / d
            hl = min(8.0, d / 3)
            tip = (mx + ux * hl / 2, my + uy * hl / 2)
            l = (mx - ux * hl / 2 - uy * hl / 2, my - uy * hl / 2 + ux * hl / 2)
            r = (mx - ux * hl / 2 + uy * hl / 2, my - uy * hl / 2 - ux * hl / 2)
            out.append(f'<polygon class="arrow" data-portal="{i}" points="'
                       + " ".join(f"{_num(a)},{_num(b)}" for a, b in (tip, l, r))
                       + f'" fill="{col}"/>')
    return out


def _path_overlay(path_doc, L, idx=0):
    out = []
    for pc in path_doc["polyline"]:
        pts = pc["points"]
        if sum(geom.dist(a, b) for a, b in zip(pts, pts[1:])) <= 0:
            continue
        out.append(f'<polyline class="path" data-path="{idx}" data-fragment="{pc["fragment"]}" '
                   f'points="{_pts(L, pc["fragment"], pts)}" fill="none" stroke="#c00" '
                   f'stroke-width="2" stroke-dasharray="6,3"/>')
    return out


def _spm_overlay(doc, p, L):
    """Intervals and cells live in triangle frames; triangles keep their fragment's frame."""
    out = []
    origin = doc.get("origin")
    tris = doc["triangles"]
    for k, (tri, cells) in enumerate(zip(tris, doc.get("cell_polygons", [[]] * len(tris)))):
        f = origin[k] if origin else k
        for cell in cells:
            d = " ".join("M" + _pts(L, f, pc) + "Z" for pc in cell["pieces"])
            out.append(f'<path class="cell" data-triangle="{k}" d="{d}" '
                       f'fill="{palette(cell["generator"] + 7)}" fill-opacity="0.35" stroke="none"/>')
    for e in doc["edges"]:
        k = e["triangle"]
        f = origin[k] if origin else k
        o, u = e["origin"], e["direction"]
        for n, iv in enumerate(e["intervals"]):
            a = (o[0] + u[0] * iv["x0"], o[1] + u[1] * iv["x0"])
            b = (o[0] + u[0] * iv["x1"], o[1] + u[1] * iv["x1"])
            (x1, y1), (x2, y2) = L(f, a), L(f, b)
            out.append(f'<line class="interval" data-edge="{e["id"]}" x1="{_num(x1)}" y1="{_num(y1)}" '
                       f'x2="{_num(x2)}" y2="{_num(y2)}" stroke="{palette(n + 3)}" stroke-width="5" '
                       f'stroke-opacity="0.6"/>')
    return out


def render_svg(p: Portalgon, overlays=()) -> str:
    """SVG text for ``p``; each overlay is a result document (path or map).

    A document with a ``polyline`` key is drawn as a path, one with ``edges``
    as a shortest path map, and one with ``paths`` as a list of paths.
    """
    L = Layout.of(p)
    body = _fragments(p, L)
    for ov in overlays:
        if "edges" in ov:
            body += _spm_overlay(ov, p, L)
    body += _portals(p, L)
    for ov in overlays:
        if "polyline" in ov:
            body += _path_overlay(ov, L)
        for i, pd in enumerate(ov.get("paths", ())):
            body += _path_overlay(pd, L, i)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(L.width)}" '
            f'height="{_num(L.height)}" viewBox="0 0 {_num(L.width)} {_num(L.height)}">')
    title = f"<title>{escape(f'portalgon: {len(p.fragments)} fragments, {len(p.portals)} portals')}</title>"
    return "\n".join([head, title, *body, "</svg>"]) + "\n"
