"""JSON documents for portalgons and computed results.

Portalgon document::

    {"format_version": 1,
     "fragments": [{"id": 0, "vertices": [[x, y], ...]}, ...],
     "portals": [{"a": {"fragment": 0, "edge": 0, "reversed": false},
                  "b": {"fragment": 0, "edge": 2, "reversed": true}}, ...],
     "points": {"s": {"fragment": 0, "location": [x, y]}}}

``points`` is optional. Floats are written with ``repr`` so they round-trip.
"""
from __future__ import annotations

import json

from .model import (InvalidPortalgon, Portal, PortalEdgeRef, Portalgon, SurfacePoint,
                    validate)
from .unfold import CrossingElement, GeodesicPath, Signature, VertexElement

FORMAT_VERSION = 1


class DocumentSyntaxError(SyntaxError):
    """Malformed JSON text; ``lineno`` and ``offset`` locate the problem."""


class SchemaError(ValueError):
    pass


class ValidationError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


def _load(text):
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DocumentSyntaxError(f"not UTF-8: {e}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        err = DocumentSyntaxError(f"{e.msg} at line {e.lineno} column {e.colno}")
        err.lineno, err.offset = e.lineno, e.colno
        raise err from None


def _req(d, key, kind, where):
    if not isinstance(d, dict) or key not in d:
        raise SchemaError(f"{where}: missing '{key}'")
    v = d[key]
    if kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError(f"{where}.{key}: expected a number")
        return float(v)
    if kind is int and (isinstance(v, bool) or not isinstance(v, int)):
        raise SchemaError(f"{where}.{key}: expected an integer")
    if kind is not int and not isinstance(v, kind):
        raise SchemaError(f"{where}.{key}: expected {kind.__name__}")
    return v


def _xy(v, where):
    if not isinstance(v, list) or len(v) != 2 or any(
            isinstance(c, bool) or not isinstance(c, (int, float)) for c in v):
        raise SchemaError(f"{where}: expected [x, y]")
    return (float(v[0]), float(v[1]))


def _half(d, where):
    return PortalEdgeRef(_req(d, "fragment", int, where), _req(d, "edge", int, where),
                         _req(d, "reversed", bool, where))


def from_document(doc) -> Portalgon:
    """Build and validate a portalgon from a parsed document."""
    if not isinstance(doc, dict):
        raise SchemaError("document must be an object")
    ver = _req(doc, "format_version", int, "document")
    if ver != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {ver}")
    frs = _req(doc, "fragments", list, "document")
    frags = [None] * len(frs)
    for i, f in enumerate(frs):
        where = f"fragments[{i}]"
        fid = _req(f, "id", int, where)
        if not (0 <= fid < len(frs)) or frags[fid] is not None:
            raise SchemaError(f"{where}.id: ids must be 0..{len(frs) - 1}, each once")
        frags[fid] = [_xy(v, f"{where}.vertices[{j}]")
                      for j, v in enumerate(_req(f, "vertices", list, where))]
    portals = []
    for k, q in enumerate(_req(doc, "portals", list, "document")):
        where = f"portals[{k}]"
        portals.append(Portal(_half(_req(q, "a", dict, where), where + ".a"),
                              _half(_req(q, "b", dict, where), where + ".b")))
    points = {}
    for name, q in (doc.get("points") or {}).items():
        where = f"points.{name}"
        points[name] = SurfacePoint(_req(q, "fragment", int, where),
                                    _xy(_req(q, "location", list, where), where + ".location"))
    try:
        p = Portalgon(frags, portals, points)
    except InvalidPortalgon as e:
        raise ValidationError(e.violations) from None
    v = validate(p)
    if v:
        raise ValidationError(v)
    return p


def parse(text) -> Portalgon:
    """Parse portalgon document text (``str`` or UTF-8 ``bytes``)."""
    return from_document(_load(text))


def load(path) -> Portalgon:
    with open(path, "rb") as fh:
        return parse(fh.read())


def to_document(p: Portalgon) -> dict:
    def half(h):
        return {"fragment": h.fragment, "edge": h.edge_index, "reversed": h.reversed}

    doc = {
        "format_version": FORMAT_VERSION,
        "fragments": [{"id": i, "vertices": [list(v) for v in f.vertices]}
                      for i, f in enumerate(p.fragments)],
        "portals": [{"a": half(q.a), "b": half(q.b)} for q in p.portals],
    }
    if p.points:
        doc["points"] = {k: {"fragment": s.fragment, "location": list(s.location)}
                         for k, s in sorted(p.points.items())}
    return doc


def serialize(p: Portalgon) -> str:
    return json.dumps(to_document(p), indent=1) + "\n"


def save(p: Portalgon, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(p))


# --------------------------------------------------------------------------
# results


def point_to_dict(s: SurfacePoint) -> dict:
    return {"fragment": s.fragment, "location": list(s.location)}


def signature_to_list(sig: Signature) -> list:
    out = []
    for e in sig.elements:
        if isinstance(e, VertexElement):
            out.append({"vertex": {"fragment": e.fragment, "index": e.vertex}})
        else:
            h = e.half
            out.append({"cross": {"fragment": h.fragment, "edge": h.edge_index, "reversed": h.reversed}})
    return out


def signature_from_list(start: int, items: list) -> Signature:
    els = []
    for d in items:
        if "vertex" in d:
            els.append(VertexElement(d["vertex"]["fragment"], d["vertex"]["index"]))
        else:
            c = d["cross"]
            els.append(CrossingElement(PortalEdgeRef(c["fragment"], c["edge"], c["reversed"])))
    return Signature(start, tuple(els))


def path_to_dict(path: GeodesicPath) -> dict:
    return {
        "length": path.length,
        "signature": {"start": path.signature.start,
                      "elements": signature_to_list(path.signature)},
        "polyline": [{"fragment": pc.fragment, "points": [list(x) for x in pc.points]}
                     for pc in path.polyline],
        "budget_exceeded": path.budget_exceeded,
    }


def spm_to_dict(spm) -> dict:
    """Edge intervals per mesh edge, interior cell counts and instrumentation counters."""
    E = spm.edge_map
    edges = []
    for em, fr in zip(E.edges, E.frames):
        tri, side = em.halves[0]
        o, u = fr[0]
        edges.append({
            "id": em.id,
            "triangle": tri,
            "side": side,
            "origin": list(o),
            "direction": list(u),
            "length": em.length,
            "intervals": [{"x0": iv.x0, "x1": iv.x1, "side": iv.side,
                           "apex": list(iv.wave.apex), "offset": iv.wave.offset}
                          for iv in em.intervals],
            "counters": vars(em.counters).copy(),
        })
    tris = E.mesh.verts
    doc = {
        "source": point_to_dict(spm.source),
        "triangles": [[list(v) for v in t] for t in tris],
        "origin": list(E.triangulation.origin),
        "edges": edges,
        "cells": [len(c) for c in spm.interior_map.cells],
        "complexity": dict(spm.complexity),
    }
    if spm.interior_map.cells:
        doc["cell_polygons"] = [_cell_pieces(spm.interior_map, k, t) for k, t in enumerate(tris)]
    return doc


def _cell_pieces(I, k, tri, res=6):
    """Owner of each piece of a regular ``res``-subdivision of triangle ``k``, grouped by generator."""
    a, b, c = tri

    def at(i, j):
        u, v = i / res, j / res
        return tuple(a[d] + u * (b[d] - a[d]) + v * (c[d] - a[d]) for d in range(2))

    gens = I.generators[k]
    groups = {}
    for i in range(res):
        for j in range(res - i):
            pieces = [(at(i, j), at(i + 1, j), at(i, j + 1))]
            if i + j < res - 1:
                pieces.append((at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)))
            for pc in pieces:
                m = tuple(sum(x[d] for x in pc) / 3 for d in range(2))
                _, g = I.evaluate(k, m)
                gi = gens.index(g) if g is not None else -1
                groups.setdefault(gi, []).append([list(x) for x in pc])
    return [{"generator": g, "pieces": groups[g]} for g in sorted(groups)]


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"
