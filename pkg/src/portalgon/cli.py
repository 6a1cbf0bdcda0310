"""Command line front end: ``portalgon <command> <file> ...``.

Exit codes: 0 success, 1 invalid input, 2 budget exceeded, 3 unsupported
topology, 4 numerical stall.
"""
from __future__ import annotations

import argparse
import json
import re
import sys

from . import io
from .geom import lerp
from .model import InvalidPortalgon, NotOnSurface, SurfacePoint

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_TOPOLOGY, EXIT_STALL = range(5)

_XY = re.compile(r"^(\d+):([^,]+),([^,]+)$")
_EDGE = re.compile(r"^(\d+):e(\d+)@(.+)$")


class UsageError(ValueError):
    pass


def parse_point(p, text: str) -> SurfacePoint:
    """``F:x,y`` in fragment coordinates, ``F:e<i>@t`` on edge ``i``, or a named point."""
    if text in p.points:
        return p.points[text]
    m = _EDGE.match(text)
    if m:
        f, i, t = int(m[1]), int(m[2]), float(m[3])
        if f >= len(p.fragments) or i >= p.fragments[f].n or not 0.0 <= t <= 1.0:
            raise NotOnSurface(f"no edge point {text}")
        a, b = p.fragments[f].edge(i)
        return SurfacePoint(f, lerp(a, b, t), (i, t))
    m = _XY.match(text)
    if m:
        f = int(m[1])
        if f >= len(p.fragments):
            raise NotOnSurface(f"no fragment {f}")
        return SurfacePoint(f, (float(m[2]), float(m[3])))
    raise UsageError(f"cannot read point '{text}' (expected F:x,y or F:e<i>@t)")


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_validate(a, p):
    print(f"ok: {len(p.fragments)} fragments, {len(p.portals)} portals")
    return EXIT_OK


def cmd_dist(a, p):
    from .model import locate
    from .unfold import SearchBudget, oracle_shortest_path

    s, t = parse_point(p, a.src), parse_point(p, a.dst)
    locate(p, s)
    locate(p, t)
    budget = SearchBudget(max_signature=a.budget) if a.budget is not None else None
    path = oracle_shortest_path(p, s, t, budget)
    print(repr(path.length))
    if a.out:
        doc = {"query": {"from": io.point_to_dict(s), "to": io.point_to_dict(t)},
               "distances": [path.length], "paths": [io.path_to_dict(path)]}
        _write(a.out, io.dumps(doc))
    return EXIT_BUDGET if path.budget_exceeded else EXIT_OK


def cmd_spm(a, p):
    from .model import locate
    from .render import render_svg
    from .spm import shortest_path_map

    s = parse_point(p, a.source)
    locate(p, s)
    m = shortest_path_map(p, s, edges_only=a.edges_only)
    doc = io.spm_to_dict(m)
    doc["query"] = {"source": io.point_to_dict(s), "edges_only": a.edges_only}
    for k, v in sorted(m.complexity.items()):
        print(f"{k}: {v}")
    if a.out:
        _write(a.out, io.dumps(doc))
    if a.svg:
        _write(a.svg, render_svg(p, [doc]))
    return EXIT_OK


def cmd_happiness(a, p):
    from .happy import estimate_happiness

    rep = estimate_happiness(p, samples=a.samples, seed=a.seed)
    for f in range(len(p.fragments)):
        up = rep.upper.get(f)
        rule = f" ({rep.rule[f]})" if f in rep.rule else ""
        print(f"fragment {f}: observed {rep.lower[f]}, bound {up if up is not None else '-'}{rule}")
    print(f"pairs: {rep.pairs}")
    print(f"happiness >= {rep.h_lower}" + (f", <= {rep.h_upper}" if len(rep.upper) == len(p.fragments) else ""))
    return EXIT_OK


def cmd_happify(a, p):
    from .happy import happify_transform

    tr = happify_transform(p)  # --h-hint is advisory and not needed by the construction
    for line in tr.log:
        print(line)
    q = tr.portalgon
    print(f"{len(p.fragments)} -> {len(q.fragments)} fragments, {p.n_vertices} -> {q.n_vertices} vertices")
    _write(a.output, io.serialize(q))
    return EXIT_OK


def _triangles(p):
    from .mesh import triangulate

    if all(f.n == 3 for f in p.fragments):
        return p
    return triangulate(p, separate=True).portalgon


def cmd_delaunay(a, p):
    from .delaunay import intrinsic_delaunay, verify_empty_disk

    res = intrinsic_delaunay(_triangles(p), max_flips=a.max_flips)
    print(f"flips: {res.flips}, complete: {str(res.complete).lower()}")
    _write(a.output, io.serialize(res.portalgon))
    code = EXIT_OK if res.complete else EXIT_BUDGET
    if a.certify:
        bad = 0
        for k in range(len(res.triangles)):
            c = verify_empty_disk(res.portalgon, k)
            if not (c.empty and c.injective):
                bad += 1
                print(f"triangle {k}: {len(c.witnesses)} witnesses, injective {str(c.injective).lower()}")
        print(f"certified: {len(res.triangles) - bad}/{len(res.triangles)}")
        if bad and code == EXIT_OK:
            code = EXIT_INVALID
    return code


def cmd_triangulate(a, p):
    q = _triangles(p)
    print(f"{len(q.fragments)} triangles, {len(q.portals)} portals")
    _write(a.output, io.serialize(q))
    return EXIT_OK


def cmd_render(a, p):
    from .render import render_svg

    overlays = []
    for path in a.overlay or ():
        with open(path, encoding="utf-8") as fh:
            overlays.append(json.load(fh))
    _write(a.svg, render_svg(p, overlays))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="portalgon", description="Geodesics on portalgons.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("file")
        sp.set_defaults(fn=fn)
        return sp

    add("validate", cmd_validate, "check a portalgon document")
    sp = add("dist", cmd_dist, "exact geodesic distance between two points")
    sp.add_argument("--from", dest="src", required=True, metavar="POINT")
    sp.add_argument("--to", dest="dst", required=True, metavar="POINT")
    sp.add_argument("--budget", type=int, help="maximum signature length searched")
    sp.add_argument("--out", help="write a result document with the path")
    sp = add("spm", cmd_spm, "shortest path map from a source")
    sp.add_argument("--source", required=True, metavar="POINT")
    sp.add_argument("--edges-only", action="store_true")
    sp.add_argument("--out")
    sp.add_argument("--svg")
    sp = add("happiness", cmd_happiness, "sampled and analytic happiness bounds")
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp = add("happify", cmd_happify, "equivalent 5-happy portalgon")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--h-hint", type=int)
    sp = add("delaunay", cmd_delaunay, "intrinsic Delaunay triangulation by flips")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--max-flips", type=int)
    sp.add_argument("--certify", action="store_true")
    sp = add("triangulate", cmd_triangulate, "triangulate every fragment")
    sp.add_argument("-o", "--output", required=True)
    sp = add("render", cmd_render, "draw the portalgon as SVG")
    sp.add_argument("--svg", required=True)
    sp.add_argument("--overlay", action="append", help="result document to draw on top")
    return ap


def main(argv=None) -> int:
    from .happy import UnsupportedTopology
    from .spm import NumericalStall
    from .unfold import BudgetExceeded, Unreachable

    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK
    try:
        p = io.load(a.file)
        return a.fn(a, p)
    except (io.DocumentSyntaxError, io.SchemaError, io.ValidationError, InvalidPortalgon,
            NotOnSurface, UsageError, Unreachable, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except BudgetExceeded as e:
        ub = getattr(e, "upper_bound", None)
        print(f"budget exceeded: {e}" + (f" (upper bound {ub!r})" if ub is not None else ""), file=sys.stderr)
        return EXIT_BUDGET
    except UnsupportedTopology as e:
        print(f"unsupported topology: {e}", file=sys.stderr)
        return EXIT_TOPOLOGY
    except NumericalStall as e:
        print(f"numerical stall: {e}", file=sys.stderr)
        return EXIT_STALL


if __name__ == "__main__":
    sys.exit(main())
