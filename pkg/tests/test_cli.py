import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from portalgon import io
from portalgon.cli import main

DATA = Path(__file__).resolve().parent.parent / "data"


def run(*args):
    return main([str(a) for a in args])


def test_validate_ok(capsys):
    assert run("validate", DATA / "torus.json") == 0
    assert "1 fragments, 2 portals" in capsys.readouterr().out


def test_validate_syntax_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"format_version": 1, "fragments": [')
    assert run("validate", bad) == 1
    assert "line 1" in capsys.readouterr().err


def test_validate_missing_file():
    assert run("validate", "/nonexistent/x.json") == 1


def test_dist_torus(capsys, tmp_path):
    out = tmp_path / "path.json"
    assert run("dist", DATA / "torus.json", "--from", "0:0.25,0.25", "--to", "0:0.75,0.75", "--out", out) == 0
    v = float(capsys.readouterr().out.strip())
    assert abs(v - math.sqrt(0.5)) <= 1e-12
    doc = json.loads(out.read_text())
    assert doc["distances"] == [v] and len(doc["paths"]) == 1


def test_dist_named_points(capsys):
    assert run("dist", DATA / "spiral.json", "--from", "s", "--to", "t") == 0
    assert float(capsys.readouterr().out) > 0


def test_dist_edge_point(capsys):
    assert run("dist", DATA / "torus.json", "--from", "0:e0@0.5", "--to", "0:e2@0.5") == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("point", ["0:5,5", "3:0.1,0.1", "nowhere", "0:e9@0.5", "0:e0@1.5"])
def test_dist_bad_point(point):
    assert run("dist", DATA / "torus.json", "--from", point, "--to", "0:0.5,0.5") == 1


def test_dist_budget(capsys):
    assert run("dist", DATA / "spiral.json", "--from", "s", "--to", "t", "--budget", "2") == 2
    assert "budget exceeded" in capsys.readouterr().err


def test_spm_outputs(tmp_path, capsys):
    out, svg = tmp_path / "m.json", tmp_path / "m.svg"
    assert run("spm", DATA / "pyramid.json", "--source", "0:0.5,0.2", "--out", out, "--svg", svg) == 0
    text = capsys.readouterr().out
    doc = json.loads(out.read_text())
    assert f"edge_intervals: {doc['complexity']['edge_intervals']}" in text
    assert svg.read_text().startswith("<svg")


def test_happiness(capsys):
    assert run("happiness", DATA / "spiral.json", "--samples", "40") == 0
    assert "happiness >=" in capsys.readouterr().out


def test_happify_two_cycle(tmp_path):
    assert run("happify", DATA / "twocycle.json", "-o", tmp_path / "o.json") == 3


def test_happify_spiral(tmp_path):
    out = tmp_path / "o.json"
    assert run("happify", DATA / "spiral.json", "-o", out) == 0
    assert len(io.load(out).fragments) <= 3


def test_delaunay_certify(tmp_path, capsys):
    out = tmp_path / "d.json"
    assert run("delaunay", DATA / "spiral.json", "-o", out, "--certify") == 0
    text = capsys.readouterr().out
    assert "complete: true" in text and "certified:" in text
    assert all(f.n == 3 for f in io.load(out).fragments)


def test_delaunay_budget(tmp_path):
    assert run("delaunay", DATA / "lowerbound.json", "-o", tmp_path / "d.json", "--max-flips", "0") == 2


def test_triangulate_and_render(tmp_path):
    tri, svg = tmp_path / "t.json", tmp_path / "t.svg"
    assert run("triangulate", DATA / "mobius.json", "-o", tri) == 0
    assert run("render", tri, "--svg", svg) == 0
    assert "<polygon" in svg.read_text()


def test_render_with_path_overlay(tmp_path):
    path, svg = tmp_path / "p.json", tmp_path / "p.svg"
    assert run("dist", DATA / "spiral.json", "--from", "s", "--to", "t", "--out", path) == 0
    assert run("render", DATA / "spiral.json", "--svg", svg, "--overlay", path) == 0
    assert 'class="path"' in svg.read_text()


def test_usage_error():
    assert run("dist", DATA / "torus.json") == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "portalgon", "validate", str(DATA / "torus.json")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "ok:" in r.stdout
