"""Regenerate the example portalgon documents in data/."""
import argparse
import pathlib

from portalgon import corpus, io
from portalgon.model import Portalgon


def with_points(sp) -> Portalgon:
    p = sp.portalgon
    return Portalgon(p.fragments, p.portals, {"s": sp.s, "t": sp.t})


DOCUMENTS = {
    "torus": corpus.torus,
    "cylinder": corpus.cylinder,
    "mobius": corpus.mobius,
    "pyramid": corpus.pyramid,
    "spiral": lambda: with_points(corpus.spiral(8)),
    "lowerbound": lambda: with_points(corpus.lowerbound(3, 4)),
    "twocycle": corpus.two_cycle,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    a = ap.parse_args()
    out = pathlib.Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, make in DOCUMENTS.items():
        (out / f"{name}.json").write_text(io.serialize(make()))
        print(out / f"{name}.json")


if __name__ == "__main__":
    main()
