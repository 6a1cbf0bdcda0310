"""Crossing components of sampled shortest paths before and after intrinsic Delaunay flips."""
import argparse
import random

from portalgon import corpus
from portalgon.delaunay import intrinsic_delaunay, verify_empty_disk
from portalgon.mesh import triangulate
from portalgon.unfold import crossing_profile, oracle_paths


def worst_components(p, groups, seed):
    pts = corpus.random_points(p, random.Random(seed), 11 * groups)
    worst = n = 0
    for j in range(groups):
        for path in oracle_paths(p, pts[11 * j], pts[11 * j + 1:11 * (j + 1)]):
            n += 1
            worst = max(worst, max(crossing_profile(path).values(), default=0))
    return worst, n


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--groups", type=int, default=5, help="sources per instance, ten targets each")
    ap.add_argument("--seed", type=int, default=6)
    a = ap.parse_args()
    print("instance\ttriangles\tflips\tbefore\tafter\tpaths\tcertified")
    for name, p in corpus.named().items():
        t = triangulate(p, separate=False).portalgon
        res = intrinsic_delaunay(t)
        q = res.portalgon
        before, _ = worst_components(t, a.groups, a.seed)
        after, n = worst_components(q, a.groups, a.seed)
        ok = sum(verify_empty_disk(q, k).empty for k in range(len(q.fragments)))
        print(f"{name}\t{len(q.fragments)}\t{res.flips}\t{before}\t{after}\t{n}\t{ok}/{len(q.fragments)}")


if __name__ == "__main__":
    main()
