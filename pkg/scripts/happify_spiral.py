"""Happify spirals of growing crossing count and report size, happiness and trace cost."""
import argparse
import math
import random

from portalgon import corpus, happy
from portalgon.unfold import SearchBudget, crossing_profile, oracle_distances, oracle_shortest_path


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", type=int, nargs="+", default=[8, 64, 4096, 10 ** 6])
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--budget", type=int, default=400, help="oracle signature budget")
    a = ap.parse_args()
    budget = SearchBudget(max_signature=a.budget)
    print("h\tfragments\tvertices\twitness\tmax_rel_err\ttrace_k\tevaluations\tcap")
    for h in a.h:
        sp = corpus.spiral(h)
        tr = happy.happify_transform(sp.portalgon)
        q = tr.portalgon
        path = oracle_shortest_path(q, tr.map_point(sp.s), tr.map_point(sp.t), budget)
        pts = corpus.random_points(sp.portalgon, random.Random(h), a.samples + 1)
        ds = oracle_distances(q, tr.map_point(pts[0]), [tr.map_point(x) for x in pts[1:]], budget)
        err = max(abs(d - sp.closed_form(pts[0].location, x.location)) / d for d, x in zip(ds, pts[1:]))
        rt = happy.trace_ray_power(corpus.spiral(h, tilt=0.01 / h).portalgon)
        print(f"{h}\t{len(q.fragments)}\t{q.n_vertices}\t{max(crossing_profile(path).values())}\t"
              f"{err:.2e}\t{rt.k}\t{rt.evaluations}\t{2 * math.log2(h) + 10:.1f}")


if __name__ == "__main__":
    main()
