"""Edge-interval count of the shortest path map on the lowerbound family as h doubles."""
import argparse
import csv
import math
import sys
import time

from portalgon import corpus
from portalgon.spm import shortest_path_map


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=3, help="number of strips")
    ap.add_argument("--h0", type=int, default=4)
    ap.add_argument("--steps", type=int, default=5, help="number of doublings")
    ap.add_argument("--csv", help="also write the table here")
    a = ap.parse_args()
    rows = []
    for i in range(a.steps + 1):
        h = a.h0 << i
        lb = corpus.lowerbound(a.m, h)
        t0 = time.perf_counter()
        m = shortest_path_map(lb.portalgon, lb.s, edges_only=True)
        c = m.complexity
        rows.append({"h": h, "n": lb.portalgon.n_vertices, "edge_intervals": c["edge_intervals"],
                     "functions": c["functions"], "events": c["events"],
                     "seconds": round(time.perf_counter() - t0, 3)})
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), delimiter="\t")
    w.writeheader()
    w.writerows(rows)
    ks = [r["edge_intervals"] for r in rows]
    print("step slopes:", " ".join(f"{math.log2(b / a):.3f}" for a, b in zip(ks, ks[1:])))
    if a.csv:
        with open(a.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
