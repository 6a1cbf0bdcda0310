"""Random insert/query workloads on the lower envelope, compared with a naive minimum."""
import argparse
import math
import random

from portalgon.envelope import ApexedFunction, LowerEnvelope


def workload(seed, n_ops, samples):
    rng = random.Random(seed)
    env, fs = LowerEnvelope(), []
    for _ in range(n_ops):
        lo = rng.uniform(0, 8)
        f = ApexedFunction(rng.uniform(-2, 12), rng.uniform(0, 3), rng.uniform(0, 4), lo,
                           min(10.0, lo + rng.uniform(0.5, 6)))
        env.insert(f)
        fs.append(f)
        r = rng.random()
        if r < 0.3:
            env.next_local_minimum(rng.uniform(0, 5))
        elif r < 0.6:
            x = rng.uniform(0, 10)
            g = env.value(x)[1]
            if g is not None:
                env.next_vertex(g, x)
    err = 0.0
    for i in range(samples + 1):
        x = 10 * i / samples
        a = env(x)
        b = min((f.value(x) for f in fs if f.lo <= x <= f.hi), default=math.inf)
        if not (math.isinf(a) and math.isinf(b)):
            err = max(err, abs(a - b))
    return err, env.counters


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=1000)
    ap.add_argument("--ops", type=int, default=40)
    ap.add_argument("--samples", type=int, default=200)
    a = ap.parse_args()
    worst, created, deleted, merges = 0.0, 0, 0, 0
    for seed in range(a.runs):
        err, c = workload(seed, a.ops, a.samples)
        worst = max(worst, err)
        created += c.intervals_created
        deleted += c.intervals_deleted
        merges += c.merges
        assert c.intervals_deleted == len(c.deleted_ids) <= c.intervals_created
    print(f"runs {a.runs}, max error {worst:.3e}, intervals created {created}, deleted {deleted}, merges {merges}")


if __name__ == "__main__":
    main()
