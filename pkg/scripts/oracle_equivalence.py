"""Cross-check every counting backend against brute-force enumeration.

    python3 scripts/oracle_equivalence.py --queries 1000
"""
import argparse
import random
import time

from paxp import oracle, synth


def check_family(family: str, queries: int, seed: int) -> tuple[int, float]:
    rng = random.Random(seed)
    bad = 0
    t0 = time.perf_counter()
    model = None
    for q in range(queries):
        if q % 10 == 0:
            model = synth.random_model(rng, family)
        v = synth.random_point(rng, model.meta)
        fixed = synth.random_subset(rng, model.meta)
        c = rng.choice(model.meta.classes)
        cp = model.count(v, fixed, c)
        if (cp.target, cp.total) != oracle.brute_counts(model, v, fixed, c):
            bad += 1
    return bad, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--queries", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--family", action="append", choices=synth.FAMILIES)
    args = ap.parse_args()
    failed = False
    for fam in args.family or synth.FAMILIES:
        bad, secs = check_family(fam, args.queries, args.seed)
        failed |= bad > 0
        print(f"{fam:>6}: {args.queries - bad}/{args.queries} agree ({secs:.1f}s)")
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
