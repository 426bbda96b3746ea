"""LmPAXp vs MinPAXp on random decision trees.

For each threshold, prints the share of locally-minimal explanations that
are also subset-minimal, and the average lengths of both kinds.

    python3 scripts/trend_report.py --trees 100 --delta 0.95 --delta 0.9
"""
import argparse
import random
import time
from dataclasses import dataclass
from fractions import Fraction

from paxp import engine, synth


@dataclass(frozen=True)
class TrendConfig:
    trees: int = 100
    max_depth: int = 8
    min_features: int = 4
    max_features: int = 10
    max_domain: int = 4
    seed: int = 9


def trend(cfg: TrendConfig, delta: Fraction) -> dict:
    rng = random.Random(cfg.seed)
    space = synth.SpaceConfig(cfg.min_features, cfg.max_features, 2, cfg.max_domain)
    lm_len, min_len, minimal = [], [], 0
    lm_time = min_time = 0.0
    for _ in range(cfg.trees):
        tree = synth.random_tree(rng, synth.random_meta(rng, space), cfg.max_depth, stop=0.2)
        v = synth.random_point(rng, tree.meta)
        t0 = time.perf_counter()
        lm = engine.lm_paxp(tree, v, seed=tree.path_universe(v), delta=delta)
        t1 = time.perf_counter()
        mn = engine.min_paxp(tree, v, delta=delta)
        t2 = time.perf_counter()
        lm_time += t1 - t0
        min_time += t2 - t1
        lm_len.append(len(lm))
        min_len.append(len(mn))
        minimal += engine.is_subset_minimal(tree, v, lm, delta)
    n = cfg.trees
    return {
        "delta": delta,
        "subset_minimal_pct": 100 * minimal / n,
        "lm_avg": sum(lm_len) / n, "lm_max": max(lm_len), "lm_min": min(lm_len),
        "min_avg": sum(min_len) / n, "min_max": max(min_len), "min_min": min(min_len),
        "lm_ms": 1e3 * lm_time / n, "min_ms": 1e3 * min_time / n,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trees", type=int, default=TrendConfig.trees)
    ap.add_argument("--max-depth", type=int, default=TrendConfig.max_depth)
    ap.add_argument("--seed", type=int, default=TrendConfig.seed)
    ap.add_argument("--delta", action="append", help="repeatable, default 0.95")
    args = ap.parse_args()
    cfg = TrendConfig(trees=args.trees, max_depth=args.max_depth, seed=args.seed)
    print(f"{'delta':>6} {'m-sub %':>8} {'Lm avg':>7} {'Lm M/m':>7} {'Min avg':>8} "
          f"{'Min M/m':>8} {'Lm ms':>7} {'Min ms':>7}")
    for d in args.delta or ["0.95"]:
        r = trend(cfg, engine.parse_delta(d))
        print(f"{d:>6} {r['subset_minimal_pct']:>8.1f} {r['lm_avg']:>7.2f} "
              f"{r['lm_max']:>3}/{r['lm_min']:<3} {r['min_avg']:>8.2f} "
              f"{r['min_max']:>4}/{r['min_min']:<3} {r['lm_ms']:>7.2f} {r['min_ms']:>7.2f}")


if __name__ == "__main__":
    main()
