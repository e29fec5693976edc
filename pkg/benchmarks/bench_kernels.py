#!/usr/bin/env python3
"""Time the compiled search kernels against their pure-Python twins.

Both implementations ship in every install; `dagpebble.kernels` picks the
compiled one unless DAGPEBBLE_PURE=1.  This script imports the two modules
directly (no environment juggling) and times the three hot entry points on
identical workloads:

  cc_exact_bits        exact cumulative-cost search (A* over bitmask states)
  min_depth_bits       depth-reduction decision (branch-and-bound)
  count_depth_ge_bits  depth DP over one blocked mask

Usage: python benchmarks/bench_kernels.py [--repeat 5] [--seed 1]
"""

from __future__ import annotations

import argparse
import random
import statistics
import sys
import time

from dagpebble import _ccsearch, _ccsearch_py
from dagpebble.build import drsample

IMPLS = (("compiled", _ccsearch), ("python", _ccsearch_py))


def masks(g):
    pm = [sum(1 << (u - 1) for u in g.parents(v)) for v in range(1, g.n + 1)]
    sinks = sum(1 << (v - 1) for v in g.sinks())
    return pm, sinks


def random_dag(rng: random.Random, n: int, max_indeg: int = 3):
    """Parent masks of a random DAG: indegree ~ U{0..min(max_indeg, v-1)}."""
    pm = []
    for v in range(n):
        k = rng.randint(0, min(max_indeg, v))
        pm.append(sum(1 << u for u in rng.sample(range(v), k)))
    sinks = 0
    covered = 0
    for v in range(n):
        covered |= pm[v]
    for v in range(n):
        if not (covered >> v) & 1:
            sinks |= 1 << v
    return pm, sinks


def bench(label: str, workload, repeat: int) -> dict[str, float]:
    out = {}
    for name, impl in IMPLS:
        times = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            workload(impl)
            times.append(time.perf_counter() - t0)
        out[name] = statistics.median(times)
    ratio = out["python"] / out["compiled"] if out["compiled"] else float("inf")
    print(f"{label:<44} compiled {out['compiled'] * 1e3:9.2f} ms   "
          f"python {out['python'] * 1e3:9.2f} ms   x{ratio:5.1f}")
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5,
                    help="runs per measurement; medians are reported")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    rng = random.Random(args.seed)

    graphs_10 = [random_dag(rng, 10) for _ in range(200)]
    graphs_14 = [random_dag(rng, 14) for _ in range(40)]
    dr_graphs = [drsample(48, random.Random(args.seed + i)) for i in range(8)]
    dr_masks = [masks(g) for g in dr_graphs]
    blocked = [rng.getrandbits(48) for _ in range(2000)]

    print(f"kernel benchmark (repeat={args.repeat}, seed={args.seed})")

    def cc_small(impl):
        for pm, sinks in graphs_10:
            impl.cc_exact_bits(10, pm, sinks)

    def cc_mid(impl):
        for pm, sinks in graphs_14:
            impl.cc_exact_bits(14, pm, sinks)

    def depth_reduce(impl):
        for pm, _ in dr_masks:
            for e in (4, 8, 12):
                impl.min_depth_bits(48, pm, e, 12)

    def depth_count(impl):
        pm, _ = dr_masks[0]
        for b in blocked:
            impl.count_depth_ge_bits(48, pm, b, 4)

    checks = []
    checks.append(bench("cc_exact_bits, 200 random 10-node DAGs", cc_small,
                        args.repeat))
    checks.append(bench("cc_exact_bits, 40 random 14-node DAGs", cc_mid,
                        args.repeat))
    checks.append(bench("min_depth_bits, 8x drsample(48), e in {4,8,12}",
                        depth_reduce, args.repeat))
    checks.append(bench("count_depth_ge_bits, 2000 masks on drsample(48)",
                        depth_count, args.repeat))

    speedups = [c["python"] / c["compiled"] for c in checks if c["compiled"]]
    print(f"median speedup x{statistics.median(speedups):.1f} "
          f"(min x{min(speedups):.1f}, max x{max(speedups):.1f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
