"""Shared corpus builders for the test suite."""

from __future__ import annotations

import itertools
import random

from dagpebble.graphs import Dag


def all_dags(n: int):
    """Every DAG on n nodes labeled in topological order (edges low -> high)."""
    pair_lists = [list(range(1 << (v - 1))) for v in range(1, n + 1)]
    for combo in itertools.product(*pair_lists):
        edges = []
        for v, mask in enumerate(combo, start=1):
            for u in range(1, v):
                if (mask >> (u - 1)) & 1:
                    edges.append((u, v))
        yield Dag(n, edges)


def random_dag(rng: random.Random, n: int, max_indeg: int = 3) -> Dag:
    """Random DAG: each node independently picks indeg ~ U{0..min(max_indeg, v-1)}
    distinct earlier parents."""
    edges = []
    for v in range(2, n + 1):
        k = rng.randint(0, min(max_indeg, v - 1))
        for u in rng.sample(range(1, v), k):
            edges.append((u, v))
    return Dag(n, edges)


def edge_set(g: Dag) -> set[tuple[int, int]]:
    return {(u, v) for v in range(1, g.n + 1) for u in g.parents(v)}


def complete_dag(n: int) -> Dag:
    return Dag(n, [(u, v) for v in range(2, n + 1) for u in range(1, v)])
