"""Independent slow-but-obvious oracles for everything the fast code derives.

Each function here recomputes a quantity from its bare definition with zero
shared machinery: pebbling costs by Dijkstra over explicit configurations,
depth-robustness by enumerating removal sets with itertools, distributions by
exact rational arithmetic.  Tests compare the library against these on small
instances; Monte Carlo baselines frozen at first build live in the test
modules themselves.
"""

from __future__ import annotations

import heapq
import itertools
from fractions import Fraction


# ---------------------------------------------------------------------------
# tiny standalone graph helpers (deliberately not using dagpebble.graphs)


def parents_of(n: int, edges: set[tuple[int, int]]) -> dict[int, list[int]]:
    par: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for u, v in edges:
        par[v].append(u)
    for v in par:
        par[v].sort()
    return par


def children_of(n: int, edges: set[tuple[int, int]]) -> dict[int, list[int]]:
    ch: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for u, v in edges:
        ch[u].append(v)
    for v in ch:
        ch[v].sort()
    return ch


def sinks_of(n: int, edges: set[tuple[int, int]]) -> set[int]:
    has_child = {u for u, _ in edges}
    return {v for v in range(1, n + 1) if v not in has_child}


def node_depths(n: int, edges: set[tuple[int, int]], removed: set[int]) -> dict[int, int]:
    """Longest path (in edges) ending at each surviving node of G - removed."""
    par = parents_of(n, edges)
    depth: dict[int, int] = {}
    for v in range(1, n + 1):  # ids are topological
        if v in removed:
            continue
        depth[v] = max((depth[u] + 1 for u in par[v] if u not in removed), default=0)
    return depth


def graph_depth(n: int, edges: set[tuple[int, int]], removed: set[int]) -> int:
    d = node_depths(n, edges, removed)
    return max(d.values(), default=-1)


def ancestor_closure(n: int, edges: set[tuple[int, int]], v: int,
                     removed: set[int]) -> set[int]:
    """Ancestors of v (v included) in G - removed; empty if v removed."""
    if v in removed:
        return set()
    par = parents_of(n, edges)
    seen = {v}
    stack = [v]
    while stack:
        w = stack.pop()
        for u in par[w]:
            if u not in removed and u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def reachable(n: int, edges: set[tuple[int, int]], src: int, dst: int,
              removed: set[int]) -> bool:
    if src in removed or dst in removed:
        return False
    ch = children_of(n, edges)
    seen = {src}
    stack = [src]
    while stack:
        w = stack.pop()
        if w == dst:
            return True
        for c in ch[w]:
            if c not in removed and c not in seen:
                seen.add(c)
                stack.append(c)
    return False


# ---------------------------------------------------------------------------
# exact pebbling cost by unrestricted Dijkstra over configurations


def naive_cc(n: int, edges: set[tuple[int, int]]) -> int:
    """Minimum sum of |P_i| over legal parallel pebblings ending with all
    sinks pebbled.  Moves are unrestricted: the next configuration is any
    subset of (current pebbles) union (nodes whose parents all carry pebbles).
    """
    if n == 0:
        return 0
    par = parents_of(n, edges)
    par_masks = [0] * (n + 1)
    for v in range(1, n + 1):
        for u in par[v]:
            par_masks[v] |= 1 << (u - 1)
    goal = 0
    for s in sinks_of(n, edges):
        goal |= 1 << (s - 1)

    dist = {0: 0}
    heap = [(0, 0)]
    while heap:
        g, conf = heapq.heappop(heap)
        if conf & goal == goal:
            return g
        if g > dist.get(conf, g):
            continue
        legal = conf
        for v in range(1, n + 1):
            if par_masks[v] & ~conf == 0:
                legal |= 1 << (v - 1)
        # enumerate every subset of `legal` as the next configuration
        sub = legal
        while True:
            cost = g + bin(sub).count("1")
            if sub != conf and cost < dist.get(sub, cost + 1):
                dist[sub] = cost
                heapq.heappush(heap, (cost, sub))
            if sub == 0:
                break
            sub = (sub - 1) & legal
    raise AssertionError("no complete pebbling found")


# ---------------------------------------------------------------------------
# depth-robustness by enumeration


def min_depth_after_removal(n: int, edges: set[tuple[int, int]],
                            budget: int) -> tuple[int, set[int]]:
    """Minimum graph depth achievable by removing at most `budget` nodes,
    with an argmin removal set; full enumeration via itertools.combinations.
    """
    best = graph_depth(n, edges, set())
    best_s: set[int] = set()
    nodes = range(1, n + 1)
    for k in range(1, min(budget, n) + 1):
        for combo in itertools.combinations(nodes, k):
            s = set(combo)
            d = graph_depth(n, edges, s)
            if d < best:
                best = d
                best_s = s
    return best, best_s


def dr_frontier(n: int, edges: set[tuple[int, int]]) -> list[int]:
    """d*(e) for e = 0..n: the worst-case surviving depth under <= e removals.

    Enumerates all 2^n removal sets once; d*(e) is non-increasing in e.
    Depth -1 means some removal wipes out every node.
    """
    best = [graph_depth(n, edges, set())] + [None] * n  # type: ignore[list-item]
    for bits in range(1, 1 << n):
        s = {v for v in range(1, n + 1) if (bits >> (v - 1)) & 1}
        k = len(s)
        d = graph_depth(n, edges, s)
        if best[k] is None or d < best[k]:
            best[k] = d
    out = []
    cur = best[0]
    for e in range(n + 1):
        if best[e] is not None and best[e] < cur:
            cur = best[e]
        out.append(cur)
    return out


def is_dr(n: int, edges: set[tuple[int, int]], e: int, d: int) -> bool:
    """(e,d)-depth-robustness by full enumeration of removal sets."""
    if d <= 0:
        return n > e  # a surviving node is a path of length 0
    nodes = range(1, n + 1)
    for k in range(0, min(e, n) + 1):
        for combo in itertools.combinations(nodes, k):
            if graph_depth(n, edges, set(combo)) < d:
                return False
    return True


def count_depth_at_least(n: int, edges: set[tuple[int, int]], removed: set[int],
                         d: int) -> int:
    depths = node_depths(n, edges, removed)
    return sum(1 for v, dv in depths.items() if dv >= d)


def is_fractional_dr(n: int, edges: set[tuple[int, int]], e: int, d: int,
                     f: float) -> bool:
    """(e,d,f)-fractional depth-robustness by full enumeration."""
    nodes = range(1, n + 1)
    for k in range(0, min(e, n) + 1):
        for combo in itertools.combinations(nodes, k):
            if count_depth_at_least(n, edges, set(combo), d) < f * n - 1e-9:
                return False
    return True


def is_ancestrally_robust(n: int, edges: set[tuple[int, int]], a: int, C: int,
                          f: float) -> bool:
    """(a,C,f)-ancestral robustness with exact per-node pebbling costs."""
    nodes = range(1, n + 1)
    for k in range(0, min(a, n) + 1):
        for combo in itertools.combinations(nodes, k):
            s = set(combo)
            good = 0
            for v in nodes:
                if v in s:
                    continue
                closure = ancestor_closure(n, edges, v, s)
                sub_edges = {(x, y) for (x, y) in edges
                             if x in closure and y in closure}
                relab = {w: i + 1 for i, w in enumerate(sorted(closure))}
                cc = naive_cc(len(closure),
                              {(relab[x], relab[y]) for (x, y) in sub_edges})
                if cc >= C:
                    good += 1
            if good < f * n - 1e-9:
                return False
    return True


# ---------------------------------------------------------------------------
# local expansion and good nodes, straight from the interval definitions


def pred_interval(v: int, k: int, n: int) -> list[int]:
    """I_v(k) = [v-k+1 .. v] clamped to [1..n]."""
    return list(range(max(1, v - k + 1), v + 1))


def succ_interval(v: int, k: int, n: int) -> list[int]:
    """I*_v(k) = [v+1 .. v+k] clamped to [1..n]."""
    return list(range(v + 1, min(n, v + k) + 1))


def is_local_expander(n: int, edges: set[tuple[int, int]], delta: float,
                      k_max: int | None = None) -> tuple[bool, tuple | None]:
    """Exhaustive delta-local-expansion check over full-width intervals.

    For every v and every radius k <= min(v, n - v): all pairs A, B of size
    exactly ceil(delta*k) drawn from the k predecessors-including-v and the
    k successors of v must be joined by an edge.  Returns (ok, witness).
    """
    import math

    for v in range(1, n + 1):
        top = min(v, n - v)
        if k_max is not None:
            top = min(top, k_max)
        for k in range(1, top + 1):
            need = math.ceil(delta * k)
            if need <= 0 or need > k:
                continue
            ivk = pred_interval(v, k, n)
            ivk_star = succ_interval(v, k, n)
            for a_set in itertools.combinations(ivk, need):
                for b_set in itertools.combinations(ivk_star, need):
                    if not any((x, y) in edges for x in a_set for y in b_set):
                        return False, (v, k, set(a_set), set(b_set))
    return True, None


def good_node_set(n: int, s: set[int], c: float) -> set[int]:
    """Nodes v whose anchored windows all keep >= c*r survivors, i.e.
    |I_v(r) ∩ S| <= (1-c)*r and |I*_v(r) ∩ S| <= (1-c)*r for all r."""
    out = set()
    for v in range(1, n + 1):
        ok = True
        for r in range(1, n + 1):
            before = sum(1 for w in pred_interval(v, r, n) if w in s)
            after = sum(1 for w in succ_interval(v, r, n) if w in s)
            if before > (1 - c) * r + 1e-9 or after > (1 - c) * r + 1e-9:
                ok = False
                break
        if ok:
            out.add(v)
    return out


def good_nodes_on_one_path(n: int, edges: set[tuple[int, int]], s: set[int],
                           good: set[int]) -> bool:
    """Is there a directed path in G - S visiting every good node?  Good node
    ids are topological, so the path must meet them in ascending order."""
    seq = sorted(good)
    return all(reachable(n, edges, a, b, s) for a, b in zip(seq, seq[1:]))


# ---------------------------------------------------------------------------
# back-edge sampler distribution, exact


def back_parent_pmf(v: int) -> dict[int, Fraction]:
    """Exact pmf of the two-stage bucket sampler for the back-parent of v.

    Bucket index i uniform on [1 .. ceil(log2 v)], then the parent uniform on
    [max(1, v - 2^i) .. v - max(1, 2^(i-1))].
    """
    assert v >= 2
    buckets = (v - 1).bit_length()  # == ceil(log2 v) for v >= 2
    pmf: dict[int, Fraction] = {}
    for i in range(1, buckets + 1):
        lo = max(1, v - (1 << i))
        hi = v - max(1, 1 << (i - 1))
        width = hi - lo + 1
        for u in range(lo, hi + 1):
            pmf[u] = pmf.get(u, Fraction(0)) + Fraction(1, buckets * width)
    return pmf


# ---------------------------------------------------------------------------
# honest-evaluation accounting, analytic


def honest_chain_eval_retained(n: int, n_chal: int) -> list[int]:
    """Retained-label counts after each round for the store-everything honest
    evaluator of a dynamized graph: i labels after base round i, then the full
    base plus the current chain head."""
    return [i for i in range(1, n + 1)] + [n + 1] * n_chal


def honest_chain_eval_cmc_bits(n: int, n_chal: int, w: int,
                               bookkeeping_bits: int = 64) -> int:
    counts = honest_chain_eval_retained(n, n_chal)
    return w * sum(counts) + bookkeeping_bits * len(counts)


def line_prefix_cc(v: int) -> int:
    """cc of the line graph on v nodes: one pebble sweeps, paying 1 per round,
    and the final round holds only the sink; v rounds total."""
    return v
