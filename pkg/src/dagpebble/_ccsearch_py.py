"""Pure-Python twin of the compiled search kernels.

Same function signatures and semantics as the Cython module `_ccsearch`;
selection between the two happens in `dagpebble.kernels`.  Graphs arrive
as parent bitmasks over 0-indexed nodes whose ids are already topological
(every parent id is smaller than its child id).
"""

from __future__ import annotations

import heapq

from .errors import CapExceeded

IMPLEMENTATION = "python"

_MAX_BITS = 63


def _check_bits(n: int) -> None:
    if n > _MAX_BITS:
        raise CapExceeded(f"bitmask kernels handle at most {_MAX_BITS} nodes, got {n}")


def _anc_self_masks(n: int, parent_masks: list[int]) -> list[int]:
    anc = [0] * n
    for v in range(n):
        a = 1 << v
        pm = parent_masks[v]
        while pm:
            low = pm & -pm
            a |= anc[low.bit_length() - 1]
            pm ^= low
        anc[v] = a
    return anc


def cc_exact_bits(
    n: int,
    parent_masks: list[int],
    sinks_mask: int,
    state_cap: int = 2_000_000,
) -> int:
    """Minimum total pebble count over all legal complete pebblings.

    A pebbling is complete when its final configuration contains every sink.
    The search is an A* over configurations with moves restricted to a normal
    form that some optimal pebbling always satisfies:

      * every step places at least one pebble, on nodes that are ancestors of
        a still-missing sink (useless placements can be deleted);
      * sinks are never removed once placed (they feed nothing, so any early
        placement can be postponed to a single final one);
      * removals are either forced (the node no longer reaches any missing
        sink) or taken from the parents of this step's placements (any other
        removal can be moved earlier, to the step after the node's last use).

    The heuristic is max(#exposed-ancestors, remaining-depth), both admissible
    and consistent, so the first goal pop is optimal.
    """
    _check_bits(n)
    if n == 0:
        return 0
    if sinks_mask == 0:
        raise ValueError("sinks_mask must be non-empty")
    anc = _anc_self_masks(n, parent_masks)
    sink_list = [v for v in range(n) if (sinks_mask >> v) & 1]
    nonsink = ~sinks_mask

    def useful_mask(pebbles: int) -> int:
        um = 0
        for s in sink_list:
            if not (pebbles >> s) & 1:
                um |= anc[s]
        return um

    def heuristic(pebbles: int, um: int) -> int:
        # Exposed ancestors: nodes reachable backwards from a missing sink
        # through unpebbled nodes only; each needs a future placement.
        exposed = 0
        frontier = um & ~pebbles & sinks_mask  # missing sinks
        while frontier:
            exposed |= frontier
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= parent_masks[low.bit_length() - 1]
                f ^= low
            frontier = nxt & ~pebbles & ~exposed
        adds_lb = bin(exposed).count("1")
        # Remaining rounds: depth of the unpebbled region below a missing sink.
        rounds_lb = 0
        if um & ~pebbles:
            r = [0] * n
            for v in range(n):
                if (pebbles >> v) & 1 or not (um >> v) & 1:
                    continue
                best = 0
                pm = parent_masks[v]
                while pm:
                    low = pm & -pm
                    ru = r[low.bit_length() - 1]
                    if ru > best:
                        best = ru
                    pm ^= low
                r[v] = best + 1
            for s in sink_list:
                if not (pebbles >> s) & 1 and r[s] > rounds_lb:
                    rounds_lb = r[s]
        return adds_lb if adds_lb > rounds_lb else rounds_lb

    start = 0
    best_g: dict[int, int] = {start: 0}
    um0 = useful_mask(start)
    heap: list[tuple[int, int, int]] = [(heuristic(start, um0), 0, start)]
    while heap:
        f, g, pebbles = heapq.heappop(heap)
        if pebbles & sinks_mask == sinks_mask:
            return g
        if g > best_g.get(pebbles, g):
            continue
        um = useful_mask(pebbles)
        # Legal, useful placements.
        addable = 0
        cand = um & ~pebbles
        c = cand
        while c:
            low = c & -c
            v = low.bit_length() - 1
            if parent_masks[v] & ~pebbles == 0:
                addable |= low
            c ^= low
        if addable == 0:
            continue
        a = addable
        while a:  # non-empty submasks of addable
            parents_a = 0
            aa = a
            while aa:
                low = aa & -aa
                parents_a |= parent_masks[low.bit_length() - 1]
                aa ^= low
            after = pebbles | a
            um_after = useful_mask(after) if a & sinks_mask else um
            forced = pebbles & ~um_after & nonsink
            pool = parents_a & pebbles & um_after & nonsink
            drop = pool
            while True:  # all submasks of pool, empty included
                nxt = after & ~(forced | drop)
                g2 = g + bin(nxt).count("1")
                old = best_g.get(nxt)
                if old is None or g2 < old:
                    if old is None and len(best_g) >= state_cap:
                        raise CapExceeded(
                            f"exact pebbling search exceeded {state_cap} states"
                        )
                    best_g[nxt] = g2
                    # Sinks are never dropped, so um_after is the useful mask
                    # of nxt as well.
                    heapq.heappush(heap, (g2 + heuristic(nxt, um_after), g2, nxt))
                if drop == 0:
                    break
                drop = (drop - 1) & pool
            a = (a - 1) & addable
    raise ValueError("graph has no legal complete pebbling (malformed input)")


def min_depth_bits(
    n: int,
    parent_masks: list[int],
    budget: int,
    target: int,
    work_cap: int = 50_000_000,
) -> tuple[bool, int]:
    """Decide: can removing <= budget nodes cut every path of length >= target?

    Removal detaches nodes (edges through them vanish).  Returns
    (reducible, witness_mask) where reducible means depth(G - S) < target for
    the witnessed S.  Branch-and-bound on a shortest critical path: any
    successful S must hit every path of exactly `target` edges, so branching
    over one such path's target+1 nodes is complete.
    """
    _check_bits(n)
    if target <= 0:
        return (False, 0)  # depth < 0 impossible; depth < target<=0 unsatisfiable

    work = [0]

    def longest_path_suffix(blocked: int) -> tuple[int, list[int]]:
        """Depth of G - blocked and the last `target+1` nodes of a crit path."""
        dist = [-1] * n
        best_v = -1
        best_d = -1
        for v in range(n):
            if (blocked >> v) & 1:
                continue
            d = 0
            pm = parent_masks[v]
            while pm:
                low = pm & -pm
                du = dist[low.bit_length() - 1]
                if du >= d:
                    d = du + 1
                pm ^= low
            dist[v] = d
            if d > best_d:
                best_d = d
                best_v = v
        if best_d < target:
            return best_d, []
        # Walk back along a critical path; keep the last target+1 nodes.
        path = [best_v]
        v = best_v
        d = best_d
        while len(path) < target + 1:
            pm = parent_masks[v]
            while pm:
                low = pm & -pm
                u = low.bit_length() - 1
                if not (blocked >> u) & 1 and dist[u] == d - 1:
                    path.append(u)
                    v = u
                    d -= 1
                    break
                pm ^= low
        return best_d, path

    memo: dict[int, int] = {}  # blocked -> max budget known to fail

    def rec(blocked: int, left: int) -> int | None:
        work[0] += 1
        if work[0] > work_cap:
            raise CapExceeded(f"depth-reduction search exceeded {work_cap} nodes of work")
        d, path = longest_path_suffix(blocked)
        if d < target:
            return blocked
        if left == 0:
            return None
        seen = memo.get(blocked, -1)
        if seen >= left:
            return None
        # Even an ideal split of the remaining budget cannot get below target?
        # Removing b nodes from a path of d+1 nodes leaves a run of at least
        # ceil((d+1-b)/(b+1)) nodes, i.e. depth >= that - 1.
        runs = -(-(d + 1 - left) // (left + 1))
        if runs - 1 >= target:
            memo[blocked] = left
            return None
        for v in path:
            res = rec(blocked | (1 << v), left - 1)
            if res is not None:
                return res
        memo[blocked] = left
        return None

    witness = rec(0, budget)
    if witness is None:
        return (False, 0)
    return (True, witness)


def count_depth_ge_bits(n: int, parent_masks: list[int], blocked_mask: int,
                        d: int) -> int:
    """Count non-blocked nodes whose longest incoming path has >= d edges."""
    _check_bits(n)
    dist = [-1] * n
    count = 0
    for v in range(n):
        if (blocked_mask >> v) & 1:
            continue
        best = 0
        pm = parent_masks[v]
        while pm:
            low = pm & -pm
            du = dist[low.bit_length() - 1]
            if du >= best:
                best = du + 1
            pm ^= low
        dist[v] = best
        if best >= d:
            count += 1
    return count


def depths_arr(indptr, parents, blocked) -> "object":
    """Longest-path-ending-here for array graphs; -1 on blocked nodes.

    indptr/parents form a CSR of parent lists over 0-indexed topological ids;
    blocked is a uint8 array.  Returns a list (the compiled twin returns a
    numpy array; callers treat both as sequences).
    """
    n = len(indptr) - 1
    dist = [-1] * n
    for v in range(n):
        if blocked[v]:
            continue
        best = 0
        for k in range(indptr[v], indptr[v + 1]):
            du = dist[parents[k]]
            if du >= best:
                best = du + 1
        dist[v] = best
    return dist
