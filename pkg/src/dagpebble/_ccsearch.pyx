# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of `_ccsearch_py`: exact pebbling cc, depth-reduction search,
depth DP.  Same signatures and semantics; see the pure module for the
algorithmic commentary.  Bit kernels take parent bitmasks over 0-indexed
topological ids (<= 63 nodes); `depths_arr` takes CSR arrays.
"""

import heapq

import numpy as np

from .errors import CapExceeded

from libc.stdint cimport int64_t, uint64_t

IMPLEMENTATION = "compiled"

cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil
    int __builtin_popcountll(unsigned long long) nogil

cdef int _MAX_BITS = 63


cdef uint64_t _useful(int nsinks, int* sink_ids, uint64_t* anc, uint64_t peb) nogil:
    cdef uint64_t um = 0
    cdef int k, s
    for k in range(nsinks):
        s = sink_ids[k]
        if not (peb >> s) & 1:
            um |= anc[s]
    return um


cdef int _heuristic(int n, uint64_t* pm, int nsinks, int* sink_ids,
                    uint64_t sinks_mask, uint64_t peb, uint64_t um,
                    int* r) nogil:
    # max(#exposed-ancestors, remaining-depth); mirrors the pure twin.
    cdef uint64_t exposed = 0, frontier, nxt, f, low, pmv
    cdef int adds_lb, rounds_lb, v, best, k, s, u
    frontier = um & ~peb & sinks_mask
    while frontier:
        exposed |= frontier
        nxt = 0
        f = frontier
        while f:
            low = f & (~f + 1)
            nxt |= pm[__builtin_ctzll(low)]
            f ^= low
        frontier = nxt & ~peb & ~exposed
    adds_lb = __builtin_popcountll(exposed)
    rounds_lb = 0
    if um & ~peb:
        for v in range(n):
            if (peb >> v) & 1 or not (um >> v) & 1:
                r[v] = 0
                continue
            best = 0
            pmv = pm[v]
            while pmv:
                low = pmv & (~pmv + 1)
                u = __builtin_ctzll(low)
                if r[u] > best:
                    best = r[u]
                pmv ^= low
            r[v] = best + 1
        for k in range(nsinks):
            s = sink_ids[k]
            if not (peb >> s) & 1 and r[s] > rounds_lb:
                rounds_lb = r[s]
    return adds_lb if adds_lb > rounds_lb else rounds_lb


def cc_exact_bits(int n, parent_masks, object sinks_mask_obj,
                  int64_t state_cap=2_000_000):
    """Minimum total pebble count over all legal complete pebblings."""
    if n > _MAX_BITS:
        raise CapExceeded(f"bitmask kernels handle at most {_MAX_BITS} nodes, got {n}")
    if n == 0:
        return 0
    cdef uint64_t sinks_mask = <uint64_t> sinks_mask_obj
    if sinks_mask == 0:
        raise ValueError("sinks_mask must be non-empty")

    cdef uint64_t pm[64]
    cdef uint64_t anc[64]
    cdef int sink_ids[64]
    cdef int rbuf[64]
    cdef int v, nsinks = 0
    cdef uint64_t p, low
    for v in range(n):
        pm[v] = <uint64_t> parent_masks[v]
    for v in range(n):
        anc[v] = (<uint64_t> 1) << v
        p = pm[v]
        while p:
            low = p & (~p + 1)
            anc[v] |= anc[__builtin_ctzll(low)]
            p ^= low
        if (sinks_mask >> v) & 1:
            sink_ids[nsinks] = v
            nsinks += 1
    cdef uint64_t nonsink = ~sinks_mask

    cdef uint64_t pebbles, um, um_after, addable, cand
    cdef uint64_t a, aa, after, parents_a, forced, pool, drop, nxt
    cdef int g, g2, h

    best_g = {0: 0}
    um = _useful(nsinks, sink_ids, anc, 0)
    h = _heuristic(n, pm, nsinks, sink_ids, sinks_mask, 0, um, rbuf)
    heap = [(h, 0, 0)]
    while heap:
        item = heapq.heappop(heap)
        g = <int> item[1]
        pebpy = item[2]
        pebbles = <uint64_t> pebpy
        if pebbles & sinks_mask == sinks_mask:
            return g
        if g > best_g.get(pebpy, g):
            continue
        um = _useful(nsinks, sink_ids, anc, pebbles)
        # Legal, useful placements.
        addable = 0
        cand = um & ~pebbles
        while cand:
            low = cand & (~cand + 1)
            v = __builtin_ctzll(low)
            if pm[v] & ~pebbles == 0:
                addable |= low
            cand ^= low
        if addable == 0:
            continue
        a = addable
        while a:  # non-empty submasks of addable
            parents_a = 0
            aa = a
            while aa:
                low = aa & (~aa + 1)
                parents_a |= pm[__builtin_ctzll(low)]
                aa ^= low
            after = pebbles | a
            if a & sinks_mask:
                um_after = _useful(nsinks, sink_ids, anc, after)
            else:
                um_after = um
            forced = pebbles & ~um_after & nonsink
            pool = parents_a & pebbles & um_after & nonsink
            drop = pool
            while True:  # all submasks of pool, empty included
                nxt = after & ~(forced | drop)
                g2 = g + __builtin_popcountll(nxt)
                nxtpy = nxt
                old = best_g.get(nxtpy)
                if old is None or g2 < <int> old:
                    if old is None and len(best_g) >= state_cap:
                        raise CapExceeded(
                            f"exact pebbling search exceeded {state_cap} states"
                        )
                    best_g[nxtpy] = g2
                    # Sinks are never dropped, so um_after is the useful mask
                    # of nxt as well.
                    h = _heuristic(n, pm, nsinks, sink_ids, sinks_mask,
                                   nxt, um_after, rbuf)
                    heapq.heappush(heap, (g2 + h, g2, nxtpy))
                if drop == 0:
                    break
                drop = (drop - 1) & pool
            a = (a - 1) & addable
    raise ValueError("graph has no legal complete pebbling (malformed input)")


cdef class _DepthSearch:
    cdef uint64_t pm[64]
    cdef int dist[64]
    cdef int n, target
    cdef int64_t work, work_cap
    cdef dict memo

    cdef int longest(self, uint64_t blocked, int* path):
        # Depth of G - blocked; fills path[0..target] with the tail of a
        # critical path (deepest node first) when depth >= target.
        cdef int best_v = -1, best_d = -1, d, v, u, k
        cdef uint64_t p, low
        for v in range(self.n):
            if (blocked >> v) & 1:
                self.dist[v] = -1
                continue
            d = 0
            p = self.pm[v]
            while p:
                low = p & (~p + 1)
                u = __builtin_ctzll(low)
                if self.dist[u] >= d:
                    d = self.dist[u] + 1
                p ^= low
            self.dist[v] = d
            if d > best_d:
                best_d = d
                best_v = v
        if best_d < self.target:
            return best_d
        path[0] = best_v
        k = 1
        v = best_v
        d = best_d
        while k < self.target + 1:
            p = self.pm[v]
            while p:
                low = p & (~p + 1)
                u = __builtin_ctzll(low)
                if not (blocked >> u) & 1 and self.dist[u] == d - 1:
                    path[k] = u
                    k += 1
                    v = u
                    d -= 1
                    break
                p ^= low
        return best_d

    cdef object rec(self, uint64_t blocked, int left):
        cdef int path[64]
        cdef int d, runs, i, a
        self.work += 1
        if self.work > self.work_cap:
            raise CapExceeded(
                f"depth-reduction search exceeded {self.work_cap} nodes of work"
            )
        d = self.longest(blocked, path)
        if d < self.target:
            return blocked
        if left == 0:
            return None
        seen = self.memo.get(blocked, -1)
        if <int> seen >= left:
            return None
        # Removing b nodes from a path of d+1 nodes leaves a run of at least
        # ceil((d+1-b)/(b+1)) nodes, i.e. depth >= that - 1.
        a = d + 1 - left
        runs = (a + left) // (left + 1) if a > 0 else 0
        if runs - 1 >= self.target:
            self.memo[blocked] = left
            return None
        for i in range(self.target + 1):
            res = self.rec(blocked | ((<uint64_t> 1) << path[i]), left - 1)
            if res is not None:
                return res
        self.memo[blocked] = left
        return None


def min_depth_bits(int n, parent_masks, int budget, int target,
                   int64_t work_cap=50_000_000):
    """Decide: can removing <= budget nodes cut every path of length >= target?"""
    if n > _MAX_BITS:
        raise CapExceeded(f"bitmask kernels handle at most {_MAX_BITS} nodes, got {n}")
    if target <= 0:
        return (False, 0)
    cdef _DepthSearch s = _DepthSearch()
    cdef int v
    s.n = n
    s.target = target
    s.work = 0
    s.work_cap = work_cap
    s.memo = {}
    for v in range(n):
        s.pm[v] = <uint64_t> parent_masks[v]
    witness = s.rec(0, budget)
    if witness is None:
        return (False, 0)
    return (True, witness)


def count_depth_ge_bits(int n, parent_masks, object blocked_mask_obj, int d):
    """Count non-blocked nodes whose longest incoming path has >= d edges."""
    if n > _MAX_BITS:
        raise CapExceeded(f"bitmask kernels handle at most {_MAX_BITS} nodes, got {n}")
    cdef uint64_t blocked = <uint64_t> blocked_mask_obj
    cdef uint64_t pm[64]
    cdef int dist[64]
    cdef int v, best, count = 0
    cdef uint64_t p, low
    for v in range(n):
        pm[v] = <uint64_t> parent_masks[v]
    for v in range(n):
        if (blocked >> v) & 1:
            dist[v] = -1
            continue
        best = 0
        p = pm[v]
        while p:
            low = p & (~p + 1)
            if dist[__builtin_ctzll(low)] >= best:
                best = dist[__builtin_ctzll(low)] + 1
            p ^= low
        dist[v] = best
        if best >= d:
            count += 1
    return count


def depths_arr(indptr, parents, blocked):
    """Longest-path-ending-here for CSR array graphs; -1 on blocked nodes."""
    ip_a = np.ascontiguousarray(indptr, dtype=np.int32)
    pa_a = np.ascontiguousarray(parents, dtype=np.int32)
    bl_a = np.ascontiguousarray(blocked, dtype=np.uint8)
    cdef int[:] ip = ip_a
    cdef int[:] pa = pa_a
    cdef unsigned char[:] bl = bl_a
    cdef int n = ip.shape[0] - 1
    out = np.empty(n, dtype=np.int32)
    cdef int[:] dist = out
    cdef int v, k, best, du
    for v in range(n):
        if bl[v]:
            dist[v] = -1
            continue
        best = 0
        for k in range(ip[v], ip[v + 1]):
            du = dist[pa[k]]
            if du >= best:
                best = du + 1
        dist[v] = best
    return out
