"""Verifiers and adversarial estimators for graph hardness properties.

Covers depth-robustness (plain and fractional), ancestral robustness, local
expansion, good nodes, and Monte Carlo interval hardness.  Every check comes
in an exhaustive flavor (complete decision, feasible only for small graphs
and guarded by explicit caps) plus one-sided greedy/sampled falsifiers.  A
"certified" verdict is only ever produced by a complete enumeration; the
heuristic modes can falsify with a witness or return "inconclusive", never
certify.
"""

from __future__ import annotations

import bisect
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import kernels
from .errors import CapExceeded
from .graphs import Dag, ancestors, ancestors_subgraph, depths
from .pebble import cc_exact
from .util import derive_rng

CERTIFIED = "certified"
FALSIFIED = "falsified"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class RobustnessReport:
    """Outcome of one property check.

    `witness` is only set when verdict == "falsified" and always re-validates:
    it is the removal set / interval pair that genuinely violates the
    property.  `details` carries measured numbers (surviving depth, counts,
    trial/seed bookkeeping) for reports and regression baselines.
    """

    prop: str
    params: dict
    verdict: str
    method: str
    witness: object | None = None
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict == CERTIFIED

    def to_dict(self) -> dict:
        return {
            "property": self.prop,
            "params": dict(self.params),
            "verdict": self.verdict,
            "method": self.method,
            "witness": _jsonable(self.witness),
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    if isinstance(obj, tuple):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, list):
        return [_jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    return obj


def _parent_masks(g: Dag) -> list[int]:
    pm = [0] * g.n
    for v in range(1, g.n + 1):
        for u in g.parents(v):
            pm[v - 1] |= 1 << (u - 1)
    return pm


def _to_mask(nodes) -> int:
    m = 0
    for v in nodes:
        m |= 1 << (v - 1)
    return m


def _from_mask(mask: int) -> set[int]:
    out = set()
    v = 1
    while mask:
        if mask & 1:
            out.add(v)
        mask >>= 1
        v += 1
    return out


def _ceil_frac(x: float, k: int) -> int:
    """ceil(x*k) with x treated as the rational it was meant to be."""
    fx = Fraction(x).limit_denominator(10**9)
    return -((-fx.numerator * k) // fx.denominator)


def _rng_of(seed) -> random.Random:
    if isinstance(seed, random.Random):
        return seed
    return derive_rng(seed if seed is not None else 0, "robust")


# ---------------------------------------------------------------------------
# depth-robustness


def depth_frontier(g: Dag, e_max: int | None = None,
                   work_cap: int = 50_000_000) -> list[int]:
    """Worst-case surviving depth d*(e) for each removal budget e = 0..e_max.

    d*(e) = min over |S| <= e of depth(G detached from S); the graph is
    (e, d)-depth-robust exactly when d <= d*(e).  Exact via branch-and-bound;
    requires n <= 63.
    """
    if e_max is None:
        e_max = g.n - 1
    pm = _parent_masks(g)
    out = [_depth_bits(g.n, pm, 0)]
    for e in range(1, e_max + 1):
        lo, hi = 0, out[-1]
        while lo < hi:
            mid = (lo + hi + 1) // 2
            reducible, _ = kernels.min_depth_bits(g.n, pm, e, mid, work_cap)
            if reducible:
                hi = mid - 1
            else:
                lo = mid
        out.append(lo)
    return out


def _depth_bits(n: int, pm: list[int], blocked: int) -> int:
    best = 0
    dist = [-1] * n
    for v in range(n):
        if (blocked >> v) & 1:
            continue
        d = 0
        m = pm[v]
        while m:
            low = m & -m
            du = dist[low.bit_length() - 1]
            if du >= d:
                d = du + 1
            m ^= low
        dist[v] = d
        if d > best:
            best = d
    return best


def check_depth_robust(g: Dag, e: int, d: int, mode: str = "exhaustive", *,
                       seed=None, trials: int = 200,
                       work_cap: int = 50_000_000) -> RobustnessReport:
    """Is every removal of <= e nodes survived by a path of length d?

    Exhaustive mode decides the property exactly (branch-and-bound over
    removal sets, complete; n <= 63, bounded work -> CapExceeded on refusal).
    Greedy mode runs an adversary that repeatedly deletes the node lying on
    the most maximum-length paths; sampled mode draws random removal sets.
    Both heuristics report a falsification witness or "inconclusive".
    """
    if not 0 <= e < g.n:
        raise ValueError(f"need 0 <= e < n, got e={e}, n={g.n}")
    if d < 0:
        raise ValueError(f"need d >= 0, got {d}")
    params = {"e": e, "d": d}
    prop = "depth-robust"

    if mode == "exhaustive":
        pm = _parent_masks(g)
        reducible, witness_mask = kernels.min_depth_bits(g.n, pm, e, d, work_cap)
        if not reducible:
            return RobustnessReport(prop, params, CERTIFIED, mode)
        witness = _from_mask(witness_mask)
        surv = _depth_bits(g.n, pm, witness_mask)
        return RobustnessReport(prop, params, FALSIFIED, mode, witness,
                                {"surviving_depth": surv})
    if mode == "greedy":
        removed, surv = greedy_depth_adversary(g, e, stop_below=d)
        if surv < d:
            return RobustnessReport(prop, params, FALSIFIED, mode, set(removed),
                                    {"surviving_depth": surv})
        return RobustnessReport(prop, params, INCONCLUSIVE, mode,
                                details={"surviving_depth": surv,
                                         "removed": sorted(removed)})
    if mode == "sampled":
        rng = _rng_of(seed)
        pm = _parent_masks(g) if g.n <= 63 else None
        best_depth, best_s = None, None
        for _ in range(trials):
            s = set(rng.sample(range(1, g.n + 1), e)) if e else set()
            if pm is not None:
                surv = _depth_bits(g.n, pm, _to_mask(s))
            else:
                surv = max(depths(g, s)[1:], default=0)
            if best_depth is None or surv < best_depth:
                best_depth, best_s = surv, s
            if surv < d:
                return RobustnessReport(prop, params, FALSIFIED, mode, s,
                                        {"surviving_depth": surv,
                                         "trials": trials})
        return RobustnessReport(prop, params, INCONCLUSIVE, mode,
                                details={"best_depth": best_depth,
                                         "best_set": sorted(best_s or ()),
                                         "trials": trials})
    raise ValueError(f"unknown mode {mode!r}")


def greedy_depth_adversary(g: Dag, budget: int,
                           stop_below: int | None = None) -> tuple[list[int], int]:
    """Remove up to `budget` nodes, each time the one on the most
    maximum-length paths (ties to the smallest id).  Returns the removal
    order and the surviving depth.  One-sided: a small result is a genuine
    upper bound on d*(budget), a large one proves nothing.
    """
    removed: list[int] = []
    blocked: set[int] = set()
    surv = 0
    for _ in range(budget):
        down = depths(g, blocked)
        surv = max(down[1:], default=0)
        if stop_below is not None and surv < stop_below:
            return removed, surv
        if surv == 0:
            break
        up = [0] * (g.n + 1)
        for v in range(g.n, 0, -1):
            if v in blocked:
                up[v] = -1
                continue
            best = 0
            for c in g.children(v):
                if c not in blocked and up[c] >= best:
                    best = up[c] + 1
            up[v] = best
        ways_down = [0] * (g.n + 1)
        ways_up = [0] * (g.n + 1)
        for v in range(1, g.n + 1):
            if v in blocked:
                continue
            if down[v] == 0:
                ways_down[v] = 1
            else:
                ways_down[v] = sum(ways_down[u] for u in g.parents(v)
                                   if u not in blocked and down[u] == down[v] - 1)
        for v in range(g.n, 0, -1):
            if v in blocked:
                continue
            if up[v] == 0:
                ways_up[v] = 1
            else:
                ways_up[v] = sum(ways_up[c] for c in g.children(v)
                                 if c not in blocked and up[c] == up[v] - 1)
        best_v, best_key = 0, (-1, -1)
        for v in range(1, g.n + 1):
            if v in blocked or down[v] + up[v] != surv:
                continue
            # primary: kills the most maximum-length paths; tie-break: sits
            # nearest the middle of one (splitting beats trimming an end)
            key = (ways_down[v] * ways_up[v], min(down[v], up[v]))
            if key > best_key:
                best_v, best_key = v, key
        if best_v == 0:
            break
        blocked.add(best_v)
        removed.append(best_v)
    surv = max(depths(g, blocked)[1:], default=0)
    return removed, surv


# ---------------------------------------------------------------------------
# fractional depth-robustness


def _count_depth_ge(g: Dag, pm: list[int] | None, s: set[int], d: int) -> int:
    """Surviving nodes of depth >= d in G - S."""
    if pm is not None:
        return kernels.count_depth_ge_bits(g.n, pm, _to_mask(s), d)
    dist = depths(g, s)
    return sum(1 for v in range(1, g.n + 1) if dist[v] >= d)


def check_fractional_dr(g: Dag, e: int, d: int, f: float,
                        mode: str = "exhaustive", *, seed=None,
                        trials: int = 200,
                        subset_cap: int = 2_000_000) -> RobustnessReport:
    """Does every removal of <= e nodes leave >= f*n nodes of depth >= d?"""
    if not 0 <= e < g.n:
        raise ValueError(f"need 0 <= e < n, got e={e}, n={g.n}")
    if d < 0 or not 0 <= f <= 1:
        raise ValueError(f"bad parameters d={d}, f={f}")
    params = {"e": e, "d": d, "f": f}
    prop = "fractional-dr"
    pm = _parent_masks(g) if g.n <= 63 else None
    threshold = f * g.n - 1e-9

    def verdict_for(s: set[int]):
        return _count_depth_ge(g, pm, s, d)

    if mode == "exhaustive":
        total = sum(math.comb(g.n, k) for k in range(0, e + 1))
        if total > subset_cap:
            raise CapExceeded(
                f"{total} removal sets exceed the cap of {subset_cap}")
        worst_count, worst_s = None, None
        for k in range(0, e + 1):
            for combo in itertools.combinations(range(1, g.n + 1), k):
                s = set(combo)
                count = verdict_for(s)
                if worst_count is None or count < worst_count:
                    worst_count, worst_s = count, s
                if count < threshold:
                    return RobustnessReport(prop, params, FALSIFIED, mode, s,
                                            {"count": count})
        return RobustnessReport(prop, params, CERTIFIED, mode,
                                details={"worst_count": worst_count,
                                         "worst_set": sorted(worst_s or ())})
    if mode == "greedy":
        s: set[int] = set()
        for _ in range(e):
            count_now = verdict_for(s)
            if count_now < threshold:
                break
            best_v, best_count = 0, count_now
            for v in range(1, g.n + 1):
                if v in s:
                    continue
                c = verdict_for(s | {v})
                if c < best_count:
                    best_v, best_count = v, c
            if best_v == 0:
                break
            s.add(best_v)
        count = verdict_for(s)
        if count < threshold:
            return RobustnessReport(prop, params, FALSIFIED, mode, s,
                                    {"count": count})
        return RobustnessReport(prop, params, INCONCLUSIVE, mode,
                                details={"count": count, "removed": sorted(s)})
    if mode == "sampled":
        rng = _rng_of(seed)
        worst_count, worst_s = None, None
        for _ in range(trials):
            s = set(rng.sample(range(1, g.n + 1), e)) if e else set()
            count = verdict_for(s)
            if worst_count is None or count < worst_count:
                worst_count, worst_s = count, s
            if count < threshold:
                return RobustnessReport(prop, params, FALSIFIED, mode, s,
                                        {"count": count, "trials": trials})
        return RobustnessReport(prop, params, INCONCLUSIVE, mode,
                                details={"worst_count": worst_count,
                                         "worst_set": sorted(worst_s or ()),
                                         "trials": trials})
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# ancestral robustness


def cc_lower_bound(g: Dag, exact_cap: int = 16,
                   state_cap: int = 2_000_000) -> int:
    """Sound lower bound on the pebbling cost of g.

    Exact when the graph is small enough to search; otherwise the max of the
    node count (every node is an ancestor of a sink, so each costs at least
    one placement) and the best e*d(e)+1 over the depth frontier (depth-robust
    graphs are expensive to pebble).
    """
    if g.n == 0:
        return 0
    if g.n <= exact_cap:
        return cc_exact(g, node_cap=exact_cap, state_cap=state_cap)
    bound = g.n
    if g.n <= 63:
        frontier = depth_frontier(g)
        for e, dd in enumerate(frontier):
            if e * dd + 1 > bound:
                bound = e * dd + 1
    return bound


def _ar_count(g: Dag, s: set[int], C: int, exact: bool,
              exact_cap: int, state_cap: int) -> tuple[int, dict]:
    """Count nodes v outside S whose ancestor subgraph in G - S costs >= C."""
    count = 0
    per_node: dict[int, int] = {}
    for v in range(1, g.n + 1):
        if v in s:
            continue
        sub, _ = ancestors_subgraph(g, v, s)
        if exact:
            cc = cc_exact(sub, node_cap=exact_cap, state_cap=state_cap)
        else:
            cc = cc_lower_bound(sub, exact_cap=exact_cap, state_cap=state_cap)
        per_node[v] = cc
        if cc >= C:
            count += 1
    return count, per_node


def check_ancestral_robust(g: Dag, a: int, C: int, f: float,
                           mode: str = "exhaustive", *, seed=None,
                           trials: int = 50, exact_cap: int = 16,
                           state_cap: int = 2_000_000,
                           subset_cap: int = 200_000) -> RobustnessReport:
    """Does every removal of <= a nodes leave >= f*n nodes whose ancestor
    subgraphs cost >= C to pebble?

    Exhaustive mode uses exact pebbling costs (refusing with CapExceeded when
    an ancestor subgraph outgrows `exact_cap`); bounded mode enumerates the
    same removal sets but scores nodes with the sound cc lower bound, so it
    can certify conservatively but never falsify; greedy/sampled modes pick
    removal sets heuristically and use exact costs, so they can falsify with
    a witness but never certify.
    """
    if not 0 <= a < g.n:
        raise ValueError(f"need 0 <= a < n, got a={a}, n={g.n}")
    if C < 0 or not 0 <= f <= 1:
        raise ValueError(f"bad parameters C={C}, f={f}")
    params = {"a": a, "C": C, "f": f}
    prop = "ancestral-robust"
    threshold = f * g.n - 1e-9

    if mode in ("exhaustive", "bounded"):
        exact = mode == "exhaustive"
        total = sum(math.comb(g.n, k) for k in range(0, a + 1))
        if total > subset_cap:
            raise CapExceeded(
                f"{total} removal sets exceed the cap of {subset_cap}")
        worst_count, worst_s = None, None
        for k in range(0, a + 1):
            for combo in itertools.combinations(range(1, g.n + 1), k):
                s = set(combo)
                count, per_node = _ar_count(g, s, C, exact, exact_cap, state_cap)
                if worst_count is None or count < worst_count:
                    worst_count, worst_s = count, s
                if count < threshold:
                    if exact:
                        return RobustnessReport(
                            prop, params, FALSIFIED, mode, s,
                            {"count": count, "cc_by_node": per_node})
                    return RobustnessReport(
                        prop, params, INCONCLUSIVE, mode,
                        details={"count_under_bound": count,
                                 "near_witness": sorted(s)})
        return RobustnessReport(prop, params, CERTIFIED, mode,
                                details={"worst_count": worst_count,
                                         "worst_set": sorted(worst_s or ())})
    if mode in ("greedy", "sampled"):
        rng = _rng_of(seed)
        candidates: list[set[int]] = []
        if mode == "greedy":
            s: set[int] = set()
            for _ in range(a):
                # hit the node that sits inside the most ancestor closures
                membership = [0] * (g.n + 1)
                for v in range(1, g.n + 1):
                    if v in s:
                        continue
                    for u in ancestors(g, v, s) | {v}:
                        membership[u] += 1
                best_v = max(range(1, g.n + 1),
                             key=lambda v: (membership[v], -v))
                if membership[best_v] == 0:
                    break
                s.add(best_v)
            candidates.append(s)
        else:
            for _ in range(trials):
                candidates.append(
                    set(rng.sample(range(1, g.n + 1), a)) if a else set())
        worst_count, worst_s = None, None
        for s in candidates:
            try:
                count, per_node = _ar_count(g, s, C, True, exact_cap, state_cap)
            except CapExceeded:
                return RobustnessReport(
                    prop, params, INCONCLUSIVE, mode,
                    details={"note": "ancestor subgraph too large for exact "
                                     "cost; cannot soundly falsify"})
            if worst_count is None or count < worst_count:
                worst_count, worst_s = count, s
            if count < threshold:
                return RobustnessReport(prop, params, FALSIFIED, mode, s,
                                        {"count": count,
                                         "cc_by_node": per_node})
        return RobustnessReport(prop, params, INCONCLUSIVE, mode,
                                details={"worst_count": worst_count,
                                         "worst_set": sorted(worst_s or ())})
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# local expansion


def _window_masks(g: Dag, v: int, k: int) -> list[int]:
    """For each of the k nodes in [v-k+1..v], a bitmask over [v+1..v+k] of its
    out-neighbors inside that window."""
    out = []
    for x in range(v - k + 1, v + 1):
        m = 0
        for c in g.children(x):
            if v + 1 <= c <= v + k:
                m |= 1 << (c - v - 1)
        out.append(m)
    return out


def check_local_expansion(g: Dag, delta: float, mode: str = "exhaustive", *,
                          k_cap: int = 12, seed=None, trials: int = 10_000,
                          work_cap: int = 2_000_000) -> RobustnessReport:
    """For every node v and radius k, must every pair of ceil(delta*k)-sized
    sets (A from the k nodes ending at v, B from the k nodes after v) be
    joined by an edge?

    Exhaustive mode checks every A exactly: the pair (A, B) can avoid edges
    iff the window after v has ceil(delta*k) nodes outside A's neighborhood,
    so one pass over A-subsets decides the property.  Radii are capped at
    k_cap (the general problem embeds biclique search); the report records
    whether the cap truncated anything.
    """
    if not 0 < delta < 1:
        raise ValueError(f"need delta in (0,1), got {delta}")
    params = {"delta": delta, "k_cap": k_cap}
    prop = "local-expansion"

    if mode == "exhaustive":
        work = 0
        truncated = False
        for v in range(1, g.n + 1):
            top = min(v, g.n - v)
            if top > k_cap:
                truncated = True
                top = k_cap
            for k in range(1, top + 1):
                need = _ceil_frac(delta, k)
                if need <= 0 or need > k:
                    continue
                masks = _window_masks(g, v, k)
                all_b = (1 << k) - 1
                for a_idx in itertools.combinations(range(k), need):
                    work += 1
                    if work > work_cap:
                        raise CapExceeded(
                            f"local-expansion enumeration exceeded {work_cap} "
                            f"A-sets")
                    covered = 0
                    for i in a_idx:
                        covered |= masks[i]
                    free = all_b & ~covered
                    if bin(free).count("1") >= need:
                        a_set = {v - k + 1 + i for i in a_idx}
                        b_set = set()
                        m = free
                        while len(b_set) < need:
                            low = m & -m
                            b_set.add(v + 1 + low.bit_length() - 1)
                            m ^= low
                        return RobustnessReport(
                            prop, params, FALSIFIED, mode,
                            (v, k, a_set, b_set), {})
        return RobustnessReport(prop, params, CERTIFIED, mode,
                                details={"k_truncated": truncated})
    if mode == "sampled":
        rng = _rng_of(seed)
        eligible = [v for v in range(1, g.n + 1) if min(v, g.n - v) >= 1]
        if not eligible:
            return RobustnessReport(prop, params, CERTIFIED, mode,
                                    details={"note": "no testable windows"})
        for t in range(trials):
            v = rng.choice(eligible)
            k = rng.randint(1, min(v, g.n - v))
            need = _ceil_frac(delta, k)
            if need <= 0 or need > k:
                continue
            a_set = set(rng.sample(range(v - k + 1, v + 1), need))
            b_set = set(rng.sample(range(v + 1, v + k + 1), need))
            if not any(g.has_edge(x, y) for x in a_set for y in b_set):
                return RobustnessReport(prop, params, FALSIFIED, mode,
                                        (v, k, a_set, b_set),
                                        {"trials_used": t + 1})
        return RobustnessReport(prop, params, INCONCLUSIVE, mode,
                                details={"trials": trials})
    if mode == "greedy":
        # Adversarial A: the window nodes with the fewest out-edges into the
        # successor window; then the exact free-B test.
        for v in range(1, g.n + 1):
            top = min(v, g.n - v, k_cap)
            for k in range(1, top + 1):
                need = _ceil_frac(delta, k)
                if need <= 0 or need > k:
                    continue
                masks = _window_masks(g, v, k)
                order = sorted(range(k), key=lambda i: bin(masks[i]).count("1"))
                a_idx = order[:need]
                covered = 0
                for i in a_idx:
                    covered |= masks[i]
                free = ((1 << k) - 1) & ~covered
                if bin(free).count("1") >= need:
                    a_set = {v - k + 1 + i for i in a_idx}
                    b_set = set()
                    m = free
                    while len(b_set) < need:
                        low = m & -m
                        b_set.add(v + 1 + low.bit_length() - 1)
                        m ^= low
                    return RobustnessReport(prop, params, FALSIFIED, mode,
                                            (v, k, a_set, b_set), {})
        return RobustnessReport(prop, params, INCONCLUSIVE, mode)
    raise ValueError(f"unknown mode {mode!r}")


def validate_expansion_witness(g: Dag, witness) -> bool:
    """Re-check a falsification witness (v, k, A, B): no edge from A to B."""
    _v, _k, a_set, b_set = witness
    return not any(g.has_edge(x, y) for x in a_set for y in b_set)


# ---------------------------------------------------------------------------
# good nodes


def good_nodes(g: Dag, s, c: float) -> set[int]:
    """Nodes that keep a c fraction of survivors in every window they anchor.

    v is c-good when every trailing window [v-r+1..v] and every leading
    window [v+1..v+r] contains at most (1-c)*r members of S -- that is, at
    least c*r nodes of the window survive the removal of S.  Members of S
    are never good (their trailing window of radius 1 is fully removed).

    At c = 1/3 at least n - 2|S| nodes are good for any S: each side of a
    member can stay over-dense for at most 1/(1-c) (trailing) resp. c/(1-c)
    (leading) positions, which sums to (1+c)/(1-c) = 2 nodes lost per
    member, with equality for clustered S.

    The counts only change at members of S, so each side is checked at those
    jump radii alone.
    """
    if not 0 < c < 1:
        raise ValueError(f"need c in (0,1), got {c}")
    s_sorted = sorted(set(s))
    n = g.n
    limit = 1.0 - c
    out: set[int] = set()
    for v in range(1, n + 1):
        ok = True
        # trailing windows: S members at positions p <= v, nearest first;
        # the j-th nearest enters at radius r = v - p + 1 where the count is j
        hi = bisect.bisect_right(s_sorted, v)
        j = 0
        for idx in range(hi - 1, -1, -1):
            j += 1
            r = v - s_sorted[idx] + 1
            if j > limit * r + 1e-9:
                ok = False
                break
        if ok:
            lo = bisect.bisect_right(s_sorted, v)
            j = 0
            for idx in range(lo, len(s_sorted)):
                j += 1
                r = s_sorted[idx] - v
                if j > limit * r + 1e-9:
                    ok = False
                    break
        if ok:
            out.add(v)
    return out


# ---------------------------------------------------------------------------
# Monte Carlo interval hardness


def sampled_interval_hardness(g: Dag, e: int, C: int, f: float, k: int,
                              trials: int, *, seed=None) -> dict:
    """Estimate how often a greedy adversary can make k uniform challenges
    cheap: the fraction of draws I for which some removal set of size <= e
    leaves the joint ancestor closure of I with pebbling cost (lower bound:
    closure size) below C.  Reports the frequency with a Wilson interval.
    """
    rng = _rng_of(seed)
    hits = 0
    for _ in range(trials):
        challenges = [rng.randint(1, g.n) for _ in range(k)]
        s: set[int] = set()
        closure = _joint_closure(g, challenges, s)
        for _ in range(e):
            if len(closure) < C:
                break
            best_v, best_size = 0, len(closure)
            for u in closure:
                size = len(_joint_closure(g, challenges, s | {u}))
                if size < best_size:
                    best_v, best_size = u, size
            if best_v == 0:
                break
            s.add(best_v)
            closure = _joint_closure(g, challenges, s)
        if len(closure) < C:
            hits += 1
    est = hits / trials if trials else 0.0
    lo, hi = _wilson(hits, trials)
    return {
        "estimate": est,
        "wilson_low": lo,
        "wilson_high": hi,
        "hits": hits,
        "trials": trials,
        "params": {"e": e, "C": C, "f": f, "k": k},
        "seed": seed if not isinstance(seed, random.Random) else None,
    }


def _joint_closure(g: Dag, challenges, s: set[int]) -> set[int]:
    out: set[int] = set()
    for r in challenges:
        if r in s:
            continue
        out.add(r)
        out |= ancestors(g, r, s)
    return out


def _wilson(hits: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    p = hits / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials**2)) / denom
    return (max(0.0, center - half), min(1.0, center + half))
