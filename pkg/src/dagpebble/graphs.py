"""Directed acyclic graphs with topologically ordered node ids.

Every graph in this package lives on nodes 1..n and every edge (u, v) points
forward (u < v), so node ids double as a topological order.  That invariant
keeps the dynamic-programming passes (depth, reachability) single-sweep and
makes the on-disk format trivially canonical.

Operations that relabel nodes return an identity map (tuple indexed by new id,
value = old id) so callers can translate witnesses back to the original graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class Dag:
    """Immutable DAG on nodes 1..n with all edges oriented low -> high."""

    __slots__ = ("n", "_parents", "_children")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError(f"node count must be >= 0, got {n}")
        self.n = n
        parents: list[list[int]] = [[] for _ in range(n + 1)]
        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if not (1 <= u < v <= n):
                raise ValueError(f"edge ({u}, {v}) violates 1 <= u < v <= {n}")
            if (u, v) in seen:
                continue
            seen.add((u, v))
            parents[v].append(u)
        for lst in parents:
            lst.sort()
        self._parents: tuple[tuple[int, ...], ...] = tuple(tuple(p) for p in parents)
        self._children: tuple[tuple[int, ...], ...] | None = None

    # -- basic accessors ---------------------------------------------------

    def parents(self, v: int) -> tuple[int, ...]:
        return self._parents[v]

    def children(self, v: int) -> tuple[int, ...]:
        if self._children is None:
            ch: list[list[int]] = [[] for _ in range(self.n + 1)]
            for w in range(1, self.n + 1):
                for u in self._parents[w]:
                    ch[u].append(w)
            self._children = tuple(tuple(c) for c in ch)
        return self._children[v]

    def nodes(self) -> range:
        return range(1, self.n + 1)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges sorted by (target, source)."""
        for v in range(1, self.n + 1):
            for u in self._parents[v]:
                yield (u, v)

    @property
    def m(self) -> int:
        return sum(len(self._parents[v]) for v in range(1, self.n + 1))

    def indegree(self, v: int) -> int:
        return len(self._parents[v])

    def max_indegree(self) -> int:
        return max((len(self._parents[v]) for v in range(1, self.n + 1)), default=0)

    def sources(self) -> list[int]:
        return [v for v in range(1, self.n + 1) if not self._parents[v]]

    def sinks(self) -> list[int]:
        has_child = [False] * (self.n + 1)
        for v in range(1, self.n + 1):
            for u in self._parents[v]:
                has_child[u] = True
        return [v for v in range(1, self.n + 1) if not has_child[v]]

    def has_edge(self, u: int, v: int) -> bool:
        return v <= self.n and u in self._parents[v]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return self.n == other.n and self._parents == other._parents

    def __hash__(self) -> int:
        return hash((self.n, self._parents))

    def __repr__(self) -> str:
        return f"Dag(n={self.n}, m={self.m})"


# -- depth and reachability ------------------------------------------------


def depths(g: Dag, blocked: frozenset[int] | set[int] = frozenset()) -> list[int]:
    """Longest path length (in edges) ending at each node, avoiding `blocked`.

    Returns a 0-indexed-by-node list of length n+1; entry 0 is unused and
    blocked nodes get -1 (no path may touch them, themselves included).
    """
    dist = [-1] * (g.n + 1)
    for v in range(1, g.n + 1):
        if v in blocked:
            continue
        best = 0
        for u in g.parents(v):
            du = dist[u]
            if du >= best:
                best = du + 1
        dist[v] = best
    return dist


def depth(g: Dag, blocked: frozenset[int] | set[int] = frozenset()) -> int:
    """Longest path length in edges (0 for an edgeless or fully blocked graph)."""
    d = depths(g, blocked)
    return max(max(d[1:], default=0), 0)


def depth_of(g: Dag, v: int, blocked: frozenset[int] | set[int] = frozenset()) -> int:
    """Longest path (in edges) ending at v avoiding `blocked`; -1 if v blocked."""
    return depths(g, blocked)[v]


def ancestors(g: Dag, v: int, blocked: frozenset[int] | set[int] = frozenset()) -> set[int]:
    """Nodes with a path to v (v excluded) avoiding `blocked` entirely.

    If v itself is blocked the answer is empty.
    """
    if v in blocked:
        return set()
    out: set[int] = set()
    stack = [u for u in g.parents(v) if u not in blocked]
    while stack:
        u = stack.pop()
        if u in out:
            continue
        out.add(u)
        for w in g.parents(u):
            if w not in out and w not in blocked:
                stack.append(w)
    return out


def ancestors_subgraph(
    g: Dag, v: int, blocked: frozenset[int] | set[int] = frozenset()
) -> tuple[Dag, tuple[int, ...]]:
    """Induced subgraph on ancestors(v) + v, relabeled 1..k order-preservingly.

    Returns (subgraph, to_old) with to_old[new_id - 1] = old_id.
    """
    keep = ancestors(g, v, blocked)
    if v not in blocked:
        keep.add(v)
    return induced_subgraph(g, keep)


def induced_subgraph(g: Dag, keep: Iterable[int]) -> tuple[Dag, tuple[int, ...]]:
    """Induced subgraph on `keep`, relabeled 1..k preserving id order."""
    old_ids = sorted(set(keep))
    new_id = {old: i + 1 for i, old in enumerate(old_ids)}
    edges = [
        (new_id[u], new_id[v])
        for v in old_ids
        for u in g.parents(v)
        if u in new_id
    ]
    return Dag(len(old_ids), edges), tuple(old_ids)


def remove_nodes(g: Dag, s: Iterable[int]) -> tuple[Dag, tuple[int, ...]]:
    """G - S: delete the nodes in `s` and relabel survivors 1..k.

    Returns (subgraph, to_old) with to_old[new_id - 1] = old_id.
    """
    drop = set(s)
    return induced_subgraph(g, (v for v in range(1, g.n + 1) if v not in drop))


def detach_nodes(g: Dag, s: Iterable[int]) -> Dag:
    """G with every edge incident to `s` removed; node set unchanged."""
    drop = set(s)
    edges = [
        (u, v)
        for v in range(1, g.n + 1)
        if v not in drop
        for u in g.parents(v)
        if u not in drop
    ]
    return Dag(g.n, edges)


def union_graphs(a: Dag, b: Dag) -> Dag:
    """Edge union of two graphs on the same node set."""
    if a.n != b.n:
        raise ValueError(f"node counts differ: {a.n} != {b.n}")
    return Dag(a.n, list(a.edges()) + list(b.edges()))


# -- metagraph ---------------------------------------------------------------


@dataclass(frozen=True)
class MetaParams:
    """Interval layout used to quotient a graph into its metagraph.

    Node range [1..n_base] is cut into n_meta = n_base // m consecutive
    intervals of length m; trailing remainder nodes belong to no interval.
    Each interval splits into a first / middle / last run whose sizes are
    max(1, ceil(m/5)) and max(1, floor(m/5)) at the two ends.
    """

    m: int
    n_base: int

    @property
    def n_meta(self) -> int:
        return self.n_base // self.m

    @property
    def first_len(self) -> int:
        return max(1, -(-self.m // 5))

    @property
    def last_len(self) -> int:
        return max(1, self.m // 5)

    def interval(self, i: int) -> range:
        """All base nodes of metanode i (1-indexed)."""
        if not 1 <= i <= self.n_meta:
            raise ValueError(f"metanode {i} out of range 1..{self.n_meta}")
        start = (i - 1) * self.m + 1
        return range(start, start + self.m)

    def first_part(self, i: int) -> range:
        start = (i - 1) * self.m + 1
        return range(start, start + self.first_len)

    def last_part(self, i: int) -> range:
        end = i * self.m
        return range(end - self.last_len + 1, end + 1)

    def middle_part(self, i: int) -> range:
        return range(self.first_part(i).stop, self.last_part(i).start)


def to_meta(vs: Iterable[int], params: MetaParams) -> set[int]:
    """Map base nodes to their metanode; remainder nodes map to nothing."""
    limit = params.n_meta * params.m
    return {(v - 1) // params.m + 1 for v in vs if 1 <= v <= limit}


def metagraph(g: Dag, m: int) -> tuple[Dag, MetaParams]:
    """Quotient g into intervals of m nodes.

    Metanodes i < j are joined when some edge runs from the last part of
    interval i into the first part of interval j AND both intervals still
    contain their full internal line (every consecutive-node edge present).
    Intervals with a broken internal line are isolated, which is what makes
    the quotient commute with detaching node sets.
    """
    if m < 1:
        raise ValueError(f"interval length must be >= 1, got {m}")
    params = MetaParams(m=m, n_base=g.n)
    nm = params.n_meta
    has_line = [False] * (nm + 1)
    for i in range(1, nm + 1):
        iv = params.interval(i)
        has_line[i] = all(g.has_edge(x, x + 1) for x in range(iv.start, iv.stop - 1))
    edges = set()
    for j in range(1, nm + 1):
        if not has_line[j]:
            continue
        first_j = params.first_part(j)
        for v in first_j:
            for u in g.parents(v):
                i = (u - 1) // m + 1
                if i < j and i >= 1 and has_line[i] and u in params.last_part(i):
                    edges.add((i, j))
    return Dag(nm, sorted(edges)), params


def lift_meta_path(g: Dag, params: MetaParams, meta_path: Sequence[int]) -> list[int]:
    """Expand a metagraph path into an explicit base-graph path.

    The lifted path starts at the first node of the first interval, rides each
    interval's internal line, hops the real boundary edges, and stops at the
    first node of the final interval's middle part (or of its last part when
    the middle is empty).  Every metagraph edge guarantees both the boundary
    edge and the full interval lines, so the expansion always succeeds; its
    length witnesses how metagraph distances scale back up in the base graph.
    """
    if not meta_path:
        raise ValueError("meta_path must be non-empty")
    path: list[int] = []
    pos = params.interval(meta_path[0]).start
    path.append(pos)
    for i, j in zip(meta_path, meta_path[1:]):
        hop = None
        for y in params.first_part(j):
            for x in g.parents(y):
                if x in params.last_part(i):
                    hop = (x, y)
                    break
            if hop:
                break
        if hop is None:
            raise ValueError(f"no boundary edge realizes metagraph edge ({i}, {j})")
        while pos < hop[0]:  # ride interval i's line
            pos += 1
            path.append(pos)
        pos = hop[1]
        path.append(pos)
    final = meta_path[-1]
    mid = params.middle_part(final)
    target = mid.start if len(mid) else params.last_part(final).start
    while pos < target:
        pos += 1
        path.append(pos)
    return path


# -- indegree reduction ------------------------------------------------------


@dataclass(frozen=True)
class ReduceMap:
    """Node correspondence for an indegree-reduced graph.

    Base node v becomes the chain (v,1) -> ... -> (v,delta); the j-th parent
    of v (ascending) feeds copy (v,j) from its own last copy (u,delta).
    """

    delta: int
    n_base: int

    def copy_id(self, v: int, j: int) -> int:
        if not (1 <= v <= self.n_base and 1 <= j <= self.delta):
            raise ValueError(f"no copy ({v}, {j})")
        return (v - 1) * self.delta + j

    def last_copy(self, v: int) -> int:
        return v * self.delta

    def base_node(self, copy: int) -> int:
        return (copy - 1) // self.delta + 1

    def copy_index(self, copy: int) -> int:
        return (copy - 1) % self.delta + 1

    def base_set(self, copies: Iterable[int]) -> set[int]:
        return {self.base_node(c) for c in copies}

    def copies_of(self, vs: Iterable[int]) -> set[int]:
        return {
            (v - 1) * self.delta + j for v in vs for j in range(1, self.delta + 1)
        }


def reduce_indegree(g: Dag, delta: int | None = None) -> tuple[Dag, ReduceMap]:
    """Replace each node by a delta-chain so the result has indegree <= 2.

    delta defaults to max indegree of g (minimum 1).  Copy (v,j) has the
    chain parent (v,j-1) plus, when v has a j-th smallest parent u, the edge
    from (u,delta).
    """
    if delta is None:
        delta = max(1, g.max_indegree())
    if delta < g.max_indegree():
        raise ValueError(f"delta={delta} below max indegree {g.max_indegree()}")
    rm = ReduceMap(delta=delta, n_base=g.n)
    edges: list[tuple[int, int]] = []
    for v in range(1, g.n + 1):
        base = (v - 1) * delta
        for j in range(1, delta):
            edges.append((base + j, base + j + 1))
        for j, u in enumerate(g.parents(v), start=1):
            edges.append((u * delta, base + j))
    return Dag(g.n * delta, edges), rm


# -- canonical text format ---------------------------------------------------

_MAGIC = "DAGv1"


def dumps_dagv1(g: Dag) -> str:
    """Canonical text serialization: header line then edges sorted by (v, u)."""
    lines = [f"{_MAGIC} {g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def loads_dagv1(text: str) -> Dag:
    """Parse and strictly validate the canonical text format."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ValueError("empty graph file")
    head = lines[0].split(" ")
    if len(head) != 3 or head[0] != _MAGIC:
        raise ValueError(f"bad header {lines[0]!r}; expected '{_MAGIC} <n> <m>'")
    n, m = int(head[1]), int(head[2])
    if len(lines) - 1 != m:
        raise ValueError(f"header promises {m} edges, file has {len(lines) - 1}")
    edges: list[tuple[int, int]] = []
    prev: tuple[int, int] | None = None
    for ln in lines[1:]:
        parts = ln.split(" ")
        if len(parts) != 2:
            raise ValueError(f"bad edge line {ln!r}")
        u, v = int(parts[0]), int(parts[1])
        if not (1 <= u < v <= n):
            raise ValueError(f"edge ({u}, {v}) violates 1 <= u < v <= {n}")
        key = (v, u)
        if prev is not None and key <= prev:
            raise ValueError(f"edges not strictly sorted by (target, source) at {ln!r}")
        prev = key
        edges.append((u, v))
    return Dag(n, edges)


def write_dagv1(g: Dag, path: str) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dumps_dagv1(g))


def read_dagv1(path: str) -> Dag:
    with open(path, "r", encoding="ascii") as fh:
        return loads_dagv1(fh.read())


def topological_order(g: Dag) -> list[int]:
    """Node ids are already topological; provided for symmetry with callers."""
    return list(range(1, g.n + 1))


def is_topologically_labeled(edges: Sequence[tuple[int, int]]) -> bool:
    return all(u < v for u, v in edges)
