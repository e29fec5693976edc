"""Graph families and dynamic-graph specs.

Static families: the line graph, a locally-sampled random back-edge family
(`drsample`), a deterministic layered bit-reversal family (`grates`), and
their indegree-reduced union (`egsample`).  Dynamic graphs append a challenge
chain to a static base; each chain node gets one extra parent drawn from the
base when its predecessor is first pebbled.
"""

from __future__ import annotations

import math
import os
import random
from typing import Sequence

from .graphs import Dag, ReduceMap, read_dagv1, reduce_indegree, union_graphs, write_dagv1
from .util import canonical_json, read_json

SPEC_VERSION = "dagspec-v1"


def line_graph(n: int) -> Dag:
    """Path 1 -> 2 -> ... -> n."""
    return Dag(n, [(v - 1, v) for v in range(2, n + 1)])


def drsample(n: int, rng: random.Random | int) -> Dag:
    """Line plus one random back-edge per node, biased to local targets.

    The back-parent of v is sampled by first picking a dyadic distance bucket
    i uniformly from 1..ceil(log2 v) and then a node uniformly from
    [max(1, v - 2^i), v - max(1, 2^(i-1))].  Every u < v has probability at
    least 1 / (2 (v - u) ceil(log2 v)) of being the back-parent of v, and
    that constant is tight.
    """
    if isinstance(rng, int):
        rng = random.Random(rng)
    edges = []
    for v in range(2, n + 1):
        edges.append((v - 1, v))
        edges.append((back_parent(v, rng), v))
    return Dag(n, edges)


def back_parent(v: int, rng: random.Random) -> int:
    """One draw of the local back-edge distribution for target v >= 2."""
    buckets = (v - 1).bit_length()  # = ceil(log2 v)
    i = rng.randint(1, buckets)
    lo = max(1, v - (1 << i))
    hi = v - max(1, 1 << (i - 1))
    return rng.randint(lo, hi)


def _bit_reverse(j: int, bits: int) -> int:
    r = 0
    for _ in range(bits):
        r = (r << 1) | (j & 1)
        j >>= 1
    return r


def grates(n: int, eps: float) -> Dag:
    """Deterministic layered family: line edges plus bit-reversal hops.

    The node range splits into ceil(2/eps) near-equal consecutive layers; the
    2^t-prefixes of adjacent layers (t as large as both layers allow) are
    joined by the bit-reversal permutation.  Each node has at most one
    non-line parent, so the indegree is at most 2 by construction.
    """
    if not 0 < eps <= 2:
        raise ValueError(f"eps must be in (0, 2], got {eps}")
    if n == 0:
        return Dag(0)
    layers = min(max(math.ceil(2 / eps), 1), n)
    sizes = [n // layers] * layers
    for k in range(n % layers):
        sizes[k] += 1
    starts = [1]
    for s in sizes[:-1]:
        starts.append(starts[-1] + s)
    edges = [(v - 1, v) for v in range(2, n + 1)]
    for b in range(layers - 1):
        t = min(sizes[b], sizes[b + 1]).bit_length() - 1
        for j in range(1 << t):
            u = starts[b] + _bit_reverse(j, t)
            v = starts[b + 1] + j
            edges.append((u, v))
    return Dag(n, edges)


def egsample(n: int, eps: float = 0.5, rng: random.Random | int = 0) -> tuple[Dag, ReduceMap]:
    """Indegree-reduced union of drsample(n) and grates(n, eps).

    The union has indegree <= 3 (line, back-edge, bit-reversal hop), so the
    result lives on 3n nodes with indegree <= 2.  The ReduceMap translates
    node sets between the union and its reduction.
    """
    u = union_graphs(drsample(n, rng), grates(n, eps))
    return reduce_indegree(u)


# -- dynamic specs -------------------------------------------------------------


class DynamicGraphSpec:
    """A static base plus an n_chal-node challenge chain.

    Chain node i (id n_base + i) always has its predecessor as a parent
    (chain node i-1, or the base's last node for i = 1) plus one dynamic
    parent r(i) in the base, revealed when the predecessor is first pebbled.
    """

    def __init__(self, base: Dag, n_chal: int, rule: str = "uniform",
                 base_path: str | None = None):
        if n_chal < 1:
            raise ValueError(f"need at least one chain node, got {n_chal}")
        if rule != "uniform":
            raise ValueError(f"unknown dynamic rule {rule!r}")
        if base.n < 1:
            raise ValueError("base graph must be non-empty")
        self.base = base
        self.n_chal = n_chal
        self.rule = rule
        self.base_path = base_path
        self._static: Dag | None = None

    @property
    def n_base(self) -> int:
        return self.base.n

    @property
    def n_total(self) -> int:
        return self.base.n + self.n_chal

    def chain_node(self, i: int) -> int:
        if not 1 <= i <= self.n_chal:
            raise ValueError(f"chain index {i} out of range 1..{self.n_chal}")
        return self.n_base + i

    def chain_pred(self, i: int) -> int:
        return self.n_base + i - 1 if i > 1 else self.n_base

    def static_graph(self) -> Dag:
        """Base plus the chain edges (dynamic parents excluded)."""
        if self._static is None:
            edges = list(self.base.edges())
            edges += [(v - 1, v) for v in range(self.n_base + 1, self.n_total + 1)]
            self._static = Dag(self.n_total, edges)
        return self._static

    def realize(self, challenges: Sequence[int]) -> Dag:
        """The static graph plus the realized dynamic edges (r(i), chain i)."""
        if len(challenges) != self.n_chal:
            raise ValueError(f"need {self.n_chal} challenges, got {len(challenges)}")
        edges = list(self.static_graph().edges())
        for i, r in enumerate(challenges, start=1):
            if not 1 <= r <= self.n_base:
                raise ValueError(f"challenge {i} value {r} outside the base")
            edges.append((r, self.chain_node(i)))
        return Dag(self.n_total, edges)

    def sample_challenges(self, rng: random.Random) -> list[int]:
        return [rng.randint(1, self.n_base) for _ in range(self.n_chal)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DynamicGraphSpec):
            return NotImplemented
        return (self.base, self.n_chal, self.rule) == (other.base, other.n_chal, other.rule)


def dynamize(base: Dag, n_chal: int, base_path: str | None = None) -> DynamicGraphSpec:
    return DynamicGraphSpec(base=base, n_chal=n_chal, base_path=base_path)


def scrypt_spec(n: int) -> DynamicGraphSpec:
    """Line base with as many challenges as base nodes."""
    return dynamize(line_graph(n), n)


def sample_dynamic(
    spec: DynamicGraphSpec, rng: random.Random | int
) -> tuple[list[int], Dag]:
    """Draw the dynamic parents up front and return them with the realized graph."""
    if isinstance(rng, int):
        rng = random.Random(rng)
    challenges = spec.sample_challenges(rng)
    return challenges, spec.realize(challenges)


def save_spec(spec: DynamicGraphSpec, path: str, base_path: str | None = None) -> None:
    """Write the spec JSON; the base graph must already live at base_path.

    base_path defaults to the spec's recorded one and is stored relative to
    the spec file's directory when possible (keeps bundles relocatable).
    """
    bp = base_path or spec.base_path
    if bp is None:
        raise ValueError("no base graph path recorded; pass base_path")
    spec_dir = os.path.dirname(os.path.abspath(path))
    try:
        rel = os.path.relpath(os.path.abspath(bp), spec_dir)
    except ValueError:  # different drive (windows); keep absolute
        rel = os.path.abspath(bp)
    obj = {
        "version": SPEC_VERSION,
        "base_file": rel,
        "n_base": spec.n_base,
        "n_chal": spec.n_chal,
        "rule": spec.rule,
    }
    with open(path, "w", encoding="ascii") as fh:
        fh.write(canonical_json(obj))


def load_spec(path: str) -> DynamicGraphSpec:
    obj = read_json(path)
    if obj.get("version") != SPEC_VERSION:
        raise ValueError(f"unsupported spec version {obj.get('version')!r}")
    base_file = obj["base_file"]
    if not os.path.isabs(base_file):
        base_file = os.path.join(os.path.dirname(os.path.abspath(path)), base_file)
    base = read_dagv1(base_file)
    if base.n != obj["n_base"]:
        raise ValueError(
            f"base file has {base.n} nodes but spec says {obj['n_base']}"
        )
    return DynamicGraphSpec(
        base=base, n_chal=obj["n_chal"], rule=obj["rule"], base_path=base_file
    )


def write_base_and_spec(spec: DynamicGraphSpec, base_out: str, spec_out: str) -> None:
    """Convenience used by the CLI pipeline: write both files together."""
    write_dagv1(spec.base, base_out)
    spec.base_path = base_out
    save_spec(spec, spec_out)
