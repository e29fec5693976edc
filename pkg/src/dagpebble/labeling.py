"""Hash-instantiated graph labeling with full trace capture.

Evaluates static and dynamic graph functions against a real hash function,
recording every oracle query and the instrumented memory state per round.
The same query log supports the reverse direction: reconstructing the graph
realized by a dynamic evaluation (the challenge edges are derived from label
values) and extracting a pebbling from any trace by structural recognition of
the queried prelabels.

Label conventions: the prelabel of a static node v is enc(v) || 0x00 || the
labels of its parents in ascending node order (sources use the evaluation
input in place of parent labels); a chain node's prelabel is enc(v) || 0x01
|| chain-predecessor label || challenge label.  enc is 8-byte big-endian.
The label of v is H(prelabel); the digest of a run is the label of the last
node.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

from .build import DynamicGraphSpec
from .graphs import Dag, ancestors
from .pebble import ChallengeRecord, LegalityReport, Pebbling, check_legal
from .util import read_json, write_json

SEP_STATIC = 0x00
SEP_DYNAMIC = 0x01
BOOKKEEPING_BITS = 64  # fixed per-round overhead charged on top of labels


def enc_node(v: int) -> bytes:
    return struct.pack(">Q", v)


@dataclass(frozen=True)
class OracleConfig:
    """Which hash plays H and how wide its output is."""

    w: int = 256
    hash_name: str = "sha256"

    def __post_init__(self):
        if self.w % 8 != 0 or self.w <= 0:
            raise ValueError(f"w must be a positive multiple of 8, got {self.w}")
        probe = hashlib.new(self.hash_name)
        if probe.digest_size * 8 != self.w:
            raise ValueError(
                f"{self.hash_name} outputs {probe.digest_size * 8} bits, "
                f"config says w={self.w}")

    def H(self, data: bytes) -> bytes:
        return hashlib.new(self.hash_name, data).digest()


class EvaluationOrderError(KeyError):
    """A prelabel referenced a label that is not currently retained."""


class LabelCollisionError(AssertionError):
    """Two distinct prelabels hashed to the same label (astronomically
    unlikely at w=256; loud failure beats silent nonsense)."""


class PebblingAbort(RuntimeError):
    """The supplied pebbling is illegal for the graph this input realizes.

    Carries the legality report and the resolved challenges so the caller can
    see which edge the pebbling missed (typically: it was built for a
    different challenge outcome).
    """

    def __init__(self, report: LegalityReport, challenges: list[int]):
        super().__init__(
            f"pebbling illegal for realized graph: round "
            f"{report.violation_round}, node {report.violation_node}, "
            f"missing parent {report.missing_parent}")
        self.report = report
        self.challenges = challenges


class LabelStore:
    """Computed labels plus the subset currently held in memory.

    `get` only serves retained labels — evaluators must re-query H for
    anything they dropped, which is exactly what keeps traces honest.
    """

    def __init__(self, x: bytes):
        self.input = x
        self.labels: dict[int, bytes] = {}
        self.retained: set[int] = set()
        self.first_out: dict[int, int] = {}
        self._seen: dict[bytes, int] = {}

    def put(self, v: int, label: bytes, round_no: int) -> None:
        owner = self._seen.get(label)
        if owner is not None and owner != v:
            raise LabelCollisionError(
                f"label of node {v} collides with node {owner}")
        self._seen[label] = v
        self.labels[v] = label
        self.retained.add(v)
        self.first_out.setdefault(v, round_no)

    def get(self, v: int) -> bytes:
        if v not in self.retained:
            raise EvaluationOrderError(
                f"label of node {v} needed but not retained")
        return self.labels[v]

    def drop(self, v: int) -> None:
        self.retained.discard(v)


@dataclass
class TraceRound:
    queries: list[bytes]
    state_bits: int


@dataclass
class Trace:
    """Every oracle query of a run, batched by round, with state sizes.

    state_bits per round = retained labels x w + 64 bits bookkeeping,
    measured after the round's placements and drops.
    """

    rounds: list[TraceRound] = field(default_factory=list)
    digest: bytes = b""
    challenges: list[ChallengeRecord] = field(default_factory=list)

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    def to_dict(self) -> dict:
        return {
            "rounds": [
                {"queries": [q.hex() for q in r.queries],
                 "state_bits": r.state_bits}
                for r in self.rounds
            ],
            "digest": self.digest.hex(),
            "challenges": [c.to_dict() for c in self.challenges],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Trace":
        return cls(
            rounds=[
                TraceRound([bytes.fromhex(q) for q in r["queries"]],
                           int(r["state_bits"]))
                for r in d["rounds"]
            ],
            digest=bytes.fromhex(d["digest"]),
            challenges=[
                ChallengeRecord(int(c["i"]), int(c["r"]), int(c["s"]),
                                int(c["t"]))
                for c in d.get("challenges", ())
            ],
        )


def save_trace(trace: Trace, path: str) -> None:
    write_json(path, trace.to_dict())


def load_trace(path: str) -> Trace:
    return Trace.from_dict(read_json(path))


# -- prelabels -----------------------------------------------------------------


def prelab_static(v: int, store: LabelStore, g: Dag) -> bytes:
    """enc(v) || 0x00 || parent labels ascending (input for sources)."""
    ps = g.parents(v)
    if not ps:
        return enc_node(v) + bytes([SEP_STATIC]) + store.input
    return enc_node(v) + bytes([SEP_STATIC]) + b"".join(
        store.get(u) for u in ps)


def resolve_challenge(store: LabelStore, spec: DynamicGraphSpec,
                      i: int) -> int:
    """Challenge of chain node i: 1 + (chain-predecessor label mod N)."""
    pred_label = store.get(spec.chain_pred(i))
    return 1 + int.from_bytes(pred_label, "big") % spec.n_base


def prelab_dynamic(v: int, store: LabelStore,
                   spec: DynamicGraphSpec) -> bytes:
    """enc(v) || 0x01 || chain-predecessor label || challenge label.

    Non-chain nodes have no dynamic edge and fall back to the static form.
    """
    if v <= spec.n_base:
        return prelab_static(v, store, spec.base)
    i = v - spec.n_base
    if not 1 <= i <= spec.n_chal:
        raise ValueError(f"node {v} outside the graph")
    r = resolve_challenge(store, spec, i)
    return (enc_node(v) + bytes([SEP_DYNAMIC])
            + store.get(spec.chain_pred(i)) + store.get(r))


# -- honest evaluators -----------------------------------------------------------


def eval_imhf(g: Dag, x: bytes, cfg: OracleConfig | None = None
              ) -> tuple[bytes, Trace]:
    """Sequential static evaluation; returns (label of node N, trace).

    One query per round.  Retention: a label is held while it still has
    unconsumed out-edges; the output node is held to the end; other sinks are
    emitted and not retained (nothing ever consumes them).
    """
    cfg = cfg or OracleConfig()
    if g.n == 0:
        raise ValueError("empty graph")
    _check_width(g.n, cfg)
    store = LabelStore(x)
    unconsumed = {v: len(g.children(v)) for v in range(1, g.n + 1)}
    trace = Trace()
    for v in range(1, g.n + 1):
        pre = prelab_static(v, store, g)
        store.put(v, cfg.H(pre), v)
        for u in g.parents(v):
            unconsumed[u] -= 1
            if unconsumed[u] == 0 and u != g.n:
                store.drop(u)
        if unconsumed[v] == 0 and v != g.n:
            store.drop(v)
        trace.rounds.append(
            TraceRound([pre], _state_bits(len(store.retained), cfg)))
    trace.digest = store.labels[g.n]
    return trace.digest, trace


def eval_dmhf(spec: DynamicGraphSpec, x: bytes,
              cfg: OracleConfig | None = None, low_memory: bool = False
              ) -> tuple[bytes, Trace]:
    """Honest dynamic evaluation; returns (digest, trace with challenge log).

    Default mode stores every base label through the whole challenge phase,
    so each challenge is answered with a single query (t=1).  Low-memory mode
    holds only the first base label and the current chain label, recomputing
    the challenged label's ancestor closure from scratch each time (one query
    per round, same retention rule as the static evaluator within a closure).

    Challenge log entries: r from the previous label, s = round where that
    label was first output, t = rounds from s until the chain node's query.
    """
    cfg = cfg or OracleConfig()
    _check_width(spec.n_total, cfg)
    g = spec.base
    n = g.n
    store = LabelStore(x)
    trace = Trace()
    round_no = 0

    if not low_memory:
        for v in range(1, n + 1):
            pre = prelab_static(v, store, g)
            round_no += 1
            store.put(v, cfg.H(pre), round_no)
            trace.rounds.append(
                TraceRound([pre], _state_bits(len(store.retained), cfg)))
    else:
        unconsumed = {v: len(g.children(v)) for v in range(1, n + 1)}
        for v in range(1, n + 1):
            pre = prelab_static(v, store, g)
            round_no += 1
            store.put(v, cfg.H(pre), round_no)
            for u in g.parents(v):
                unconsumed[u] -= 1
                if unconsumed[u] == 0 and u not in (1, n):
                    store.drop(u)
            if unconsumed[v] == 0 and v not in (1, n):
                store.drop(v)
            trace.rounds.append(
                TraceRound([pre], _state_bits(len(store.retained), cfg)))

    for i in range(1, spec.n_chal + 1):
        pred = spec.chain_pred(i)
        s_i = store.first_out[pred]
        r = resolve_challenge(store, spec, i)
        if low_memory and r not in store.retained:
            round_no = _recompute_closure(g, r, store, cfg, trace, round_no)
        li = spec.chain_node(i)
        pre = prelab_dynamic(li, store, spec)
        round_no += 1
        store.put(li, cfg.H(pre), round_no)
        if low_memory:
            for u in set(store.retained) - {1, li}:
                store.drop(u)
        elif pred > n:
            store.drop(pred)
        trace.rounds.append(
            TraceRound([pre], _state_bits(len(store.retained), cfg)))
        trace.challenges.append(
            ChallengeRecord(i=i, r=r, s=s_i, t=round_no - s_i))
    trace.digest = store.labels[spec.chain_node(spec.n_chal)]
    return trace.digest, trace


def _recompute_closure(g: Dag, r: int, store: LabelStore, cfg: OracleConfig,
                       trace: Trace, round_no: int) -> int:
    """Recompute the label of r from whatever is retained, one query a round,
    dropping working labels once nothing in the closure still needs them."""
    blocked = frozenset(store.retained)
    need = ancestors(g, r, blocked=blocked)
    need.add(r)
    order = sorted(need)
    needed_children = {
        v: sum(1 for c in g.children(v) if c in need) for v in order}
    for v in order:
        pre = prelab_static(v, store, g)
        round_no += 1
        store.put(v, cfg.H(pre), round_no)
        for u in g.parents(v):
            if u in needed_children:
                needed_children[u] -= 1
                if needed_children[u] == 0 and u != r and u != 1:
                    store.drop(u)
        trace.rounds.append(
            TraceRound([pre], _state_bits(len(store.retained), cfg)))
    return round_no


def _state_bits(retained: int, cfg: OracleConfig) -> int:
    return retained * cfg.w + BOOKKEEPING_BITS


def _check_width(n: int, cfg: OracleConfig) -> None:
    if n > 2 ** cfg.w:
        raise ValueError(f"{n} nodes do not fit in w={cfg.w} bits")


# -- realized graphs and replay ---------------------------------------------------


def resolve_challenges(spec: DynamicGraphSpec, x: bytes,
                       cfg: OracleConfig | None = None) -> list[int]:
    """Challenges this input realizes (label computation only, no trace)."""
    cfg = cfg or OracleConfig()
    store = LabelStore(x)
    g = spec.base
    for v in range(1, g.n + 1):
        store.put(v, cfg.H(prelab_static(v, store, g)), v)
    out = []
    for i in range(1, spec.n_chal + 1):
        r = resolve_challenge(store, spec, i)
        out.append(r)
        li = spec.chain_node(i)
        store.put(li, cfg.H(prelab_dynamic(li, store, spec)), g.n + i)
    return out


def ex_post_facto_graph(spec: DynamicGraphSpec, x: bytes,
                        cfg: OracleConfig | None = None) -> Dag:
    """The static graph realized by evaluating spec on x: base plus the
    challenge edges the labels turned out to select."""
    return spec.realize(resolve_challenges(spec, x, cfg))


def pebbling_driven_eval(p: Pebbling, spec: DynamicGraphSpec, x: bytes,
                         cfg: OracleConfig | None = None
                         ) -> tuple[bytes, Trace]:
    """Execute a pebbling as a memory schedule over the realized graph.

    Round i queries H once for each node entering P_i and then retains
    exactly the labels of P_i.  Raises PebblingAbort (with the legality
    report and the resolved challenges) when p is illegal for the graph this
    input realizes — a pebbling built for one challenge outcome generally
    breaks on another.
    """
    cfg = cfg or OracleConfig()
    challenges = resolve_challenges(spec, x, cfg)
    g = spec.realize(challenges)
    verdict = check_legal(g, p)
    if not verdict.ok:
        raise PebblingAbort(verdict, challenges)
    store = LabelStore(x)
    trace = Trace()
    first_query: dict[int, int] = {}
    prev: frozenset[int] = frozenset()
    for round_no, cur in enumerate(p.configs, start=1):
        batch = []
        for v in sorted(cur - prev):
            pre = prelab_dynamic(v, store, spec)
            store.put(v, cfg.H(pre), round_no)
            first_query.setdefault(v, round_no)
            batch.append(pre)
        for v in set(store.retained) - cur:
            store.drop(v)
        trace.rounds.append(
            TraceRound(batch, _state_bits(len(cur), cfg)))
        prev = cur
    final = spec.chain_node(spec.n_chal)
    trace.digest = store.get(final)
    for i, r in enumerate(challenges, start=1):
        li = spec.chain_node(i)
        s_i = first_query[spec.chain_pred(i)]
        trace.challenges.append(
            ChallengeRecord(i=i, r=r, s=s_i, t=first_query[li] - s_i))
    return trace.digest, trace


# -- extraction -------------------------------------------------------------------


def parse_query(q: bytes, n: int) -> int | None:
    """Node id of a well-formed prelabel over [1..n], else None."""
    if len(q) < 9 or q[8] not in (SEP_STATIC, SEP_DYNAMIC):
        return None
    v = struct.unpack(">Q", q[:8])[0]
    return v if 1 <= v <= n else None


def extract_pebbling(trace: Trace, g: Dag
                     ) -> tuple[Pebbling, LegalityReport]:
    """Recover the pebbling a trace's queries imply, with legality verdict.

    A node enters P_i when round i queries its prelabel.  It stays exactly as
    long as it is necessary: until the last later round that queries one of
    its children before the node is queried again (a child's query at round j
    consumes the parent label out of P_{j-1}).  Sink labels are the output
    and count as consumed at the end, so they persist once computed.
    Unparseable queries are ignored.  The verdict comes from check_legal and
    is reported, not raised — a trace that skipped labels extracts to an
    illegal pebbling.
    """
    t = trace.n_rounds
    queried_at: dict[int, list[int]] = {}
    for rno, rd in enumerate(trace.rounds, start=1):
        for q in rd.queries:
            v = parse_query(q, g.n)
            if v is not None:
                queried_at.setdefault(v, []).append(rno)
    # round j queries child c  =>  each parent label is consumed at j
    consumed_at: dict[int, list[int]] = {}
    for c, rounds_c in queried_at.items():
        for u in g.parents(c):
            consumed_at.setdefault(u, []).extend(rounds_c)
    for u in consumed_at:
        consumed_at[u].sort()
    sinks = set(g.sinks())
    configs: list[set[int]] = [set() for _ in range(t)]
    for v, occ in sorted(queried_at.items()):
        cons = consumed_at.get(v, [])
        for k, start in enumerate(occ):
            nxt = occ[k + 1] if k + 1 < len(occ) else t + 1
            last = start  # present at the add round unconditionally
            for j in cons:
                # a child's query at round j consumes the copy held since
                # `start`, so the node occupies rounds start..j-1; j == nxt
                # still consumes the old copy (re-added the same round)
                if start < j <= nxt:
                    last = max(last, j - 1)
            if v in sinks and nxt == t + 1:
                last = t
            for i in range(start, last + 1):
                configs[i - 1].add(v)
    peb = Pebbling(configs)
    return peb, check_legal(g, peb)


# -- trace costs ------------------------------------------------------------------


@dataclass(frozen=True)
class TraceCost:
    rounds: int
    queries: int
    cmc_bits: int
    max_state_bits: int
    state_bits: tuple[int, ...]

    def smc(self, s_bits: int) -> int:
        """Rounds whose state held at least s_bits."""
        return sum(1 for x in self.state_bits if x >= s_bits)

    def to_dict(self, smc_thresholds: tuple[int, ...] = ()) -> dict:
        return {
            "rounds": self.rounds,
            "queries": self.queries,
            "cmc_bits": self.cmc_bits,
            "max_state_bits": self.max_state_bits,
            "smc": {str(s): self.smc(s) for s in smc_thresholds},
        }


def trace_cost(trace: Trace) -> TraceCost:
    sizes = tuple(r.state_bits for r in trace.rounds)
    return TraceCost(
        rounds=len(sizes),
        queries=sum(len(r.queries) for r in trace.rounds),
        cmc_bits=sum(sizes),
        max_state_bits=max(sizes, default=0),
        state_bits=sizes,
    )
