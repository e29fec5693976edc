"""Parallel black pebbling: legality, cost accounting, exact search, strategies.

A pebbling of a graph is the sequence of configurations P_1..P_t (P_0 is the
empty set).  A step may place any number of pebbles whose parents were all
pebbled in the previous configuration and may remove anything.  A pebbling is
complete when the final configuration contains every sink.  Costs: cumulative
complexity cc = sum of |P_i|, sustained-space ssc(s) = number of rounds with
|P_i| >= s.

Dynamic graphs (a static base plus a challenge chain whose extra parents are
revealed online) are pebbled through `run_dynamic`, which referees a strategy
against the reveal rule and records per-challenge reveal rounds and latencies.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from .build import DynamicGraphSpec
from .errors import CapExceeded
from .graphs import Dag, ancestors
from . import kernels


# -- static pebblings --------------------------------------------------------


class Pebbling:
    """Configurations P_1..P_t as frozensets (P_0 = empty is implicit)."""

    __slots__ = ("configs",)

    def __init__(self, configs: Iterable[Iterable[int]]):
        self.configs: tuple[frozenset[int], ...] = tuple(
            frozenset(c) for c in configs
        )

    def __len__(self) -> int:
        return len(self.configs)

    def __getitem__(self, i: int) -> frozenset[int]:
        """P_i for i in 0..t (P_0 is the empty set)."""
        if i == 0:
            return frozenset()
        return self.configs[i - 1]

    @property
    def rounds(self) -> int:
        return len(self.configs)

    def cc(self) -> int:
        return sum(len(c) for c in self.configs)

    def ssc(self, s: int) -> int:
        return sum(1 for c in self.configs if len(c) >= s)

    def max_space(self) -> int:
        return max((len(c) for c in self.configs), default=0)


@dataclass(frozen=True)
class LegalityReport:
    ok: bool
    complete: bool
    violation_round: int | None = None
    violation_node: int | None = None
    missing_parent: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_legal(g: Dag, p: Pebbling, require_complete: bool = True) -> LegalityReport:
    """Verify every placement had its parents pebbled in the previous round."""
    prev: frozenset[int] = frozenset()
    for i, cur in enumerate(p.configs, start=1):
        for v in cur - prev:
            if not 1 <= v <= g.n:
                return LegalityReport(False, False, i, v, None)
            for u in g.parents(v):
                if u not in prev:
                    return LegalityReport(False, False, i, v, u)
        prev = cur
    complete = all(s in prev for s in g.sinks())
    ok = complete or not require_complete
    return LegalityReport(ok, complete)


@dataclass(frozen=True)
class CostReport:
    rounds: int
    cc: int
    max_space: int
    sizes: tuple[int, ...]

    def ssc(self, s: int) -> int:
        return sum(1 for x in self.sizes if x >= s)

    def to_dict(self, ssc_thresholds: Sequence[int] = ()) -> dict:
        return {
            "rounds": self.rounds,
            "cc": self.cc,
            "max_space": self.max_space,
            "ssc": {str(s): self.ssc(s) for s in ssc_thresholds},
        }


def cost(p: Pebbling) -> CostReport:
    sizes = tuple(len(c) for c in p.configs)
    return CostReport(
        rounds=len(sizes),
        cc=sum(sizes),
        max_space=max(sizes, default=0),
        sizes=sizes,
    )


def cc_exact(
    g: Dag,
    node_cap: int = 16,
    state_cap: int = 2_000_000,
) -> int:
    """Exact minimum cc over all legal complete pebblings of g.

    Exponential-state search; refuses graphs larger than node_cap (raise it
    explicitly for bigger instances, the hard ceiling is 63 nodes).
    """
    if g.n > node_cap:
        raise CapExceeded(
            f"cc_exact guard: {g.n} nodes > cap {node_cap}; raise node_cap to force"
        )
    if g.n == 0:
        return 0
    parent_masks = [0] * g.n
    for v in range(1, g.n + 1):
        m = 0
        for u in g.parents(v):
            m |= 1 << (u - 1)
        parent_masks[v - 1] = m
    sinks_mask = 0
    for s in g.sinks():
        sinks_mask |= 1 << (s - 1)
    return kernels.cc_exact_bits(g.n, parent_masks, sinks_mask, state_cap)


# -- dynamic arena -------------------------------------------------------------


@dataclass
class ChallengeRecord:
    """Reveal bookkeeping for one challenge node."""

    i: int
    r: int
    s: int  # round in which the challenge was revealed
    t: int  # rounds from reveal until r was pebbled (0 = already pebbled)

    def to_dict(self) -> dict:
        return {"i": self.i, "r": self.r, "s": self.s, "t": self.t}


class StrategyError(ValueError):
    """A strategy proposed an illegal or premature move."""


class ArenaView:
    """What a strategy is allowed to see while playing."""

    def __init__(self, spec: DynamicGraphSpec):
        self.spec = spec
        self.config: set[int] = set()
        self.round = 0
        self._revealed: dict[int, int] = {}

    def challenge(self, i: int) -> int:
        """Dynamic parent of chain node i; raises if not yet revealed."""
        try:
            return self._revealed[i]
        except KeyError:
            raise StrategyError(f"challenge {i} not revealed yet") from None

    def revealed_count(self) -> int:
        return len(self._revealed)


Strategy = Callable[[ArenaView], Iterator[tuple[Iterable[int], Iterable[int]]]]


@dataclass
class DynamicRunResult:
    spec: DynamicGraphSpec
    challenges: list[ChallengeRecord]
    sizes: list[int]
    configs: list[frozenset[int]] | None = None

    @property
    def rounds(self) -> int:
        return len(self.sizes)

    @property
    def cc(self) -> int:
        return sum(self.sizes)

    def ssc(self, s: int) -> int:
        return sum(1 for x in self.sizes if x >= s)

    def max_space(self) -> int:
        return max(self.sizes, default=0)

    def pebbling(self) -> Pebbling:
        if self.configs is None:
            raise ValueError("run was not recorded with record_configs=True")
        return Pebbling(self.configs)

    def realized_graph(self) -> Dag:
        return self.spec.realize([c.r for c in self.challenges])

    def mean_latency(self, recompute_only: bool = True) -> float:
        ts = [c.t for c in self.challenges if c.t > 0 or not recompute_only]
        return sum(ts) / len(ts) if ts else 0.0

    def to_dict(self, ssc_thresholds: Sequence[int] = ()) -> dict:
        return {
            "rounds": self.rounds,
            "cc": self.cc,
            "max_space": self.max_space(),
            "ssc": {str(s): self.ssc(s) for s in ssc_thresholds},
            "challenges": [c.to_dict() for c in self.challenges],
        }


def run_dynamic(
    spec: DynamicGraphSpec,
    strategy: Strategy,
    rng: random.Random | None = None,
    challenges: Sequence[int] | None = None,
    record_configs: bool = False,
    observer: Callable[[int, set[int]], None] | None = None,
    max_rounds: int = 50_000_000,
) -> DynamicRunResult:
    """Referee one strategy run over a dynamic graph spec.

    The dynamic parent r(i) of chain node i is revealed at the end of the
    round in which the chain predecessor of i is first pebbled (r(i) comes
    from `challenges` when given, otherwise uniform from the base via rng).
    The run ends when the last chain node is pebbled.  `observer`, if given,
    is called as observer(round, config) after every round with the live
    config set (must not mutate it).
    """
    if challenges is not None and len(challenges) != spec.n_chal:
        raise ValueError(f"need {spec.n_chal} challenges, got {len(challenges)}")
    if challenges is None and rng is None:
        rng = random.Random(0)
    view = ArenaView(spec)
    config = view.config
    n_base = spec.n_base
    final_node = spec.chain_node(spec.n_chal)
    records: list[ChallengeRecord] = []
    pending: dict[int, ChallengeRecord] = {}  # r -> record awaiting pebble
    sizes: list[int] = []
    configs: list[frozenset[int]] | None = [] if record_configs else None
    ever_pebbled: set[int] = set()

    def reveal_due() -> None:
        while view.revealed_count() < spec.n_chal:
            i = view.revealed_count() + 1
            if spec.chain_pred(i) not in ever_pebbled:
                break
            r = challenges[i - 1] if challenges is not None else rng.randint(1, n_base)
            view._revealed[i] = r
            rec = ChallengeRecord(i=i, r=r, s=view.round, t=0)
            records.append(rec)
            if r not in config:
                pending.setdefault(r, rec)

    gen = strategy(view)
    done = False
    while not done:
        try:
            adds, drops = next(gen)
        except StopIteration:
            break
        adds = set(adds)
        drops = set(drops)
        if not adds and not drops:
            raise StrategyError("empty move batch")
        for v in adds:
            if not 1 <= v <= spec.n_total:
                raise StrategyError(f"node {v} out of range")
            if v > n_base:
                i = v - n_base
                if i not in view._revealed:
                    raise StrategyError(f"chain node {v} pebbled before its reveal")
                ps: tuple[int, ...] = (spec.chain_pred(i), view._revealed[i])
            else:
                ps = spec.base.parents(v)
            for u in ps:
                if u not in config:
                    raise StrategyError(
                        f"round {view.round + 1}: placing {v} without parent {u}"
                    )
        missing_drop = drops - config
        if missing_drop:
            raise StrategyError(f"dropping unpebbled nodes {sorted(missing_drop)}")
        view.round += 1
        config -= drops
        config |= adds
        ever_pebbled |= adds
        for v in adds:
            rec = pending.pop(v, None)
            if rec is not None:
                rec.t = view.round - rec.s
        sizes.append(len(config))
        if configs is not None:
            configs.append(frozenset(config))
        reveal_due()
        if observer is not None:
            observer(view.round, config)
        if final_node in config:
            done = True
        if view.round >= max_rounds:
            raise CapExceeded(f"dynamic run exceeded {max_rounds} rounds")
    if not done:
        raise StrategyError("strategy stopped before pebbling the final chain node")
    return DynamicRunResult(
        spec=spec, challenges=records, sizes=sizes, configs=configs
    )


# -- strategies ----------------------------------------------------------------


def _base_sweep(
    view: ArenaView, keep: set[int]
) -> Iterator[tuple[set[int], set[int]]]:
    """Pebble the base in id order, dropping non-kept nodes once consumed."""
    g = view.spec.base
    max_child = [0] * (g.n + 1)
    for v in range(1, g.n + 1):
        for u in g.parents(v):
            if v > max_child[u]:
                max_child[u] = v
    held: list[int] = []  # non-keep nodes awaiting their last base child
    for v in range(1, g.n + 1):
        drops = {u for u in held if max_child[u] <= v}
        held = [u for u in held if max_child[u] > v]
        if v not in keep:
            held.append(v)
        yield ({v}, drops)


def _answer_challenge(
    view: ArenaView, i: int, keep: set[int]
) -> Iterator[tuple[set[int], set[int]]]:
    """Recompute the challenge parent in waves, then pebble chain node i.

    Waves place every recomputable needed node at once; working pebbles are
    dropped as soon as all of their needed children are placed.
    """
    g = view.spec.base
    config = view.config
    r = view.challenge(i)
    li = view.spec.chain_node(i)
    pred = view.spec.chain_pred(i)
    chain_drop = {pred} - keep  # the chain consumes its predecessor here
    if r in config:
        yield ({li}, chain_drop)
        return
    need = ancestors(g, r, blocked=frozenset(config))
    need.add(r)
    missing_parents = {v: sum(1 for u in g.parents(v) if u in need) for v in need}
    needed_children = {v: sum(1 for w in g.children(v) if w in need) for v in need}
    wave = sorted(v for v, k in missing_parents.items() if k == 0)
    working: set[int] = set()  # recompute pebbles currently held
    while r not in config:
        drops: set[int] = set()
        nxt: list[int] = []
        for v in wave:
            for w in g.children(v):
                if w in missing_parents:
                    missing_parents[w] -= 1
                    if missing_parents[w] == 0:
                        nxt.append(w)
            for u in g.parents(v):
                if u in needed_children:
                    needed_children[u] -= 1
                    if needed_children[u] == 0 and u in working and u not in keep:
                        drops.add(u)
        working |= set(wave)
        working -= drops
        yield (set(wave), drops)
        wave = nxt
    working.discard(r)
    tail = (working - keep) | ({r} - keep) | chain_drop
    yield ({li}, tail)


def greedy_full(view: ArenaView) -> Iterator[tuple[set[int], set[int]]]:
    """Keep the whole base pebbled; answer every challenge in one round."""
    spec = view.spec
    keep = set(range(1, spec.n_base + 1))
    yield from _base_sweep(view, keep)
    for i in range(1, spec.n_chal + 1):
        yield from _answer_challenge(view, i, keep)


def checkpoint(gap: int) -> Strategy:
    """Keep every gap-th base node; recompute challenge parents on demand."""
    if gap < 1:
        raise ValueError(f"gap must be >= 1, got {gap}")

    def strat(view: ArenaView) -> Iterator[tuple[set[int], set[int]]]:
        spec = view.spec
        keep = set(range(1, spec.n_base + 1, gap))
        yield from _base_sweep(view, keep)
        for i in range(1, spec.n_chal + 1):
            yield from _answer_challenge(view, i, keep)

    return strat


def minimal_line(view: ArenaView) -> Iterator[tuple[set[int], set[int]]]:
    """Checkpoint strategy with a single persistent base pebble."""
    yield from checkpoint(view.spec.n_base)(view)


def strategy_by_name(name: str) -> Strategy:
    """Parse 'greedy', 'checkpoint:GAP', or 'minimal'."""
    if name == "greedy":
        return greedy_full
    if name == "minimal":
        return minimal_line
    if name.startswith("checkpoint:"):
        return checkpoint(int(name.split(":", 1)[1]))
    raise ValueError(f"unknown strategy {name!r}")
