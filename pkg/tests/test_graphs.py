"""Core graph type, traversals, quotients, indegree reduction, file format."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_dags, complete_dag, edge_set, random_dag
from oracles import ancestor_closure, graph_depth, node_depths

from dagpebble.graphs import (
    Dag,
    MetaParams,
    ancestors,
    ancestors_subgraph,
    depth,
    depth_of,
    depths,
    detach_nodes,
    dumps_dagv1,
    induced_subgraph,
    is_topologically_labeled,
    lift_meta_path,
    loads_dagv1,
    metagraph,
    reduce_indegree,
    remove_nodes,
    to_meta,
    topological_order,
    union_graphs,
)
from dagpebble.build import drsample, line_graph


# -- construction ------------------------------------------------------------


def test_dag_basic_accessors():
    g = Dag(5, [(1, 3), (2, 3), (3, 5), (1, 5)])
    assert g.n == 5
    assert g.m == 4
    assert g.parents(3) == (1, 2)
    assert g.parents(5) == (1, 3)
    assert g.parents(4) == ()
    assert g.children(1) == (3, 5)
    assert g.children(4) == ()
    assert g.sources() == [1, 2, 4]
    assert g.sinks() == [4, 5]
    assert g.indegree(5) == 2
    assert g.max_indegree() == 2
    assert g.has_edge(1, 3) and not g.has_edge(3, 1) and not g.has_edge(2, 4)
    assert list(g.nodes()) == [1, 2, 3, 4, 5]


def test_dag_deduplicates_edges():
    g = Dag(3, [(1, 3), (1, 3), (2, 3)])
    assert g.m == 2
    assert g.parents(3) == (1, 2)


@pytest.mark.parametrize("bad", [(0, 1), (2, 2), (3, 2), (1, 4)])
def test_dag_rejects_bad_edges(bad):
    with pytest.raises(ValueError):
        Dag(3, [bad])


def test_dag_rejects_negative_n():
    with pytest.raises(ValueError):
        Dag(-1)


def test_dag_equality_and_hash():
    a = Dag(3, [(1, 2), (2, 3)])
    b = Dag(3, [(2, 3), (1, 2)])
    c = Dag(3, [(1, 3)])
    assert a == b and hash(a) == hash(b)
    assert a != c
    assert a != "not a dag"


def test_edges_sorted_by_target_then_source():
    g = Dag(4, [(2, 4), (1, 4), (1, 2), (3, 4)])
    assert list(g.edges()) == [(1, 2), (1, 4), (2, 4), (3, 4)]


def test_empty_graph():
    g = Dag(0)
    assert g.n == 0 and g.m == 0
    assert depth(g) == 0
    assert g.sinks() == [] and g.sources() == []


# -- depth and ancestors vs oracles -------------------------------------------


def test_depths_against_oracle_exhaustive_small():
    for g in all_dags(4):
        es = edge_set(g)
        want = node_depths(4, es, set())
        got = depths(g)
        assert all(got[v] == want[v] for v in range(1, 5))


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_depths_and_ancestors_match_oracle(data):
    rng = random.Random(data.draw(st.integers(0, 2**32)))
    n = data.draw(st.integers(1, 12))
    g = random_dag(rng, n)
    es = edge_set(g)
    blocked = set(data.draw(st.lists(st.integers(1, n), max_size=4)))
    want = node_depths(n, es, blocked)
    got = depths(g, blocked)
    for v in range(1, n + 1):
        assert got[v] == want.get(v, -1)
    assert depth(g, blocked) == max(graph_depth(n, es, blocked), 0)
    v = data.draw(st.integers(1, n))
    closure = ancestor_closure(n, es, v, blocked)
    assert ancestors(g, v, blocked) == closure - {v}


def test_depth_of_blocked_node_is_minus_one():
    g = line_graph(5)
    assert depth_of(g, 3, {3}) == -1
    assert depth_of(g, 5, {3}) == 1  # path 4 -> 5 survives


def test_ancestors_subgraph_relabels_in_order():
    g = Dag(6, [(1, 3), (2, 3), (3, 6), (4, 5)])
    sub, to_old = ancestors_subgraph(g, 6)
    assert to_old == (1, 2, 3, 6)
    assert sub.n == 4
    assert set(sub.edges()) == {(1, 3), (2, 3), (3, 4)}
    # blocked v gives the empty subgraph
    sub2, to_old2 = ancestors_subgraph(g, 6, {6})
    assert sub2.n == 0 and to_old2 == ()


def test_remove_and_detach_nodes():
    g = Dag(4, [(1, 2), (2, 3), (3, 4), (1, 4)])
    h, to_old = remove_nodes(g, {2})
    assert h.n == 3 and to_old == (1, 3, 4)
    assert set(h.edges()) == {(2, 3), (1, 3)}  # relabeled (3,4),(1,4)
    d = detach_nodes(g, {2})
    assert d.n == 4  # node set unchanged
    assert set(d.edges()) == {(3, 4), (1, 4)}


def test_union_graphs():
    a = Dag(3, [(1, 2)])
    b = Dag(3, [(2, 3), (1, 2)])
    u = union_graphs(a, b)
    assert set(u.edges()) == {(1, 2), (2, 3)}
    with pytest.raises(ValueError):
        union_graphs(a, Dag(4))


def test_induced_subgraph_of_complete():
    g = complete_dag(5)
    sub, to_old = induced_subgraph(g, [2, 4, 5])
    assert to_old == (2, 4, 5)
    assert set(sub.edges()) == {(1, 2), (1, 3), (2, 3)}


# -- metagraph -----------------------------------------------------------------


def test_meta_params_parts_partition_interval():
    for m in (2, 3, 5, 8, 16, 17):
        p = MetaParams(m=m, n_base=4 * m)
        for i in range(1, p.n_meta + 1):
            iv = list(p.interval(i))
            first = list(p.first_part(i))
            mid = list(p.middle_part(i))
            last = list(p.last_part(i))
            assert first + mid + last == iv
            assert len(first) == max(1, -(-m // 5))
            assert len(last) == max(1, m // 5)


def test_meta_params_single_node_intervals():
    # m=1 degenerates: first and last part are both the whole interval
    p = MetaParams(m=1, n_base=3)
    for i in (1, 2, 3):
        assert list(p.first_part(i)) == list(p.last_part(i)) == [i]
        assert list(p.middle_part(i)) == []


def test_meta_params_interval_bounds():
    p = MetaParams(m=4, n_base=10)
    assert p.n_meta == 2
    assert list(p.interval(2)) == [5, 6, 7, 8]
    with pytest.raises(ValueError):
        p.interval(3)


def test_to_meta_drops_remainder_nodes():
    p = MetaParams(m=4, n_base=10)
    assert to_meta([1, 4, 5, 9, 10], p) == {1, 2}  # 9, 10 are remainder


def test_metagraph_of_line_is_meta_line():
    g = line_graph(32)
    meta, p = metagraph(g, 8)
    assert meta.n == 4
    assert set(meta.edges()) == {(1, 2), (2, 3), (3, 4)}


def test_metagraph_requires_full_interval_lines():
    # break the internal line of interval 2 (nodes 9..16): drop edge 11->12
    edges = [(v - 1, v) for v in range(2, 33) if (v - 1, v) != (11, 12)]
    g = Dag(32, edges)
    meta, _ = metagraph(g, 8)
    assert set(meta.edges()) == {(3, 4)}  # interval 2 is isolated


def test_metagraph_commutes_with_detach():
    rng = random.Random(7)
    for _ in range(40):
        n = rng.randint(8, 120)
        g = drsample(n, rng)
        m = rng.choice([1, 2, 4, 8, 16])
        s = set(rng.sample(range(1, n + 1), rng.randint(0, n // 4)))
        meta_of_detached, p = metagraph(detach_nodes(g, s), m)
        detached_meta = detach_nodes(metagraph(g, m)[0], to_meta(s, p))
        assert meta_of_detached == detached_meta


def test_metagraph_rejects_bad_m():
    with pytest.raises(ValueError):
        metagraph(line_graph(4), 0)


def test_lift_meta_path_walks_real_edges():
    rng = random.Random(11)
    for _ in range(20):
        n = rng.choice([64, 128, 256])
        g = drsample(n, rng)
        m = rng.choice([8, 16])
        meta, p = metagraph(g, m)
        # drsample keeps every interval line, so the meta line exists
        meta_path = list(range(1, meta.n + 1))
        path = lift_meta_path(g, p, meta_path)
        assert all(g.has_edge(a, b) for a, b in zip(path, path[1:]))
        d = len(meta_path) - 1
        assert len(path) - 1 >= 3 * m * d / 5


def test_lift_meta_path_rejects_fake_edge():
    g = line_graph(32)  # meta edges only along the line
    _, p = metagraph(g, 8)
    with pytest.raises(ValueError):
        lift_meta_path(g, p, [1, 3])
    with pytest.raises(ValueError):
        lift_meta_path(g, p, [])


# -- indegree reduction ----------------------------------------------------------


def test_reduce_indegree_structure():
    g = Dag(3, [(1, 3), (2, 3)])
    red, rm = reduce_indegree(g)
    assert rm.delta == 2
    assert red.n == 6
    # copy chains
    for v in (1, 2, 3):
        assert red.has_edge(rm.copy_id(v, 1), rm.copy_id(v, 2))
    # j-th parent feeds copy j from its last copy
    assert red.has_edge(rm.last_copy(1), rm.copy_id(3, 1))
    assert red.has_edge(rm.last_copy(2), rm.copy_id(3, 2))
    assert red.max_indegree() <= 2


def test_reduce_map_round_trips():
    rm = reduce_indegree(complete_dag(4))[1]
    for v in range(1, 5):
        for j in range(1, rm.delta + 1):
            c = rm.copy_id(v, j)
            assert rm.base_node(c) == v
            assert rm.copy_index(c) == j
    assert rm.base_set(rm.copies_of({2, 4})) == {2, 4}
    with pytest.raises(ValueError):
        rm.copy_id(5, 1)
    with pytest.raises(ValueError):
        rm.copy_id(1, rm.delta + 1)


def test_reduce_indegree_caps_indegree_at_two():
    rng = random.Random(3)
    for _ in range(20):
        g = random_dag(rng, rng.randint(1, 15), max_indeg=5)
        red, rm = reduce_indegree(g)
        assert red.n == g.n * rm.delta
        assert red.max_indegree() <= 2


def test_reduce_indegree_of_line_is_line():
    g = line_graph(6)
    red, rm = reduce_indegree(g)
    assert rm.delta == 1
    assert red == g


def test_reduce_indegree_rejects_small_delta():
    with pytest.raises(ValueError):
        reduce_indegree(complete_dag(4), delta=2)


def test_reduce_preserves_reachability():
    rng = random.Random(5)
    for _ in range(25):
        n = rng.randint(2, 10)
        g = random_dag(rng, n)
        red, rm = reduce_indegree(g)
        es = edge_set(g)
        red_es = edge_set(red)
        for _ in range(5):
            u, v = rng.randint(1, n), rng.randint(1, n)
            if u >= v:
                continue
            base_reach = v in _descendants(n, es, u)
            red_reach = rm.last_copy(v) in _descendants(
                red.n, red_es, rm.last_copy(u))
            assert base_reach == red_reach


def _descendants(n, edges, src):
    ch = {}
    for a, b in edges:
        ch.setdefault(a, []).append(b)
    seen = {src}
    stack = [src]
    while stack:
        w = stack.pop()
        for c in ch.get(w, ()):
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return seen


# -- canonical file format --------------------------------------------------------


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_dagv1_round_trip(data):
    rng = random.Random(data.draw(st.integers(0, 2**32)))
    g = random_dag(rng, data.draw(st.integers(0, 20)))
    assert loads_dagv1(dumps_dagv1(g)) == g


def test_dagv1_is_canonical_text():
    g = Dag(3, [(1, 2), (1, 3), (2, 3)])
    assert dumps_dagv1(g) == "DAGv1 3 3\n1 2\n1 3\n2 3\n"


@pytest.mark.parametrize("text", [
    "",
    "DAGv2 2 1\n1 2\n",
    "DAGv1 2\n",
    "DAGv1 2 2\n1 2\n",          # promises 2 edges, has 1
    "DAGv1 2 1\n1 2 3\n",        # bad edge line
    "DAGv1 2 1\n2 1\n",          # u >= v
    "DAGv1 3 2\n1 3\n1 2\n",     # not sorted by (target, source)
    "DAGv1 3 2\n1 2\n1 2\n",     # duplicate edge breaks strict ordering
])
def test_dagv1_rejects_malformed(text):
    with pytest.raises(ValueError):
        loads_dagv1(text)


def test_dagv1_file_round_trip(tmp_path):
    from dagpebble.graphs import read_dagv1, write_dagv1

    g = drsample(40, random.Random(1))
    path = str(tmp_path / "g.dag")
    write_dagv1(g, path)
    assert read_dagv1(path) == g


def test_topological_helpers():
    g = Dag(4, [(1, 2), (2, 4)])
    assert topological_order(g) == [1, 2, 3, 4]
    assert is_topologically_labeled([(1, 2), (3, 9)])
    assert not is_topologically_labeled([(2, 2)])
