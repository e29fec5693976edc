"""Graph families and dynamic-spec plumbing."""

from __future__ import annotations

import os
import random
import shutil
from fractions import Fraction

import pytest
from scipy import stats

from oracles import back_parent_pmf

from dagpebble.build import (
    DynamicGraphSpec,
    back_parent,
    drsample,
    dynamize,
    egsample,
    grates,
    line_graph,
    load_spec,
    sample_dynamic,
    save_spec,
    scrypt_spec,
    write_base_and_spec,
)
from dagpebble.graphs import reduce_indegree, union_graphs, write_dagv1


# -- line ----------------------------------------------------------------------


def test_line_graph():
    g = line_graph(5)
    assert list(g.edges()) == [(1, 2), (2, 3), (3, 4), (4, 5)]
    assert line_graph(1).m == 0
    assert line_graph(0).n == 0


# -- drsample --------------------------------------------------------------------


def test_drsample_contains_line_and_caps_indegree():
    g = drsample(200, random.Random(1))
    for v in range(2, 201):
        assert g.has_edge(v - 1, v)
        assert 1 <= g.indegree(v) <= 2
    assert g.indegree(1) == 0


def test_drsample_deterministic_from_int_seed():
    assert drsample(128, 42) == drsample(128, 42)
    assert drsample(128, 42) != drsample(128, 43)


def test_drsample_tiny():
    assert drsample(1, 0).n == 1
    assert list(drsample(2, 0).edges()) == [(1, 2)]  # back edge collapses


def test_back_parent_support_and_floor():
    # exact pmf: full support [1, v-1] and the tight local-bias floor
    for v in list(range(2, 257)) + [512, 1024]:
        b = (v - 1).bit_length()
        pmf = back_parent_pmf(v)
        assert sum(pmf.values()) == 1
        assert set(pmf) == set(range(1, v))
        for u, p in pmf.items():
            assert p >= Fraction(1, 2 * b * (v - u))


def test_back_parent_matches_exact_pmf():
    v, draws = 37, 20000
    pmf = back_parent_pmf(v)
    rng = random.Random(20260815)
    counts = {u: 0 for u in pmf}
    for _ in range(draws):
        counts[back_parent(v, rng)] += 1
    order = sorted(pmf)
    res = stats.chisquare(
        [counts[u] for u in order], [float(pmf[u]) * draws for u in order]
    )
    assert res.pvalue > 1e-6


# -- grates ------------------------------------------------------------------------


def test_grates_frozen_small_instance():
    g = grates(8, 0.5)  # four layers of two, prefix width 2
    line = {(v - 1, v) for v in range(2, 9)}
    cross = {(1, 3), (2, 4), (3, 5), (4, 6), (5, 7), (6, 8)}
    assert set(g.edges()) == line | cross


def test_grates_eps_two_is_a_line():
    assert grates(16, 2.0) == line_graph(16)


def test_grates_deterministic_and_bounded():
    a = grates(100, 0.4)
    assert a == grates(100, 0.4)
    assert a.max_indegree() <= 2
    for v in range(2, 101):
        assert a.has_edge(v - 1, v)


@pytest.mark.parametrize("eps", [0, -1, 2.5])
def test_grates_rejects_bad_eps(eps):
    with pytest.raises(ValueError):
        grates(8, eps)


def test_grates_handles_more_layers_than_nodes():
    g = grates(3, 0.01)  # layers clamp to n
    assert g == line_graph(3)


# -- egsample ------------------------------------------------------------------------


def test_egsample_is_reduced_union():
    red, rm = egsample(64, 0.5, rng=7)
    want = reduce_indegree(union_graphs(drsample(64, 7), grates(64, 0.5)))[0]
    assert red == want
    assert rm.delta == 3
    assert red.n == 192
    assert red.max_indegree() <= 2


def test_egsample_deterministic():
    assert egsample(32, 0.5, rng=9)[0] == egsample(32, 0.5, rng=9)[0]


# -- dynamic specs ----------------------------------------------------------------------


def test_spec_chain_layout():
    spec = dynamize(drsample(10, 0), 4)
    assert spec.n_base == 10 and spec.n_chal == 4 and spec.n_total == 14
    assert [spec.chain_node(i) for i in (1, 2, 3, 4)] == [11, 12, 13, 14]
    assert spec.chain_pred(1) == 10
    assert spec.chain_pred(3) == 12
    with pytest.raises(ValueError):
        spec.chain_node(5)


def test_spec_validation():
    with pytest.raises(ValueError):
        DynamicGraphSpec(base=line_graph(4), n_chal=0)
    with pytest.raises(ValueError):
        DynamicGraphSpec(base=line_graph(4), n_chal=2, rule="markov")
    with pytest.raises(ValueError):
        DynamicGraphSpec(base=line_graph(0), n_chal=1)


def test_static_and_realized_graphs():
    spec = dynamize(line_graph(3), 2)
    st_edges = set(spec.static_graph().edges())
    assert st_edges == {(1, 2), (2, 3), (3, 4), (4, 5)}
    g = spec.realize([2, 3])
    assert set(g.edges()) == st_edges | {(2, 4), (3, 5)}
    with pytest.raises(ValueError):
        spec.realize([2])
    with pytest.raises(ValueError):
        spec.realize([0, 1])


def test_sample_challenges_in_range():
    spec = scrypt_spec(16)
    rng = random.Random(3)
    ch = spec.sample_challenges(rng)
    assert len(ch) == 16
    assert all(1 <= r <= 16 for r in ch)


def test_sample_dynamic_matches_realize():
    spec = dynamize(drsample(20, 1), 5)
    ch, g = sample_dynamic(spec, 11)
    ch2, g2 = sample_dynamic(spec, 11)
    assert ch == ch2 and g == g2
    assert g == spec.realize(ch)


def test_scrypt_spec_shape():
    spec = scrypt_spec(8)
    assert spec.base == line_graph(8)
    assert spec.n_chal == 8


# -- spec files -------------------------------------------------------------------------


def test_spec_bundle_round_trip(tmp_path):
    spec = dynamize(drsample(24, 5), 6)
    base_out = str(tmp_path / "base.dag")
    spec_out = str(tmp_path / "spec.json")
    write_base_and_spec(spec, base_out, spec_out)
    loaded = load_spec(spec_out)
    assert loaded == spec
    assert loaded.rule == "uniform"


def test_spec_bundle_is_relocatable(tmp_path):
    spec = dynamize(line_graph(6), 2)
    src = tmp_path / "a"
    dst = tmp_path / "b"
    src.mkdir()
    write_base_and_spec(spec, str(src / "base.dag"), str(src / "spec.json"))
    shutil.move(str(src), str(dst))
    assert load_spec(str(dst / "spec.json")) == spec


def test_save_spec_requires_base_path(tmp_path):
    spec = dynamize(line_graph(4), 1)  # no base_path recorded
    with pytest.raises(ValueError):
        save_spec(spec, str(tmp_path / "spec.json"))


def test_load_spec_rejects_bad_version(tmp_path):
    spec = dynamize(line_graph(4), 1)
    write_base_and_spec(spec, str(tmp_path / "b.dag"), str(tmp_path / "s.json"))
    text = (tmp_path / "s.json").read_text().replace("dagspec-v1", "dagspec-v9")
    (tmp_path / "s.json").write_text(text)
    with pytest.raises(ValueError):
        load_spec(str(tmp_path / "s.json"))


def test_load_spec_rejects_node_count_mismatch(tmp_path):
    spec = dynamize(line_graph(4), 1)
    write_base_and_spec(spec, str(tmp_path / "b.dag"), str(tmp_path / "s.json"))
    write_dagv1(line_graph(5), str(tmp_path / "b.dag"))
    with pytest.raises(ValueError):
        load_spec(str(tmp_path / "s.json"))


def test_spec_equality_ignores_paths(tmp_path):
    a = dynamize(line_graph(4), 2)
    b = dynamize(line_graph(4), 2, base_path=str(tmp_path / "x.dag"))
    assert a == b
    assert a != dynamize(line_graph(4), 3)
    assert a != "spec"
