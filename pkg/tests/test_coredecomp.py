import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make
from fedinet.coredecomp import VARIANTS, core_decomposition, core_link_profile, innermost_core
from fedinet.errors import ValidationError
from fedinet.graph import induced_subgraph
from fedinet.testkit import gnp_directed, oracle


def k4(extra=()):
    return make([(a, b) for a in "abcd" for b in "abcd" if a < b] + list(extra))


def test_k4_total():
    cm = core_decomposition(k4())
    assert cm.coreness.tolist() == [3, 3, 3, 3] and cm.degeneracy == 3


def test_bidirected_k4_all_variants():
    g = make([(a, b) for a in "abcd" for b in "abcd" if a != b])
    assert core_decomposition(g, "total").degeneracy == 6
    assert core_decomposition(g, "in").coreness.tolist() == [3] * 4
    assert core_decomposition(g, "out").coreness.tolist() == [3] * 4


def test_star_coreness_one():
    g = make([("h", f"l{i}") for i in range(5)])
    cm = core_decomposition(g)
    assert set(cm.coreness.tolist()) == {1} and cm.degeneracy == 1


def test_unknown_variant():
    with pytest.raises(ValidationError):
        core_decomposition(k4(), "both")


def test_innermost_core_drops_pendant():
    g = k4([("d", "e")])
    core = innermost_core(g, core_decomposition(g))
    assert sorted(core.labels) == list("abcd") and core.m == 6


def test_profile_star_leaf_to_hub():
    g = make([(f"l{i}", "h") for i in range(4)])
    prof = core_link_profile(g, core_decomposition(g))
    assert prof.rows == [(1, 4, 4)]
    assert prof.innermost_edge_fraction == 1.0


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 60), st.floats(0.0, 0.4), st.integers(0, 100_000))
def test_matches_deletion_oracle(n, p, seed):
    g = gnp_directed(n, p, seed)
    for variant in VARIANTS:
        cm = core_decomposition(g, variant)
        assert cm.coreness.tolist() == oracle("cores", g, variant)
        assert cm.degeneracy == (max(cm.coreness.tolist()) if n else 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), st.floats(0.05, 0.4), st.integers(0, 100_000))
def test_profile_conserves_edges_and_matches_tally(n, p, seed):
    g = gnp_directed(n, p, seed)
    cm = core_decomposition(g)
    prof = core_link_profile(g, cm)
    assert sum(r[1] for r in prof.rows) == g.m == sum(r[2] for r in prof.rows)
    c = cm.coreness.tolist()
    tally = {}
    for i, j, _ in g.edges():
        tally.setdefault(c[j], [0, 0])[0] += 1
        tally.setdefault(c[i], [0, 0])[1] += 1
    for k, inc, out in prof.rows:
        assert [inc, out] == tally.get(k, [0, 0])


@settings(max_examples=20, deadline=None)
@given(st.integers(5, 30), st.integers(0, 100_000), st.integers(1, 4))
def test_kcore_subgraph_is_brute_force_core(n, seed, k):
    g = gnp_directed(n, 0.25, seed)
    cm = core_decomposition(g)
    sub = induced_subgraph(g, cm.coreness >= k)
    want = np.array(oracle("cores", g, "total")) >= k
    assert sorted(sub.labels) == sorted(np.array(g.labels)[want].tolist())
    if sub.n:
        assert sub.degree.min() >= k
