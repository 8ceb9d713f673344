import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make
from fedinet.errors import ConvergenceError, UndefinedStatisticError, ValidationError
from fedinet.ranking import (RankedList, compare_networks, compare_rankings, fagin_intersection,
                             kendall_tau, pagerank, read_ranking, write_ranking)
from fedinet.testkit import gnp_directed, oracle
from fedinet.testkit.oracles import fagin as fagin_oracle, kendall_tau as tau_oracle

R = RankedList.from_order


def test_two_cycle_is_uniform():
    for d in (0.5, 0.85, 0.99):
        r = pagerank(make([("a", "b"), ("b", "a")]), damping=d)
        assert r.scores["a"] == pytest.approx(0.5) and r.scores["b"] == pytest.approx(0.5)


def test_star_hub_dominates():
    r = pagerank(make([(f"l{i}", "h") for i in range(5)]))
    assert r.labels[0] == "h"
    assert all(r.scores["h"] > r.scores[f"l{i}"] for i in range(5))


def test_nonconvergence_raises():
    g = gnp_directed(30, 0.2, seed=1)
    with pytest.raises(ConvergenceError) as err:
        pagerank(g, tol=1e-300, max_iter=3)
    assert err.value.exit_code == 3


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 50), st.floats(0, 0.3), st.integers(0, 100_000), st.booleans())
def test_pagerank_matches_dense_oracle(n, p, seed, weighted):
    g = gnp_directed(n, p, seed, weight_p=0.4)
    r = pagerank(g, weighted=weighted)
    got = np.array([r.scores[lab] for lab in g.labels])
    np.testing.assert_allclose(got, oracle("pagerank", g, weighted=weighted), atol=1e-8, rtol=0)
    assert abs(got.sum() - 1) <= 1e-9


def test_tie_break_is_label_order():
    r = RankedList.from_scores({"b": 0.5, "a": 0.5, "c": 0.9})
    assert r.labels == ("c", "a", "b")


def test_tau_hand_values():
    assert kendall_tau(R("abc"), R("abc")) == 1.0
    assert kendall_tau(R("abc"), R("cba")) == -1.0
    assert kendall_tau(R("abc"), R("bac")) == pytest.approx(1 / 3, abs=0)


def test_tau_uses_shared_labels_only():
    assert kendall_tau(R("abxc"), R("yabc")) == 1.0
    with pytest.raises(UndefinedStatisticError):
        kendall_tau(R("ab"), R("bc"))


def test_fagin_hand_values():
    assert fagin_intersection(R("abc"), R("abc"), 3) == 1.0
    assert fagin_intersection(R("abc"), R("xyz"), 3) == 0.0
    assert fagin_intersection(R("abc"), R("bac"), 3) == pytest.approx(2 / 3, abs=0)
    with pytest.raises(ValidationError):
        fagin_intersection(R("abc"), R("abc"), 4)


perm = st.integers(2, 40).flatmap(lambda n: st.permutations([f"x{i}" for i in range(n)]))


@settings(max_examples=60, deadline=None)
@given(perm, st.randoms(use_true_random=False))
def test_tau_and_fagin_match_oracles(order, rnd):
    other = list(order)
    rnd.shuffle(other)
    assert kendall_tau(R(order), R(other)) == pytest.approx(tau_oracle(order, other), abs=1e-12)
    assert kendall_tau(R(order), R(order[::-1])) == -1.0
    k = rnd.randint(1, len(order))
    assert fagin_intersection(R(order), R(other), k) == \
        pytest.approx(fagin_oracle(order, other, k), abs=1e-12)


def test_compare_rankings_skips_infeasible_depths():
    out = compare_rankings(R("abcd"), R("abdc"), ks=(2, 10))
    assert set(out["fagin"]) == {"2"} and out["shared"] == 4


def test_compare_networks_percentages():
    d = compare_networks({"nodes": 6960, "edges": 216504, "x": None},
                         {"nodes": 4015, "edges": 95221, "x": 1.0})
    assert d["nodes"]["pct_change"] == 73.0
    assert d["edges"]["pct_change"] == 127.0
    assert d["x"]["pct_change"] == "n/a"


def test_compare_identical_reports_is_zero():
    rep = {"nodes": 10, "reciprocity": 0.5, "diameter": 3}
    assert all(v["pct_change"] == 0 for v in compare_networks(rep, rep).values())


def test_ranking_file_round_trip(tmp_path):
    r = pagerank(gnp_directed(20, 0.2, seed=3))
    write_ranking(r, tmp_path / "r.csv", ["meta: 1"])
    back = read_ranking(tmp_path / "r.csv")
    assert back.labels == r.labels
