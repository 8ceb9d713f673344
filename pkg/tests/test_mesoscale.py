import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make
from fedinet.errors import UndefinedStatisticError, ValidationError
from fedinet.mesoscale import (Partition, conductance, conductance_matrix, export_partition,
                               import_partition, louvain, modularity)
from fedinet.testkit import gnp_directed, oracle, planted_partition

TWO_TRIANGLES = [("a", "b"), ("b", "c"), ("c", "a"), ("x", "y"), ("y", "z"), ("z", "x")]


def test_two_triangles():
    g = make(TWO_TRIANGLES)
    for variant in ("undirected_unweighted", "directed_weighted"):
        res = louvain(g, variant, seed=1)
        assert res.partition.count == 2
        assert res.score.value == pytest.approx(0.5)


def test_complete_graph_is_one_community():
    g = make([(a, b) for a in "abcdef" for b in "abcdef" if a != b])
    assert louvain(g).partition.count == 1


def test_two_disjoint_edges():
    g = make([("a", "b"), ("c", "d")])
    assert modularity(g, [0, 0, 0, 0]).value == pytest.approx(0.0)
    assert modularity(g, [0, 0, 1, 1]).value == pytest.approx(0.5)


def test_uncovered_partition_rejected():
    g = make([("a", "b"), ("c", "d")])
    with pytest.raises(ValidationError):
        modularity(g, [0, 0, 1])
    with pytest.raises(ValidationError):
        modularity(g, [0, 0, 1, -1])


def test_normalisation_orders_by_size():
    p = Partition.normalized([5, 5, 9, 9, 9, 2])
    assert p.assignment.tolist() == [1, 1, 0, 0, 0, 2]


def test_conductance_hand_cases():
    g = make(TWO_TRIANGLES + [("c", "x")])
    part = np.array([0, 0, 0, 1, 1, 1])
    assert conductance(g, part, 0, 1) == pytest.approx(1 / 7)
    g2 = make(TWO_TRIANGLES)
    assert conductance(g2, part, 0, 1) == 0.0
    g3 = make([("a", "b")])
    assert conductance(g3, [0, 1], 0, 1) == 1.0


def test_conductance_zero_volume_undefined():
    g = make([("a", "b")], isolated=["q"])
    with pytest.raises(UndefinedStatisticError):
        conductance(g, [0, 0, 1], 0, 1)


def test_conductance_matrix_threshold_flag():
    pg = planted_partition(3, 12, 0.5, 0.02, seed=2)
    part = Partition.normalized(pg.blocks)
    sig = conductance_matrix(pg.graph, part)
    assert sig["communities_considered"] == 3 and set(sig["top_pairs"]) == {"0-1", "0-2", "1-2"}
    small = Partition(part.assignment, threshold=20)
    assert conductance_matrix(pg.graph, small)["average"] is None
    assert conductance_matrix(pg.graph, small, include_insignificant=True)["average"] is not None


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.floats(0.05, 0.4), st.integers(0, 100_000), st.integers(1, 5))
def test_modularity_and_conductance_match_oracles(n, p, seed, k):
    g = gnp_directed(n, p, seed, weight_p=0.5)
    if g.m == 0:
        return
    part = np.random.default_rng(seed).integers(0, k, n)
    for variant in ("undirected_unweighted", "directed_weighted"):
        assert modularity(g, part, variant).value == \
            pytest.approx(oracle("modularity", g, part, variant), abs=1e-12)
    present = sorted(set(part.tolist()))
    for a, b in zip(present, present[1:]):
        for weighted in (False, True):
            try:
                got = conductance(g, part, a, b, weighted)
            except UndefinedStatisticError:
                with pytest.raises(UndefinedStatisticError):
                    oracle("conductance", g, part, a, b, weighted)
                continue
            assert got == pytest.approx(oracle("conductance", g, part, a, b, weighted), abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 100_000))
def test_louvain_levels_never_decrease(seed):
    g = gnp_directed(60, 0.08, seed, weight_p=0.5)
    if g.m == 0:
        return
    for variant in ("undirected_unweighted", "directed_weighted"):
        res = louvain(g, variant, seed=seed)
        h = res.level_modularity
        assert all(b >= a - 1e-12 for a, b in zip(h, h[1:]))
        assert res.score.value == pytest.approx(h[-1])


def test_louvain_is_deterministic_given_seed():
    g = gnp_directed(80, 0.06, seed=4)
    a = louvain(g, "directed_weighted", seed=9).partition.assignment
    b = louvain(g, "directed_weighted", seed=9).partition.assignment
    assert np.array_equal(a, b)


def test_partition_round_trip(tmp_path):
    g = gnp_directed(40, 0.1, seed=5)
    part = louvain(g, seed=2).partition
    export_partition(g, part, tmp_path / "p.tsv")
    back = import_partition(tmp_path / "p.tsv", g)
    assert np.array_equal(back.assignment, part.assignment)


def test_import_single_community_and_missing(tmp_path):
    g = make([("a", "b"), ("b", "c")])
    (tmp_path / "all.tsv").write_text("a\tc0\nb\tc0\nc\tc0\n")
    assert import_partition(tmp_path / "all.tsv", g).count == 1
    (tmp_path / "miss.tsv").write_text("a\tc0\nb\tc0\n")
    with pytest.raises(ValidationError, match="c"):
        import_partition(tmp_path / "miss.tsv", g)


def test_import_warns_about_unknown_labels(tmp_path, caplog):
    g = make([("a", "b")])
    (tmp_path / "p.tsv").write_text("a\t1\nb\t1\nzzz\t2\n")
    import_partition(tmp_path / "p.tsv", g)
    assert "zzz" in caplog.text
