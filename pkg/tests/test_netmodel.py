import pytest
from hypothesis import given, settings, strategies as st

from conftest import make
from fedinet.errors import ConfigurationError, ParseError, ValidationError
from fedinet.graph import NodeMeta, Platform, Status
from fedinet.netmodel import (ProjectionStats, UserEdgeRecord, expanded_network,
                              load_user_graph, online_subnetwork, project_to_instances,
                              read_user_edges, write_user_edges)
from fedinet.testkit import federated_sim
from fedinet.testkit.oracles import projection

ON = NodeMeta(Status.ONLINE, Platform.MASTODON)
OFF = NodeMeta(Status.OFFLINE, Platform.MASTODON)


def U(su, si, tu, ti):
    return UserEdgeRecord(su, si, tu, ti)


def test_multiplicity_counts_user_pairs():
    g = project_to_instances([U("u1", "A", "v", "B"), U("u2", "A", "v", "B")])
    assert list(g.labelled_edges()) == [("A", "B", 2.0)]


def test_intra_instance_follow_dropped():
    st_ = ProjectionStats()
    g = project_to_instances([U("u", "A", "v", "A")], stats=st_)
    assert g.m == 0 and st_.intra_instance == 1


def test_duplicate_records_count_once():
    st_ = ProjectionStats()
    g = project_to_instances([U("u", "A", "v", "B")] * 2, stats=st_)
    assert list(g.labelled_edges()) == [("A", "B", 1.0)]
    assert st_.duplicates == 1


def test_distinct_source_users_rule():
    recs = [U("u", "A", "v", "B"), U("u", "A", "w", "B"), U("x", "A", "v", "B")]
    assert project_to_instances(recs).weight.tolist() == [3.0]
    assert project_to_instances(recs, distinct_source_users=True).weight.tolist() == [2.0]


def test_self_follow_rejected():
    with pytest.raises(ValidationError):
        project_to_instances([U("u", "A", "u", "A")])


def test_user_file_round_trip_and_errors(tmp_path):
    recs = [U("u", "A", "v", "B"), U("w", "B", "u", "A")]
    write_user_edges(recs, tmp_path / "u.tsv")
    assert read_user_edges(tmp_path / "u.tsv") == recs
    (tmp_path / "bad.tsv").write_text("u\tA\tv\n")
    with pytest.raises(ParseError):
        read_user_edges(tmp_path / "bad.tsv")


def test_online_subnetwork_small():
    g = make([("A", "B"), ("B", "C")], meta={"A": ON, "B": ON, "C": OFF})
    sub = online_subnetwork(g)
    assert list(sub.labelled_edges()) == [("A", "B", 1.0)]


def test_online_all_offline_is_empty():
    g = make([("A", "B")], meta={"A": OFF, "B": OFF})
    assert online_subnetwork(g).n == 0


def test_online_needs_status():
    with pytest.raises(ConfigurationError):
        online_subnetwork(make([("A", "B")]))


def test_online_drop_isolated_flag():
    g = make([("A", "B"), ("C", "B")], meta={"A": ON, "B": OFF, "C": ON})
    assert online_subnetwork(g).n == 2
    assert online_subnetwork(g, drop_isolated=True).n == 0


def test_expanded_network_adds_other_platform():
    g = make([], meta={"A": ON})
    h = expanded_network(g, [("A", "X", 1)])
    assert h.n == 2
    assert h.meta[h.index["X"]].platform is Platform.OTHER
    assert h.meta[h.index["A"]].platform is Platform.MASTODON


def test_expanded_rejects_outside_edges_and_lists_them():
    g = make([("A", "B")])
    with pytest.raises(ValidationError) as err:
        expanded_network(g, [("A", "X", 1), ("X", "Y", 1), ("P", "Q", 2)])
    assert "X->Y" in str(err.value) and "P->Q" in str(err.value)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.booleans())
def test_projection_matches_set_oracle(seed, distinct):
    sim = federated_sim(instances=15, user_mu=1.5, follows_mean=3, seed=seed)
    g = project_to_instances(sim.users, distinct_source_users=distinct)
    got = {(s, t): w for s, t, w in g.labelled_edges()}
    assert got == projection(sim.users, distinct)


def test_load_user_graph(tmp_path):
    sim = federated_sim(instances=10, seed=2)
    write_user_edges(sim.users, tmp_path / "u.tsv")
    g, stats = load_user_graph(tmp_path / "u.tsv")
    assert stats.records == len(sim.users)
    assert g.m == len(projection(sim.users))
