import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make
from fedinet.errors import OracleRefused, ValidationError
from fedinet.testkit import (GeneratorSpec, federated_sim, gen_graph, generate, gnm_directed,
                             gnp_directed, oracle, planted_partition, powerlaw_sample)
from fedinet.testkit.oracles import binomial_sf, kendall_tau


def test_gnp_edge_cases():
    g = gnp_directed(10, 0)
    assert (g.n, g.m) == (10, 0)
    assert gnp_directed(5, 1).m == 20


def test_same_spec_same_output():
    spec = GeneratorSpec("gnp_directed", {"n": 40, "p": 0.1, "weight_p": 0.5}, seed=12)
    assert list(gen_graph(spec).labelled_edges()) == list(gen_graph(spec).labelled_edges())
    other = GeneratorSpec("gnp_directed", {"n": 40, "p": 0.1, "weight_p": 0.5}, seed=13)
    assert list(gen_graph(spec).labelled_edges()) != list(gen_graph(other).labelled_edges())


def test_spec_json_round_trip():
    spec = GeneratorSpec("planted_partition",
                         {"blocks": 2, "block_size": 5, "p_in": 0.5, "p_out": 0.1}, 3)
    assert GeneratorSpec.from_json(spec.to_json()) == spec


def test_bad_specs():
    with pytest.raises(ValidationError):
        GeneratorSpec("nope")
    with pytest.raises(ValidationError):
        generate(GeneratorSpec("gnp_directed", {"n": 5, "p": 2}))
    with pytest.raises(ValidationError):
        generate(GeneratorSpec("gnp_directed", {"n": 5, "q": 0.1}))
    with pytest.raises(ValidationError):
        gen_graph(GeneratorSpec("poisson_sample", {"lam": 2, "n": 5}))


def test_gnm_exact_edge_count():
    g = gnm_directed(50, 300, seed=2)
    assert g.m == 300


def test_planted_blocks():
    pg = planted_partition(4, 25, 0.3, 0.01, seed=1)
    assert pg.graph.n == 100 and np.bincount(pg.blocks).tolist() == [25] * 4


def test_federated_sim_deterministic():
    a = federated_sim(instances=20, seed=4)
    b = federated_sim(instances=20, seed=4)
    assert a.users == b.users and a.boundary == b.boundary and a.meta == b.meta


def test_powerlaw_sampler_tail_frequency():
    x = powerlaw_sample(2.5, 1, 20_000, seed=1)
    from scipy.special import zeta
    assert np.mean(x == 1) == pytest.approx(1 / zeta(2.5, 1), abs=0.015)


def test_oracle_examples():
    k4 = make([(a, b) for a in "abcd" for b in "abcd" if a < b])
    assert oracle("cores", k4) == [3, 3, 3, 3]
    assert kendall_tau(list("abc"), list("abc")) == 1.0
    assert binomial_sf(2, 4, 0.25) == 0.26171875


def test_oracle_size_guard():
    with pytest.raises(OracleRefused):
        oracle("cores", gnp_directed(300, 0.0))
    with pytest.raises(ValidationError):
        oracle("unknown-kind", gnp_directed(3, 0.0))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 60), st.integers(1, 60), st.floats(0.0, 1.0))
def test_binomial_oracle_agrees_with_scipy(w, t, p):
    from scipy.stats import binom
    if w > t:
        return
    assert binomial_sf(w, t, p) == pytest.approx(float(binom.sf(w - 1, t, p)), abs=1e-12)
