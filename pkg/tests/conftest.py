import pytest

from fedinet.graph import build_graph


def make(edges, **kw):
    """Graph from (source, target[, weight]) tuples."""
    return build_graph(edges, **kw)


@pytest.fixture
def triangle():
    return make([("a", "b"), ("b", "c"), ("c", "a")])


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running statistical checks")
    config.addinivalue_line("markers", "external: needs a user-supplied dataset")
