import numpy as np
import pytest

from wlmetric.core import validate_lmmc
from wlmetric.graphs import make_graph, random_graph

ACCEPTANCE_LINES = []


def random_lmmc(rng, n, d=1, lazy=False, sparse=False):
    """Random reversible chain: symmetric weights normalized by rows."""
    w = rng.random((n, n))
    if sparse:
        w *= rng.random((n, n)) < 0.5
    w = w + w.T + (np.eye(n) if lazy or sparse else 0.0)
    kernel = w / w.sum(axis=1, keepdims=True)
    mu = w.sum(axis=1) / w.sum()
    return validate_lmmc(kernel, mu, rng.standard_normal((n, d)))


def random_connected_graph(rng, n, p=0.3, labels=None):
    """Random tree plus G(n, p) edges: no isolated vertices when n >= 2."""
    tree = {(int(rng.integers(0, i)), i) for i in range(1, n)}
    extra = {tuple(e) for e in random_graph(n, p, rng).edges.tolist()}
    return make_graph(n, sorted(tree | extra), labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
