"""Shared fixtures: small graphs with independently verified counts."""

import numpy as np
import pytest

from homemb import FeaturedGraph, load_or_build

# collected by the release-gate tests; echoed after the run so the
# one-line verdicts survive pytest's output capture
GATE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not GATE_LINES:
        return
    terminalreporter.write_sep("-", "release gate")
    for line in GATE_LINES:
        terminalreporter.write_line(line)

# 7-node reference graph.  Known values, checked by hand and by the
# brute-force oracle: rooted triangle count 2 at nodes 0 and 2, rooted
# 3-path count 7 at node 0 and 8 at node 2.
SEVEN_EDGES = [(0, 1), (0, 3), (1, 2), (1, 3), (1, 4), (1, 6), (2, 4), (4, 5)]


@pytest.fixture
def seven_graph() -> FeaturedGraph:
    return load_or_build(7, SEVEN_EDGES, name="seven")


@pytest.fixture
def triangle() -> FeaturedGraph:
    return load_or_build(3, [(0, 1), (1, 2), (0, 2)], name="k3")


@pytest.fixture
def weighted_pair():
    """Two rooted weighted graphs with identical counts for every pattern.

    A star on three nodes with leaf weight 1/2 is indistinguishable from a
    single edge with unit weights when both are rooted at the hub: each leaf
    contributes a factor 1/2 and there are two of them.
    """
    g = FeaturedGraph(3, [(0, 1), (0, 2)], np.array([[1.0], [0.5], [0.5]]), name="star")
    h = FeaturedGraph(2, [(0, 1)], np.array([[1.0], [1.0]]), name="edge")
    return g, h


def random_plain_graph(rng: np.random.Generator, n: int, p: float = 0.4,
                       name: str = "rand") -> FeaturedGraph:
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return load_or_build(n, edges, name=name)


def random_weighted_graph(rng: np.random.Generator, n: int, p: float = 0.4,
                          m: int = 1, name: str = "randw") -> FeaturedGraph:
    g = random_plain_graph(rng, n, p, name)
    feats = rng.uniform(0.1, 2.0, size=(n, m))
    return FeaturedGraph(g.n, g.edges, feats, name=name)
