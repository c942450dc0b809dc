import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from graphdist.graph import from_adjacency

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def binary_graphs(draw, min_n=2, max_n=12, n=None):
    if n is None:
        n = draw(st.integers(min_n, max_n))
    bits = draw(st.lists(st.booleans(), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    a = np.zeros((n, n))
    a[np.triu_indices(n, 1)] = bits
    return from_adjacency(a + a.T)


@st.composite
def binary_pairs(draw, min_n=2, max_n=12):
    n = draw(st.integers(min_n, max_n))
    return draw(binary_graphs(n=n)), draw(binary_graphs(n=n))


@st.composite
def weighted_graphs(draw, min_n=2, max_n=10, n=None):
    if n is None:
        n = draw(st.integers(min_n, max_n))
    m = n * (n - 1) // 2
    w = draw(st.lists(st.one_of(st.just(0.0), st.floats(0.05, 5.0)), min_size=m, max_size=m))
    a = np.zeros((n, n))
    a[np.triu_indices(n, 1)] = w
    return from_adjacency(a + a.T)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
