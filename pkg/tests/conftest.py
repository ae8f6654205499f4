import numpy as np
import pytest

from commroles import DirectedGraph, Partition

# worked fixture used across modules: nodes 1..6,
# arcs 1->2, 2->1, 1->3, 4->1, 1->5, communities {1,2,3} and {4,5,6}
G1_ARCS = [(1, 2), (2, 1), (1, 3), (4, 1), (1, 5)]


@pytest.fixture
def g1() -> DirectedGraph:
    return DirectedGraph.from_arcs(G1_ARCS, nodes=range(1, 7))


@pytest.fixture
def g1_partition() -> Partition:
    return Partition(np.array([0, 0, 0, 1, 1, 1]))


def random_graph(rng: np.random.Generator, max_n: int = 50):
    """Random simple digraph as (arc list, n); may include isolated nodes."""
    n = int(rng.integers(2, max_n + 1))
    density = float(rng.uniform(0.02, 0.5))
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    return list(zip(src.tolist(), dst.tolist())), n


def random_partition(rng: np.random.Generator, n: int) -> Partition:
    k = int(rng.integers(1, max(2, n // 3) + 1))
    return Partition.densify(rng.integers(0, k, size=n))


def graph_of(arcs, n) -> DirectedGraph:
    return DirectedGraph.from_arcs(arcs, nodes=range(n))
