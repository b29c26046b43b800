from __future__ import annotations

from collections import deque

import numpy as np
import pytest

from fogcast.data import bundled_population, bundled_topology
from fogcast.topology import NetworkGraph, all_pairs, build_graph, load_topology
from fogcast.workload import assign_population, load_population


def bfs_distances(graph: NetworkGraph, source: int) -> list[int]:
    """Independent shortest-hop oracle: plain queue BFS."""
    dist = [-1] * graph.n_nodes
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in graph.neighbors(u):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def random_connected_graph(rng: np.random.Generator, n_nodes: int,
                           extra_edges: int) -> NetworkGraph:
    """Random tree plus extra chords; always connected."""
    coords = [(f"n{i}", float(i), float(i)) for i in range(n_nodes)]
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n_nodes)]
    for _ in range(extra_edges):
        u, v = rng.integers(0, n_nodes, size=2)
        if u != v:
            edges.append((int(u), int(v)))
    return build_graph(coords, edges)


@pytest.fixture(scope="session")
def geant():
    return load_topology(bundled_topology())


@pytest.fixture(scope="session")
def geant_hops(geant):
    return all_pairs(geant)


@pytest.fixture(scope="session")
def geant_population(geant):
    return assign_population(geant, load_population(bundled_population()))


@pytest.fixture()
def triangle():
    return build_graph(
        [("a", 0.0, 0.0), ("b", 0.0, 1.0), ("c", 1.0, 0.0)],
        [(0, 1), (1, 2), (0, 2)],
    )


@pytest.fixture()
def chain4():
    # a - b - c - d
    return build_graph(
        [("a", 0.0, 0.0), ("b", 0.0, 1.0), ("c", 0.0, 2.0), ("d", 0.0, 3.0)],
        [(0, 1), (1, 2), (2, 3)],
    )


@pytest.fixture()
def star4():
    # center node 0 with three leaves
    return build_graph(
        [("hub", 0.0, 0.0), ("l1", 1.0, 0.0), ("l2", 0.0, 1.0), ("l3", -1.0, 0.0)],
        [(0, 1), (0, 2), (0, 3)],
    )
