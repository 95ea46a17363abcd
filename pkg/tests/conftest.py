"""Shared graph builders for the test suite.  Everything is seeded."""

from __future__ import annotations

import numpy as np
import pytest

from bufpart import Graph


def triangle() -> Graph:
    return Graph.build(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


def k4() -> Graph:
    edges = [(u, v, 1.0) for u in range(4) for v in range(u + 1, 4)]
    return Graph.build(4, edges)


def path(costs) -> Graph:
    edges = [(i, i + 1, c) for i, c in enumerate(costs)]
    return Graph.build(len(costs) + 1, edges)


def cycle(n: int) -> Graph:
    edges = [(i, (i + 1) % n, 1.0) for i in range(n)]
    return Graph.build(n, edges)


def clique(n: int, offset: int = 0, cost: float = 1.0):
    return [(offset + u, offset + v, cost) for u in range(n) for v in range(u + 1, n)]


def disjoint_cliques(sizes) -> Graph:
    edges = []
    start = 0
    for s in sizes:
        edges.extend(clique(s, start))
        start += s
    return Graph.build(start, edges)


def clique_labels(sizes) -> np.ndarray:
    return np.repeat(np.arange(len(sizes)), sizes)


def planted(sizes, p_in: float, p_out: float, seed: int,
            weights=None) -> tuple[Graph, np.ndarray]:
    """Planted-partition graph; retries isolated vertices away by reseeding."""
    rng = np.random.default_rng(seed)
    labels = clique_labels(sizes)
    n = int(labels.size)
    for _ in range(50):
        edges = []
        touched = np.zeros(n, dtype=bool)
        for u in range(n):
            for v in range(u + 1, n):
                p = p_in if labels[u] == labels[v] else p_out
                if rng.random() < p:
                    edges.append((u, v, 1.0))
                    touched[u] = touched[v] = True
        if touched.all():
            return Graph.build(n, edges, weights=weights), labels
    raise RuntimeError("could not build a planted graph without isolated vertices")


def random_regular(n: int, d: int, seed: int) -> Graph:
    """Circulant d-regular graph randomized by double-edge swaps."""
    assert d % 2 == 0 and d < n
    rng = np.random.default_rng(seed)
    edges = set()
    for shift in range(1, d // 2 + 1):
        for u in range(n):
            v = (u + shift) % n
            edges.add((min(u, v), max(u, v)))
    edge_list = sorted(edges)
    for _ in range(20 * len(edge_list)):
        i, j = rng.integers(0, len(edge_list), size=2)
        (a, b), (c, e) = edge_list[i], edge_list[j]
        if len({a, b, c, e}) < 4:
            continue
        new1 = (min(a, c), max(a, c))
        new2 = (min(b, e), max(b, e))
        if new1 in edges or new2 in edges:
            continue
        edges.discard((a, b))
        edges.discard((c, e))
        edges.add(new1)
        edges.add(new2)
        edge_list[i], edge_list[j] = new1, new2
    return Graph.build(n, [(u, v, 1.0) for u, v in sorted(edges)])


def weighted_er(n: int, p: float, seed: int) -> Graph:
    """Connected-ish ER graph with random costs and random vertex weights."""
    rng = np.random.default_rng(seed)
    for _ in range(100):
        edges = []
        touched = np.zeros(n, dtype=bool)
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < p:
                    edges.append((u, v, float(rng.uniform(0.5, 2.0))))
                    touched[u] = touched[v] = True
        if touched.all():
            weights = rng.uniform(0.5, 3.0, size=n)
            return Graph.build(n, edges, weights=weights)
    raise RuntimeError("could not build a weighted ER graph without isolated vertices")


def _connected(n: int, edges) -> bool:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v, _ in edges:
        ra, rb = find(u), find(v)
        if ra != rb:
            parent[ra] = rb
    return len({find(i) for i in range(n)}) == 1


def tiny_connected(n: int, seed: int, default_weights: bool = True) -> Graph:
    """Random connected graph on n <= 10 vertices with unit costs."""
    rng = np.random.default_rng(seed)
    while True:
        edges = [(u, v, 1.0) for u in range(n) for v in range(u + 1, n)
                 if rng.random() < 0.45]
        if edges and _connected(n, edges):
            return Graph.build(n, edges)


def tiny_connected_suite(count: int, sizes=(5, 6, 7, 8), seed0: int = 100):
    graphs = []
    s = seed0
    while len(graphs) < count:
        n = sizes[len(graphs) % len(sizes)]
        graphs.append(tiny_connected(n, s))
        s += 1
    return graphs


def small_solver_suite():
    """Graphs with n <= 64 used for the eigensolver oracle comparison."""
    suite = [
        ("k4", k4()),
        ("triangle", triangle()),
        ("cycle8", cycle(8)),
        ("cycle16", cycle(16)),
        ("path5", path([0.5, 2.0, 1.0, 1.5])),
        ("two_triangles", disjoint_cliques([3, 3])),
        ("three_cliques", disjoint_cliques([4, 5, 6])),
        ("regular16", random_regular(16, 4, 3)),
        ("regular32", random_regular(32, 6, 4)),
        ("regular64", random_regular(64, 8, 5)),
        ("weighted20", weighted_er(20, 0.3, 6)),
        ("weighted48", weighted_er(48, 0.15, 7)),
        ("tiny7", tiny_connected(7, 8)),
    ]
    return suite


@pytest.fixture(scope="session")
def planted4() -> tuple[Graph, np.ndarray]:
    return planted([50, 50, 50, 50], 0.3, 0.01, seed=11)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
