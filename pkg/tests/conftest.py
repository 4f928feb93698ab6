"""Shared fixtures and brute-force helpers for the test suite."""
from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest

from topotsp.graph import Instance, Tour, UnionFind, make_edge


@pytest.fixture
def collinear4() -> Instance:
    """Four collinear points at x = 0, 1, 3, 7."""
    xs = np.array([0.0, 1.0, 3.0, 7.0])
    d = np.abs(xs[:, None] - xs[None, :])
    return Instance(d, name="collinear4")


@pytest.fixture
def unit_square() -> Instance:
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    d = np.hypot(pts[:, 0, None] - pts[None, :, 0], pts[:, 1, None] - pts[None, :, 1])
    return Instance(d, name="unit-square", coords=pts)


def random_instance(n: int, seed: int, metric: bool = True) -> Instance:
    rng = np.random.default_rng(seed)
    if metric:
        pts = rng.random((n, 2))
        d = np.hypot(pts[:, 0, None] - pts[None, :, 0], pts[:, 1, None] - pts[None, :, 1])
        return Instance(d, name=f"rand-euc-{n}-{seed}", coords=pts)
    w = rng.uniform(1e-9, 1.0, size=(n, n))
    d = np.triu(w, 1)
    d = d + d.T
    return Instance(d, name=f"rand-sym-{n}-{seed}")


def enumerate_spanning_trees(n: int) -> list[list[tuple[int, int]]]:
    """All spanning trees on n labeled vertices, by brute subset filtering."""
    all_edges = list(combinations(range(n), 2))
    trees = []
    for subset in combinations(all_edges, n - 1):
        uf = UnionFind(n)
        if all(uf.union(u, v) for u, v in subset):
            trees.append(list(subset))
    return trees


def spanning_tree_weight(inst: Instance, edges: list[tuple[int, int]]) -> float:
    return float(sum(inst.dist[u, v] for u, v in edges))


def enumerate_one_trees(inst: Instance, special: int):
    """All 1-trees of an instance: (total, tree_edges, attach_pair) triples."""
    n = inst.n
    rest = [v for v in range(n) if v != special]
    relabel = {k: v for k, v in enumerate(rest)}
    out = []
    for tree in enumerate_spanning_trees(n - 1):
        tree_edges = [(relabel[u], relabel[v]) for u, v in tree]
        tree_w = spanning_tree_weight(inst, tree_edges)
        for a, b in combinations(rest, 2):
            total = tree_w + inst.dist[special, a] + inst.dist[special, b]
            out.append((total, tree_edges, (a, b)))
    return out


def brute_force_alpha(inst: Instance, special: int, i: int, j: int) -> float:
    """Alpha score by exhaustive 1-tree enumeration (small n only)."""
    ots = enumerate_one_trees(inst, special)
    best = min(t for t, _, _ in ots)

    def contains(tree_edges, attach, u, v) -> bool:
        uv = (u, v) if u < v else (v, u)
        edges = [tuple(sorted(e)) for e in tree_edges]
        edges += [tuple(sorted((special, a))) for a in attach]
        return uv in edges

    best_forced = min(t for t, tree, att in ots if contains(tree, att, i, j))
    return best_forced - best


def make_tour(inst: Instance, order) -> Tour:
    return Tour(inst, order)


def tour_edge_set(inst: Instance, tour: Tour) -> set[tuple[int, int, float]]:
    return {make_edge(int(tour.order[k]), int(tour.order[(k + 1) % inst.n]),
                      inst.dist[tour.order[k], tour.order[(k + 1) % inst.n]])
            for k in range(inst.n)}
