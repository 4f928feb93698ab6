"""Core graph structures: instances, tours, spanning trees, 1-trees, union-find.

Everything downstream (barcodes, local search, exact solvers) consumes these.
Instances and trees are immutable once built and safe to share across threads;
UnionFind and Tour are cheap single-owner mutable structures.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

# An undirected weighted edge, endpoints normalized so u < v.
Edge = tuple[int, int, float]


class InvalidInstanceError(ValueError):
    """Raised when a distance matrix or derived argument is unusable."""


class WeightKind(str, Enum):
    EUC_2D = "EUC_2D"
    GEO = "GEO"
    ATT = "ATT"
    EXPLICIT = "EXPLICIT"
    SYNTHETIC = "SYNTHETIC"


def edge_key(u: int, v: int, w: float) -> tuple[float, int, int]:
    """Global tie rule: edges sort by (weight, min endpoint, max endpoint)."""
    return (w, u, v) if u < v else (w, v, u)


def make_edge(u: int, v: int, w: float) -> Edge:
    return (u, v, float(w)) if u < v else (v, u, float(w))


@dataclass(frozen=True)
class Instance:
    """Symmetric TSP instance: dense non-negative distance matrix plus metadata."""

    dist: np.ndarray
    name: str = "instance"
    coords: np.ndarray | None = None
    weight_kind: WeightKind = WeightKind.SYNTHETIC

    def __post_init__(self) -> None:
        d = np.asarray(self.dist, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InvalidInstanceError(f"distance matrix must be square, got {d.shape}")
        if d.shape[0] < 2:
            raise InvalidInstanceError("instance needs at least 2 cities")
        if not np.all(np.isfinite(d)):
            raise InvalidInstanceError("distances must be finite")
        if np.any(d < 0):
            raise InvalidInstanceError("distances must be non-negative")
        if np.any(np.diagonal(d) != 0.0):
            raise InvalidInstanceError("diagonal must be zero")
        if not np.array_equal(d, d.T):
            raise InvalidInstanceError("distance matrix must be symmetric")
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        if self.coords is not None:
            c = np.asarray(self.coords, dtype=np.float64)
            if c.shape != (d.shape[0], 2):
                raise InvalidInstanceError(f"coords shape {c.shape} != ({d.shape[0]}, 2)")
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def w(self, u: int, v: int) -> float:
        return float(self.dist[u, v])


class Tour:
    """Cyclic visit order over all cities, with its total length cached."""

    __slots__ = ("order", "length")

    def __init__(self, inst: Instance, order: Sequence[int] | np.ndarray):
        arr = np.asarray(order, dtype=np.intp)
        n = inst.n
        if arr.shape != (n,) or not np.array_equal(np.sort(arr), np.arange(n)):
            raise ValueError("tour order must be a permutation of 0..n-1")
        self.order = arr
        self.length = cycle_length(inst.dist, arr)

    @property
    def n(self) -> int:
        return len(self.order)

    def edges(self, inst: Instance) -> list[Edge]:
        """Tour edges in visit order, endpoints normalized."""
        o = self.order
        return [make_edge(int(o[i]), int(o[(i + 1) % len(o)]), inst.dist[o[i], o[(i + 1) % len(o)]])
                for i in range(len(o))]

    def __repr__(self) -> str:
        return f"Tour(len={self.length:.6g}, order={self.order.tolist()})"


@dataclass(frozen=True)
class SpanningTree:
    """A spanning tree as a list of weighted edges (sorted by the tie rule)."""

    edges: tuple[Edge, ...]
    total: float


@dataclass(frozen=True)
class OneTree:
    """Spanning tree of G minus `special`, plus two edges attaching `special`."""

    tree: SpanningTree
    special: int
    attach: tuple[Edge, Edge]
    total: float

    def degrees(self, n: int) -> np.ndarray:
        deg = np.zeros(n, dtype=np.intp)
        for u, v, _ in self.tree.edges:
            deg[u] += 1
            deg[v] += 1
        for u, v, _ in self.attach:
            deg[u] += 1
            deg[v] += 1
        return deg


class UnionFind:
    """Disjoint sets over 0..n-1 with path compression and union by rank."""

    __slots__ = ("parent", "rank", "components")

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.components = n

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1
        self.components -= 1
        return True

    def connected(self, x: int, y: int) -> bool:
        return self.find(x) == self.find(y)

    def copy(self) -> "UnionFind":
        clone = UnionFind.__new__(UnionFind)
        clone.parent = self.parent.copy()
        clone.rank = self.rank.copy()
        clone.components = self.components
        return clone


def cycle_length(dist: np.ndarray, order: np.ndarray) -> float:
    return float(dist[order, np.roll(order, -1)].sum())


def tour_length(inst: Instance, tour: Tour | Sequence[int]) -> float:
    order = tour.order if isinstance(tour, Tour) else np.asarray(tour, dtype=np.intp)
    return cycle_length(inst.dist, order)


def path_length(inst: Instance, tour: Tour, dropped_edge: tuple[int, int]) -> float:
    """Length of the Hamiltonian path left after removing one tour edge."""
    u, v = dropped_edge
    o = tour.order
    n = len(o)
    pairs = {(int(o[i]), int(o[(i + 1) % n])) for i in range(n)}
    if (u, v) not in pairs and (v, u) not in pairs:
        raise ValueError(f"edge ({u}, {v}) is not in the tour")
    return tour_length(inst, tour) - inst.w(u, v)


def _prim(dist: np.ndarray, vertices: np.ndarray) -> list[Edge]:
    """Dense Prim over the given vertex subset, deterministic under the tie rule.

    At every step the frontier edge minimizing (weight, min endpoint,
    max endpoint) is taken, so equal-weight choices are reproducible.
    """
    m = len(vertices)
    if m == 1:
        return []
    sub = dist[np.ix_(vertices, vertices)]
    in_tree = np.zeros(m, dtype=bool)
    in_tree[0] = True
    key = sub[0].copy()
    parent = np.zeros(m, dtype=np.intp)
    key[0] = np.inf
    edges: list[Edge] = []
    idx = np.arange(m)
    for _ in range(m - 1):
        masked = np.where(in_tree, np.inf, key)
        best = masked.min()
        cand = np.nonzero(masked == best)[0]
        if len(cand) > 1:
            # tie rule on original labels
            pick = min(cand, key=lambda c: edge_key(int(vertices[parent[c]]), int(vertices[c]), 0.0)[1:])
        else:
            pick = cand[0]
        v = int(pick)
        in_tree[v] = True
        edges.append(make_edge(int(vertices[parent[v]]), int(vertices[v]), best))
        w = sub[v]
        better = w < key
        ties = w == key
        if ties.any():
            new_lo = np.minimum(idx, v)
            new_hi = np.maximum(idx, v)
            old_lo = np.minimum(idx, parent)
            old_hi = np.maximum(idx, parent)
            # map to original labels for the comparison
            nl, nh = vertices[new_lo], vertices[new_hi]
            ol, oh = vertices[old_lo], vertices[old_hi]
            better |= ties & ((nl < ol) | ((nl == ol) & (nh < oh)))
        better &= ~in_tree
        key = np.where(better, w, key)
        parent = np.where(better, v, parent)
    edges.sort(key=lambda e: edge_key(*e))
    return edges


def compute_mst(inst: Instance) -> SpanningTree:
    """Minimum spanning tree of the complete instance graph (dense Prim)."""
    edges = _prim(inst.dist, np.arange(inst.n))
    return SpanningTree(tuple(edges), float(np.fromiter((e[2] for e in edges), dtype=np.float64, count=len(edges)).sum()))


def kruskal_mst(edges: Iterable[Edge], n: int) -> list[Edge]:
    """Minimum spanning forest of an arbitrary edge list (tie rule order)."""
    uf = UnionFind(n)
    out: list[Edge] = []
    for u, v, w in sorted(edges, key=lambda e: edge_key(*e)):
        if uf.union(u, v):
            out.append(make_edge(u, v, w))
    return out


def compute_one_tree(inst: Instance, special: int = 0,
                     forced_edge: tuple[int, int] | None = None) -> OneTree:
    """Minimal 1-tree: MST of G minus `special` plus the two cheapest edges
    attaching `special`, optionally constrained to contain `forced_edge`."""
    n = inst.n
    if n < 3:
        raise InvalidInstanceError("a 1-tree needs at least 3 vertices")
    if not 0 <= special < n:
        raise ValueError(f"special vertex {special} out of range")
    if forced_edge is not None:
        fi, fj = forced_edge
        if fi == fj:
            raise ValueError("forced edge endpoints must be distinct")
    rest = np.array([v for v in range(n) if v != special], dtype=np.intp)
    if forced_edge is not None and special in forced_edge:
        tree_edges = _prim(inst.dist, rest)
    elif forced_edge is not None:
        # force (i, j) into the sub-MST: union it first, Kruskal the rest
        fi, fj = forced_edge
        pos = {int(v): k for k, v in enumerate(rest)}
        uf = UnionFind(n - 1)
        uf.union(pos[fi], pos[fj])
        tree_edges = [make_edge(fi, fj, inst.dist[fi, fj])]
        all_edges = [make_edge(int(rest[a]), int(rest[b]), inst.dist[rest[a], rest[b]])
                     for a in range(n - 1) for b in range(a + 1, n - 1)]
        for u, v, w in sorted(all_edges, key=lambda e: edge_key(*e)):
            if uf.union(pos[u], pos[v]):
                tree_edges.append(make_edge(u, v, w))
        tree_edges.sort(key=lambda e: edge_key(*e))
    else:
        tree_edges = _prim(inst.dist, rest)
    tree_total = float(sum(e[2] for e in tree_edges))
    tree = SpanningTree(tuple(tree_edges), tree_total)

    attach_all = sorted((make_edge(special, int(v), inst.dist[special, v]) for v in rest),
                        key=lambda e: edge_key(*e))
    if forced_edge is not None and special in forced_edge:
        other = forced_edge[1] if forced_edge[0] == special else forced_edge[0]
        forced_attach = make_edge(special, other, inst.dist[special, other])
        rest_attach = [e for e in attach_all if e != forced_attach]
        attach = tuple(sorted((forced_attach, rest_attach[0]), key=lambda e: edge_key(*e)))
    else:
        attach = (attach_all[0], attach_all[1])
    total = tree_total + attach[0][2] + attach[1][2]
    return OneTree(tree, special, attach, float(total))


def nearest_neighbor_tour(inst: Instance, start: int | None = 0, seed: int | None = None) -> Tour:
    """Greedy nearest-neighbor tour; equal distances break toward the smaller index.

    With start=None the start city is drawn from the seeded RNG.
    """
    n = inst.n
    if start is None:
        start = int(np.random.default_rng(seed).integers(n))
    if not 0 <= start < n:
        raise ValueError(f"start city {start} out of range")
    d = inst.dist
    visited = np.zeros(n, dtype=bool)
    order = np.empty(n, dtype=np.intp)
    order[0] = start
    visited[start] = True
    cur = start
    for i in range(1, n):
        row = np.where(visited, np.inf, d[cur])
        cur = int(np.argmin(row))  # argmin takes the first minimum: index tie-break
        order[i] = cur
        visited[cur] = True
    return Tour(inst, order)


def random_tour(inst: Instance, seed: int | None = None) -> Tour:
    rng = np.random.default_rng(seed)
    return Tour(inst, rng.permutation(inst.n))
