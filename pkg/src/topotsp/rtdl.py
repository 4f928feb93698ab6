"""Tour/MST divergence barcodes and the penalties, alpha scores, and rewards
derived from them.

The barcode pairs every MST edge with a unique tour edge via a canonical
bijection: a tour edge's partner is the first MST edge (in ascending weight,
tie rule order) whose addition connects the tour edge's endpoints on top of
all strictly lighter tour edges.  Bar length = tour edge weight minus MST
edge weight, is never negative, and the bar lengths sum exactly to the gap
between the tour path (cycle minus its heaviest edge) and the MST.

Within a combined merge over both edge sets, MST edges precede tour edges at
equal weight; all remaining ties follow the global (weight, min, max) rule.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .graph import (
    Edge,
    Instance,
    InvalidInstanceError,
    SpanningTree,
    Tour,
    UnionFind,
    compute_mst,
    edge_key,
    make_edge,
    _prim,
)


@dataclass(frozen=True)
class Bar:
    """One interval of the barcode: an MST edge paired with a tour edge."""

    mst_edge: Edge
    tour_edge: Edge

    @property
    def birth(self) -> float:
        return self.mst_edge[2]

    @property
    def death(self) -> float:
        return self.tour_edge[2]

    @property
    def length(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class Barcode:
    """All n-1 bars of a (tour, instance) pair plus the dropped max tour edge."""

    bars: tuple[Bar, ...]
    e_max: Edge
    gap: float

    def penalty_of(self, u: int, v: int) -> float:
        lo, hi = (u, v) if u < v else (v, u)
        for bar in self.bars:
            eu, ev, _ = bar.tour_edge
            if (eu, ev) == (lo, hi):
                return bar.length
        raise KeyError(f"({u}, {v}) is not a matched tour edge")


@dataclass(frozen=True)
class PenaltyMap:
    """Non-negative divergence penalty for every tour edge, e_max included."""

    penalties: dict[tuple[int, int], float]
    e_max: tuple[int, int]

    def get(self, u: int, v: int) -> float:
        return self.penalties[(u, v) if u < v else (v, u)]


@dataclass(frozen=True)
class AlphaTable:
    """Dense symmetric table of 1-tree alpha scores for one special vertex."""

    alpha: np.ndarray
    special: int

    def get(self, i: int, j: int) -> float:
        return float(self.alpha[i, j])


def tour_edges_of(inst: Instance, tour: Tour) -> list[Edge]:
    o = tour.order
    n = len(o)
    return [make_edge(int(o[i]), int(o[(i + 1) % n]), inst.dist[o[i], o[(i + 1) % n]]) for i in range(n)]


def split_tour_path(inst: Instance, tour: Tour) -> tuple[list[Edge], Edge]:
    """Tour edges minus the heaviest one (tie rule picks the last); the removed
    edge is e_max and the remainder is the tour's own MST, a Hamiltonian path."""
    edges = tour_edges_of(inst, tour)
    e_max = max(edges, key=lambda e: edge_key(*e))
    path = list(edges)
    path.remove(e_max)
    return path, e_max


def compute_barcode(inst: Instance, tour: Tour, mst: SpanningTree | None = None) -> Barcode:
    """Barcode of (tour, instance).

    Per tour-path edge, ascending: take the union-find holding all strictly
    lighter path edges (grown incrementally, copied per edge), then add MST
    edges in ascending order until the path edge's endpoints connect.  The
    connecting MST edge is the partner.  O(n^2 alpha(n)) overall; the MST is
    computed once and can be passed in when the instance is fixed across many
    tours (local search does).
    """
    n = inst.n
    if n < 3:
        raise InvalidInstanceError("barcode needs at least 3 cities")
    if mst is None:
        mst = compute_mst(inst)
    mst_edges = list(mst.edges)  # already in tie-rule order
    path, e_max = split_tour_path(inst, tour)
    path.sort(key=lambda e: edge_key(*e))

    running = UnionFind(n)
    bars: list[Bar] = []
    for te in path:
        # running holds exactly the strictly lighter path edges; a path
        # subgraph is a forest, so (a, b) cannot be pre-connected
        uf = running.copy()
        a, b, _ = te
        partner: Edge | None = None
        for me in mst_edges:
            uf.union(me[0], me[1])
            if uf.connected(a, b):
                partner = me
                break
        if partner is None:
            raise AssertionError("no MST edge connects a tour edge's endpoints")
        bars.append(Bar(partner, te))
        running.union(a, b)

    bars.sort(key=lambda bar: edge_key(*bar.mst_edge))
    gap = math.fsum(bar.length for bar in bars)
    return Barcode(tuple(bars), e_max, gap)


def oracle_bijection(inst: Instance, tour: Tour, mst: SpanningTree | None = None) -> Barcode:
    """Reference barcode, straight from the definition.

    Every tour-path edge is processed independently: seed a fresh union-find
    with all strictly lighter path edges, then add MST edges in ascending
    order; the edge whose addition connects the endpoints is the partner.
    Kept deliberately naive; compute_barcode must match it bar for bar.
    """
    n = inst.n
    if n < 3:
        raise InvalidInstanceError("barcode needs at least 3 cities")
    if mst is None:
        mst = compute_mst(inst)
    mst_edges = sorted(mst.edges, key=lambda e: edge_key(*e))
    path, e_max = split_tour_path(inst, tour)

    bars: list[Bar] = []
    for te in path:
        a, b, _ = te
        uf = UnionFind(n)
        for other in path:
            if edge_key(*other) < edge_key(*te):
                uf.union(other[0], other[1])
        partner: Edge | None = None
        for me in mst_edges:
            uf.union(me[0], me[1])
            if uf.connected(a, b):
                partner = me
                break
        if partner is None:
            raise AssertionError("no MST edge connects a tour edge's endpoints")
        bars.append(Bar(partner, te))

    bars.sort(key=lambda bar: edge_key(*bar.mst_edge))
    gap = math.fsum(bar.length for bar in bars)
    return Barcode(tuple(bars), e_max, gap)


def phi_map(inst: Instance, tour: Tour, mst: SpanningTree | None = None) -> dict[Edge, Edge]:
    """Forward map MST edge -> tour edge, from the definition: seed strictly
    lighter MST edges, add tour-path edges ascending until the MST edge's
    endpoints connect.  Inverse of the barcode pairing (tested, not assumed)."""
    n = inst.n
    if mst is None:
        mst = compute_mst(inst)
    mst_edges = sorted(mst.edges, key=lambda e: edge_key(*e))
    path, _ = split_tour_path(inst, tour)
    path.sort(key=lambda e: edge_key(*e))

    out: dict[Edge, Edge] = {}
    for k, me in enumerate(mst_edges):
        a, b, _ = me
        uf = UnionFind(n)
        for lighter in mst_edges[:k]:
            uf.union(lighter[0], lighter[1])
        partner: Edge | None = None
        for te in path:
            uf.union(te[0], te[1])
            if uf.connected(a, b):
                partner = te
                break
        if partner is None:
            raise AssertionError("no tour edge connects an MST edge's endpoints")
        out[me] = partner
    return out


def edge_penalties(inst: Instance, tour: Tour, mst: SpanningTree | None = None) -> PenaltyMap:
    """Per-tour-edge penalties p(e) = w(e) - w(partner MST edge) >= 0.

    e_max, which has no bar, gets the smallest strictly positive penalty of
    the other edges, or 0 when the tour path already coincides with an MST.
    """
    barcode = compute_barcode(inst, tour, mst)
    penalties: dict[tuple[int, int], float] = {}
    for bar in barcode.bars:
        u, v, _ = bar.tour_edge
        penalties[(u, v)] = bar.length
    positive = [p for p in penalties.values() if p > 0.0]
    emax_u, emax_v, _ = barcode.e_max
    penalties[(emax_u, emax_v)] = min(positive) if positive else 0.0
    return PenaltyMap(penalties, (emax_u, emax_v))


def reward_shaping(inst: Instance, tour: Tour) -> list[tuple[tuple[int, int], float]]:
    """Per-edge rewards in visit order, so an RL step adding edge k earns r[k].

    Rewards are the barcode penalties; summed over the path edges they equal
    the tour-path/MST gap exactly.
    """
    pmap = edge_penalties(inst, tour)
    o = tour.order
    n = len(o)
    out: list[tuple[tuple[int, int], float]] = []
    for i in range(n):
        u, v = int(o[i]), int(o[(i + 1) % n])
        out.append(((u, v), pmap.get(u, v)))
    return out


# ---------------------------------------------------------------------------
# Generic two-graph barcode (used for the alpha-score equivalence)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphBar:
    """Bar of a general two-graph barcode; death_edge is None for infinite bars
    (the comparison graph never connects those components)."""

    birth_edge: Edge
    death_edge: Edge | None

    @property
    def length(self) -> float:
        if self.death_edge is None:
            return math.inf
        return self.death_edge[2] - self.birth_edge[2]


def rtdl_barcode_graphs(a_edges: Sequence[Edge], b_edges: Sequence[Edge], n: int) -> list[GraphBar]:
    """Barcode of graph A against graph B on a shared vertex set 0..n-1.

    Missing edges are simply absent (conceptually +infinity, never a float
    sentinel).  The union graph C carries min weights; every MST(C) edge is
    paired with the first spanning-forest(A) edge connecting its endpoints
    over strictly lighter forest(A) edges, or with None if never connected.
    """
    cw: dict[tuple[int, int], float] = {}
    for u, v, w in b_edges:
        lo, hi = (u, v) if u < v else (v, u)
        cw[(lo, hi)] = min(w, cw.get((lo, hi), math.inf))
    for u, v, w in a_edges:
        lo, hi = (u, v) if u < v else (v, u)
        cw[(lo, hi)] = min(w, cw.get((lo, hi), math.inf))
    c_edges = [make_edge(u, v, w) for (u, v), w in cw.items()]

    uf = UnionFind(n)
    c_mst: list[Edge] = []
    for e in sorted(c_edges, key=lambda e: edge_key(*e)):
        if uf.union(e[0], e[1]):
            c_mst.append(e)

    a_forest: list[Edge] = []
    uf = UnionFind(n)
    for e in sorted(a_edges, key=lambda e: edge_key(*e)):
        if uf.union(e[0], e[1]):
            a_forest.append(e)

    bars: list[GraphBar] = []
    matched: set[Edge] = set()
    for ae in a_forest:
        x, y, _ = ae
        uf = UnionFind(n)
        for other in a_forest:
            if edge_key(*other) < edge_key(*ae):
                uf.union(other[0], other[1])
        partner: Edge | None = None
        for ce in c_mst:
            uf.union(ce[0], ce[1])
            if uf.connected(x, y):
                partner = ce
                break
        if partner is None:
            raise AssertionError("C must connect whatever A connects")
        bars.append(GraphBar(partner, ae))
        matched.add(partner)
    for ce in c_mst:
        if ce not in matched:
            bars.append(GraphBar(ce, None))
    bars.sort(key=lambda bar: edge_key(*bar.birth_edge))
    return bars


# ---------------------------------------------------------------------------
# Alpha scores
# ---------------------------------------------------------------------------

def _max_edge_on_tree_paths(tree_edges: Sequence[Edge], vertices: Sequence[int]) -> dict[int, dict[int, float]]:
    """For every vertex pair of a tree, the max edge weight on the joining path."""
    adj: dict[int, list[tuple[int, float]]] = {v: [] for v in vertices}
    for u, v, w in tree_edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    out: dict[int, dict[int, float]] = {}
    for root in vertices:
        best = {root: 0.0}
        stack = [root]
        while stack:
            cur = stack.pop()
            for nxt, w in adj[cur]:
                if nxt not in best:
                    best[nxt] = max(best[cur], w)
                    stack.append(nxt)
        out[root] = best
    return out


def alpha_scores(inst: Instance, special: int = 0) -> AlphaTable:
    """Alpha score of every edge: the growth of the minimal 1-tree when that
    edge is forced in.

    For pairs away from the special vertex the forced 1-tree swaps the max
    edge on the sub-MST path; for edges at the special vertex it swaps the
    second-cheapest attach edge.  Zero on every minimal 1-tree edge.
    """
    n = inst.n
    if n < 3:
        raise InvalidInstanceError("alpha scores need at least 3 vertices")
    if not 0 <= special < n:
        raise ValueError(f"special vertex {special} out of range")
    rest = [v for v in range(n) if v != special]
    sub_mst = _prim(inst.dist, np.asarray(rest, dtype=np.intp))
    maxpath = _max_edge_on_tree_paths(sub_mst, rest)
    attach = sorted((make_edge(special, v, inst.dist[special, v]) for v in rest),
                    key=lambda e: edge_key(*e))
    second_w = attach[1][2]
    attach_set = {(e[0], e[1]) for e in attach[:2]}

    alpha = np.zeros((n, n), dtype=np.float64)
    for ai, i in enumerate(rest):
        for j in rest[ai + 1:]:
            alpha[i, j] = alpha[j, i] = inst.dist[i, j] - maxpath[i][j]
    for v in rest:
        lo, hi = (special, v) if special < v else (v, special)
        a = 0.0 if (lo, hi) in attach_set else inst.dist[special, v] - second_w
        alpha[special, v] = alpha[v, special] = a
    return AlphaTable(alpha, special)


def alpha_via_rtdl(inst: Instance, special: int, i: int, j: int) -> float:
    """Alpha score of (i, j) recovered as a bar length.

    Builds the instance minus the special vertex and a single-edge graph on
    the same vertices, takes the barcode of the pair, and reads off the bar
    whose death edge is (i, j).  Must agree exactly with alpha_scores for
    distinct weights.
    """
    n = inst.n
    if i == special or j == special:
        raise ValueError("alpha_via_rtdl requires i, j != special")
    if i == j:
        raise ValueError("need two distinct endpoints")
    rest = [v for v in range(n) if v != special]
    pos = {v: k for k, v in enumerate(rest)}
    m = len(rest)
    b_edges = [make_edge(a, b, inst.dist[rest[a], rest[b]])
               for a in range(m) for b in range(a + 1, m)]
    a_edges = [make_edge(pos[i], pos[j], inst.dist[i, j])]
    bars = rtdl_barcode_graphs(a_edges, b_edges, m)
    target = a_edges[0][:2]
    for bar in bars:
        if bar.death_edge is not None and bar.death_edge[:2] == target:
            return bar.length
    raise AssertionError("single-edge graph produced no finite bar")


def barcode_to_csv(barcode: Barcode) -> str:
    """CSV export: one row per bar, penalty = death - birth."""
    buf = io.StringIO()
    buf.write("mst_u,mst_v,birth,tour_u,tour_v,death,penalty\n")
    for bar in barcode.bars:
        mu, mv, birth = bar.mst_edge
        tu, tv, death = bar.tour_edge
        buf.write(f"{mu},{mv},{birth!r},{tu},{tv},{death!r},{bar.length!r}\n")
    return buf.getvalue()
