"""2-opt and 3-opt local search with pluggable edge orderings.

The penalty-guided variants keep a window over the first N tour positions,
sort the window's edges by barcode penalty (descending) and attack those
first; an exhausted window grows by `batch_step` until it covers the tour.
Every accepted move strictly shortens the tour and restarts the scan from the
top of the ordering.  The vertex-potential transform (`pi_transform`) reshapes
MST structure without changing which tour is optimal.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .graph import (
    Instance,
    SpanningTree,
    Tour,
    compute_mst,
    cycle_length,
    edge_key,
    nearest_neighbor_tour,
    _prim,
)
from .rtdl import AlphaTable, alpha_scores, edge_penalties, split_tour_path


class Algorithm(str, Enum):
    TWO_OPT = "2opt"
    TWO_OPT_RTDL = "2opt-rtdl"
    TWO_OPT_RTDL_FULL = "2opt-rtdl-full"
    THREE_OPT = "3opt"
    THREE_OPT_RTDL = "3opt-rtdl"
    THREE_OPT_RTDL_OPTD = "3opt-rtdl-optd"
    TWO_OPT_DIST = "2opt-dist"
    TWO_OPT_ALPHA = "2opt-alpha"


def default_refresh_period(n: int) -> int:
    """Penalty refresh period (improvement rounds) by instance size."""
    if n <= 300:
        return 1
    if n <= 1000:
        return 5
    return 100


@dataclass
class SearchConfig:
    algorithm: Algorithm = Algorithm.TWO_OPT
    freq: int | None = None          # penalty refresh period; None = by size
    granularity: int | None = None   # initial window width; None = algorithm default
    batch_step: int = 10
    time_limit: float = 20.0
    max_iters: int = 1_000_000
    seed: int | None = None
    use_pi_transform: bool = False
    pi_iters: int = 100

    def __post_init__(self) -> None:
        if self.freq is not None and self.freq < 1:
            raise ValueError("freq must be >= 1")
        if self.granularity is not None and self.granularity < 1:
            raise ValueError("granularity must be >= 1")
        if self.batch_step < 1:
            raise ValueError("batch_step must be >= 1")
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SearchStats:
    iterations: int = 0
    trials: int = 0
    trials_per_iter: list[int] = field(default_factory=list)
    wall_time: float = 0.0
    final_length: float = 0.0
    converged: bool = False
    hit_time_limit: bool = False

    @property
    def mean_trials_per_iter(self) -> float:
        if not self.trials_per_iter:
            return 0.0
        return sum(self.trials_per_iter) / len(self.trials_per_iter)


@dataclass(frozen=True)
class PiVector:
    """Vertex potentials; transformed weight = w + pi_u + pi_v + offset.

    The uniform offset only keeps transformed weights non-negative; both terms
    shift every tour by the same constant (2*sum(pi) + n*offset), so length
    differences between tours are preserved exactly.
    """

    pi: np.ndarray
    offset: float = 0.0


# ---------------------------------------------------------------------------
# Edge orderings
# ---------------------------------------------------------------------------

def sequential(tour: Tour) -> list[tuple[int, int]]:
    """Identity ordering: tour edges in visit order."""
    o = tour.order
    n = len(o)
    out = []
    for i in range(n):
        u, v = int(o[i]), int(o[(i + 1) % n])
        out.append((u, v) if u < v else (v, u))
    return out


def dist_desc(inst: Instance, tour: Tour) -> list[tuple[int, int]]:
    """Tour edges by weight descending, equal weights by the tie rule."""
    edges = tour.edges(inst)
    edges.sort(key=lambda e: (-e[2], e[0], e[1]))
    return [(u, v) for u, v, _ in edges]


def penalty_desc(inst: Instance, tour: Tour, mst: SpanningTree | None = None) -> list[tuple[int, int]]:
    """Tour edges by barcode penalty descending, ties by the tie rule."""
    pmap = edge_penalties(inst, tour, mst)
    edges = tour.edges(inst)
    edges.sort(key=lambda e: (-pmap.get(e[0], e[1]),) + edge_key(*e))
    return [(u, v) for u, v, _ in edges]


def alpha_desc(table: AlphaTable, inst: Instance, tour: Tour) -> list[tuple[int, int]]:
    """Tour edges by alpha score descending, ties by the tie rule."""
    edges = tour.edges(inst)
    edges.sort(key=lambda e: (-float(table.alpha[e[0], e[1]]),) + edge_key(*e))
    return [(u, v) for u, v, _ in edges]


def _penalty_dict(inst: Instance, order: np.ndarray, mst: SpanningTree) -> dict[tuple[int, int], float]:
    return edge_penalties(inst, Tour(inst, order), mst).penalties


# ---------------------------------------------------------------------------
# 2-opt engine
# ---------------------------------------------------------------------------

def _two_opt_engine(inst: Instance, order0: np.ndarray, cfg: SearchConfig,
                    mode: str, window0: int, grow: bool) -> tuple[np.ndarray, SearchStats]:
    """First-improvement 2-opt over ordered candidate edges.

    mode 'seq' scans position pairs (i, j), i < j, restarting from the top
    after each accepted move; the other modes scan ordered window edges, both
    members of a pair drawn from the window.
    """
    d = inst.dist
    n = len(order0)
    stats = SearchStats()
    order = order0.copy()
    start = time.monotonic()
    if n < 4:
        stats.converged = True
        stats.final_length = cycle_length(d, order)
        stats.wall_time = time.monotonic() - start
        return order, stats

    eps = 1e-10 * max(1.0, float(d.max()))
    deadline = start + cfg.time_limit
    window = min(window0, n)
    freq = cfg.freq if cfg.freq is not None else default_refresh_period(n)

    mst: SpanningTree | None = None
    alpha: np.ndarray | None = None
    if mode == "penalty":
        mst = compute_mst(inst)
    elif mode == "alpha":
        alpha = alpha_scores(inst, special=0).alpha
    penalties: dict[tuple[int, int], float] | None = None
    since_refresh = 0

    trials_round = 0
    positions = np.arange(n)

    while True:
        if time.monotonic() > deadline:
            stats.hit_time_limit = True
            break
        if stats.iterations >= cfg.max_iters:
            break

        succ = np.roll(order, -1)
        w_pos = d[order, succ]

        if mode == "seq":
            cand = positions
        else:
            win = positions[:window]
            if mode == "penalty":
                if penalties is None or since_refresh >= freq:
                    penalties = _penalty_dict(inst, order, mst)
                    since_refresh = 0
                pmap = penalties

                def key(p: int):
                    u, v = int(order[p]), int(succ[p])
                    lo, hi = (u, v) if u < v else (v, u)
                    return (-pmap.get((lo, hi), 0.0), w_pos[p], lo, hi)
            elif mode == "dist":
                def key(p: int):
                    u, v = int(order[p]), int(succ[p])
                    lo, hi = (u, v) if u < v else (v, u)
                    return (-w_pos[p], lo, hi)
            else:  # alpha
                def key(p: int):
                    u, v = int(order[p]), int(succ[p])
                    lo, hi = (u, v) if u < v else (v, u)
                    return (-float(alpha[u, v]), w_pos[p], lo, hi)

            cand = np.asarray(sorted((int(p) for p in win), key=key), dtype=np.intp)

        improved = False
        timed_out = False
        for s in range(len(cand) - 1):
            if time.monotonic() > deadline:
                timed_out = True
                break
            p = int(cand[s])
            qs = cand[s + 1:]
            delta = d[order[p], order[qs]] + d[succ[p], succ[qs]] - w_pos[p] - w_pos[qs]
            hits = np.nonzero(delta < -eps)[0]
            if hits.size:
                h = int(hits[0])
                trials_round += h + 1
                q = int(qs[h])
                i, j = (p, q) if p < q else (q, p)
                order[i + 1:j + 1] = order[i + 1:j + 1][::-1]
                stats.iterations += 1
                stats.trials += trials_round
                stats.trials_per_iter.append(trials_round)
                trials_round = 0
                since_refresh += 1
                improved = True
                break
            trials_round += len(qs)
        if timed_out:
            stats.hit_time_limit = True
            break
        if improved:
            continue
        if grow and window < n:
            window = min(window + cfg.batch_step, n)
            continue
        stats.converged = True
        break

    stats.trials += trials_round
    stats.final_length = cycle_length(d, order)
    stats.wall_time = time.monotonic() - start
    return order, stats


# ---------------------------------------------------------------------------
# 3-opt engine
# ---------------------------------------------------------------------------

def _three_opt_deltas(d: np.ndarray, order: np.ndarray, succ: np.ndarray,
                      i, j, k) -> np.ndarray:
    """Deltas of the 7 reconnections for removed edges at positions i<j<k.

    Cases 0-2 are single reversals (2-opt subcases), 3 reverses both inner
    segments, 4 swaps them, 5-6 swap with one reversal.  Broadcasts when any
    position argument is an array.
    """
    a, b = order[i], succ[i]
    c, dd = order[j], succ[j]
    e, f = order[k], succ[k]
    w_ab, w_cd, w_ef = d[a, b], d[c, dd], d[e, f]
    removed = w_ab + w_cd + w_ef
    return np.stack([
        d[a, c] + d[b, dd] + w_ef - removed,
        w_ab + d[c, e] + d[dd, f] - removed,
        d[a, e] + w_cd + d[b, f] - removed,
        d[a, c] + d[b, e] + d[dd, f] - removed,
        d[a, dd] + d[e, b] + d[c, f] - removed,
        d[a, e] + d[dd, b] + d[c, f] - removed,
        d[a, dd] + d[e, c] + d[b, f] - removed,
    ])


def _apply_three_opt(order: np.ndarray, i: int, j: int, k: int, case: int) -> np.ndarray:
    s0, s1, s2, s3 = order[:i + 1], order[i + 1:j + 1], order[j + 1:k + 1], order[k + 1:]
    if case == 0:
        parts = (s0, s1[::-1], s2, s3)
    elif case == 1:
        parts = (s0, s1, s2[::-1], s3)
    elif case == 2:
        parts = (s0, s2[::-1], s1[::-1], s3)
    elif case == 3:
        parts = (s0, s1[::-1], s2[::-1], s3)
    elif case == 4:
        parts = (s0, s2, s1, s3)
    elif case == 5:
        parts = (s0, s2[::-1], s1, s3)
    elif case == 6:
        parts = (s0, s2, s1[::-1], s3)
    else:
        raise ValueError(f"unknown 3-opt case {case}")
    return np.concatenate(parts)


def _first_improving(deltas: np.ndarray, eps: float) -> tuple[int, int] | None:
    """(column, case) of the first improving entry, scanning columns first."""
    hit = deltas < -eps
    cols = np.nonzero(hit.any(axis=0))[0]
    if not cols.size:
        return None
    col = int(cols[0])
    case = int(np.nonzero(hit[:, col])[0][0])
    return col, case


def _three_opt_engine(inst: Instance, order0: np.ndarray, cfg: SearchConfig,
                      ordered_first: bool) -> tuple[np.ndarray, SearchStats]:
    """First-improvement 3-opt over all 7 reconnections.

    Sequential scan walks positions i<j<k lexicographically; the penalty
    variant walks the first removed edge in penalty-descending order and the
    remaining pair lexicographically, normalizing each triple.
    """
    d = inst.dist
    n = len(order0)
    if n < 6:
        # no room for three disjoint edges: fall back to 2-opt moves
        mode = "penalty" if ordered_first else "seq"
        return _two_opt_engine(inst, order0, cfg, mode, n, grow=False)

    stats = SearchStats()
    order = order0.copy()
    start = time.monotonic()
    eps = 1e-10 * max(1.0, float(d.max()))
    deadline = start + cfg.time_limit
    freq = cfg.freq if cfg.freq is not None else default_refresh_period(n)
    mst = compute_mst(inst) if ordered_first else None
    penalties: dict[tuple[int, int], float] | None = None
    since_refresh = 0
    trials_round = 0

    def scan_block(i, j, k) -> tuple[int, int] | None:
        nonlocal trials_round
        deltas = _three_opt_deltas(d, order, succ, i, j, k)
        if deltas.ndim == 1:
            deltas = deltas[:, None]
        found = _first_improving(deltas, eps)
        if found is None:
            trials_round += deltas.shape[1] * 7
            return None
        col, case = found
        trials_round += col * 7 + case + 1
        return col, case

    while True:
        if time.monotonic() > deadline:
            stats.hit_time_limit = True
            break
        if stats.iterations >= cfg.max_iters:
            break
        succ = np.roll(order, -1)

        if ordered_first:
            if penalties is None or since_refresh >= freq:
                penalties = _penalty_dict(inst, order, mst)
                since_refresh = 0
            pmap = penalties
            w_pos = d[order, succ]

            def key(p: int):
                u, v = int(order[p]), int(succ[p])
                lo, hi = (u, v) if u < v else (v, u)
                return (-pmap.get((lo, hi), 0.0), w_pos[p], lo, hi)

            first_positions = sorted(range(n), key=key)
        else:
            first_positions = None

        improved = False
        timed_out = False
        move: tuple[int, int, int, int] | None = None

        if first_positions is None:
            for i in range(n - 2):
                if time.monotonic() > deadline:
                    timed_out = True
                    break
                for j in range(i + 1, n - 1):
                    ks = np.arange(j + 1, n)
                    found = scan_block(i, j, ks)
                    if found is not None:
                        col, case = found
                        move = (i, j, int(ks[col]), case)
                        break
                if move or timed_out:
                    break
        else:
            for p in first_positions:
                if time.monotonic() > deadline:
                    timed_out = True
                    break
                for x in range(n):
                    if x == p:
                        continue
                    # normalize (p, x, y) into i<j<k with y varying
                    if p < x:
                        ys = np.arange(x + 1, n)
                        if ys.size:
                            found = scan_block(p, x, ys)
                            if found is not None:
                                col, case = found
                                move = (p, x, int(ys[col]), case)
                                break
                    else:
                        ys = np.arange(x + 1, p)
                        if ys.size:
                            found = scan_block(x, ys, p)
                            if found is not None:
                                col, case = found
                                move = (x, int(ys[col]), p, case)
                                break
                        ys = np.arange(p + 1, n)
                        if ys.size:
                            found = scan_block(x, p, ys)
                            if found is not None:
                                col, case = found
                                move = (x, p, int(ys[col]), case)
                                break
                if move or timed_out:
                    break

        if timed_out:
            stats.hit_time_limit = True
            break
        if move is not None:
            i, j, k, case = move
            order = _apply_three_opt(order, i, j, k, case)
            stats.iterations += 1
            stats.trials += trials_round
            stats.trials_per_iter.append(trials_round)
            trials_round = 0
            since_refresh += 1
            improved = True
        if improved:
            continue
        stats.converged = True
        break

    stats.trials += trials_round
    stats.final_length = cycle_length(d, order)
    stats.wall_time = time.monotonic() - start
    return order, stats


# ---------------------------------------------------------------------------
# Vertex-potential (pi) transform
# ---------------------------------------------------------------------------

def _one_tree_degrees(dmat: np.ndarray, special: int) -> np.ndarray:
    """Vertex degrees of the minimal 1-tree under an arbitrary (possibly
    negative) symmetric weight matrix."""
    n = dmat.shape[0]
    rest = np.array([v for v in range(n) if v != special], dtype=np.intp)
    deg = np.zeros(n, dtype=np.intp)
    for u, v, _ in _prim(dmat, rest):
        deg[u] += 1
        deg[v] += 1
    row = dmat[special, rest]
    a1, a2 = np.argsort(row, kind="stable")[:2]
    deg[special] = 2
    deg[rest[a1]] += 1
    deg[rest[a2]] += 1
    return deg


def pi_transform(inst: Instance, iters: int = 100,
                 step_schedule: Callable[[int], float] | Sequence[float] | None = None,
                 special: int = 0) -> tuple[PiVector, Instance]:
    """Subgradient optimization of vertex potentials toward degree-2 1-trees.

    Each round computes the minimal 1-tree under w + pi_u + pi_v and moves
    pi by step * (degree - 2).  The returned instance carries the shifted
    weights (plus a uniform offset when needed to stay non-negative); every
    tour length moves by the same constant, so tour ranking is untouched.
    """
    n = inst.n
    if n < 3:
        raise ValueError("pi transform needs at least 3 vertices")
    d = inst.dist
    nn = nearest_neighbor_tour(inst, start=0)
    _, e_max = split_tour_path(inst, nn)
    t0 = (nn.length - e_max[2] - compute_mst(inst).total) / (2.0 * n)

    if step_schedule is None:
        def step(k: int) -> float:
            return t0 * 0.95 ** k
    elif callable(step_schedule):
        step = step_schedule
    else:
        sched = list(step_schedule)

        def step(k: int) -> float:
            return sched[k] if k < len(sched) else sched[-1]

    pi = np.zeros(n)
    for k in range(iters):
        t_k = float(step(k))
        if t_k <= 0.0:
            break
        dk = d + (pi[:, None] + pi[None, :])
        np.fill_diagonal(dk, 0.0)
        g = _one_tree_degrees(dk, special) - 2
        if not g.any():
            break
        pi = pi + t_k * g

    # sum the potentials first: pi_u + pi_v commutes bitwise, so the shifted
    # matrix stays exactly symmetric
    shifted = d + (pi[:, None] + pi[None, :])
    np.fill_diagonal(shifted, 0.0)
    off = shifted[~np.eye(n, dtype=bool)].min()
    offset = float(max(0.0, -off))
    if offset > 0.0:
        shifted = shifted + offset
        np.fill_diagonal(shifted, 0.0)
    transformed = Instance(shifted, name=f"{inst.name}+pi")
    return PiVector(pi, offset), transformed


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------

def run_search(inst: Instance, tour0: Tour, cfg: SearchConfig | None = None) -> tuple[Tour, SearchStats]:
    """Run the configured algorithm from tour0; lengths in the returned tour
    and stats always refer to the original instance weights."""
    cfg = cfg or SearchConfig()
    algo = cfg.algorithm
    work = inst
    if cfg.use_pi_transform or algo is Algorithm.THREE_OPT_RTDL_OPTD:
        _, work = pi_transform(inst, cfg.pi_iters)

    n = inst.n
    order0 = tour0.order
    if algo is Algorithm.TWO_OPT:
        order, stats = _two_opt_engine(work, order0, cfg, "seq", n, grow=False)
    elif algo is Algorithm.TWO_OPT_RTDL:
        w0 = cfg.granularity if cfg.granularity is not None else 10
        order, stats = _two_opt_engine(work, order0, cfg, "penalty", w0, grow=True)
    elif algo is Algorithm.TWO_OPT_RTDL_FULL:
        order, stats = _two_opt_engine(work, order0, cfg, "penalty", n, grow=False)
    elif algo is Algorithm.TWO_OPT_DIST:
        w0 = cfg.granularity if cfg.granularity is not None else 10
        order, stats = _two_opt_engine(work, order0, cfg, "dist", w0, grow=True)
    elif algo is Algorithm.TWO_OPT_ALPHA:
        w0 = cfg.granularity if cfg.granularity is not None else 10
        order, stats = _two_opt_engine(work, order0, cfg, "alpha", w0, grow=True)
    elif algo is Algorithm.THREE_OPT:
        order, stats = _three_opt_engine(work, order0, cfg, ordered_first=False)
    elif algo in (Algorithm.THREE_OPT_RTDL, Algorithm.THREE_OPT_RTDL_OPTD):
        order, stats = _three_opt_engine(work, order0, cfg, ordered_first=True)
    else:
        raise ValueError(f"unknown algorithm {algo}")

    tour = Tour(inst, order)
    stats.final_length = tour.length
    return tour, stats


def _with_algo(cfg: SearchConfig | None, algo: Algorithm) -> SearchConfig:
    return replace(cfg or SearchConfig(), algorithm=algo)


def two_opt(inst: Instance, tour0: Tour, cfg: SearchConfig | None = None) -> tuple[Tour, SearchStats]:
    return run_search(inst, tour0, _with_algo(cfg, Algorithm.TWO_OPT))


def two_opt_rtdl(inst: Instance, tour0: Tour, cfg: SearchConfig | None = None) -> tuple[Tour, SearchStats]:
    return run_search(inst, tour0, _with_algo(cfg, Algorithm.TWO_OPT_RTDL))


def two_opt_rtdl_full(inst: Instance, tour0: Tour, cfg: SearchConfig | None = None) -> tuple[Tour, SearchStats]:
    return run_search(inst, tour0, _with_algo(cfg, Algorithm.TWO_OPT_RTDL_FULL))


def three_opt(inst: Instance, tour0: Tour, cfg: SearchConfig | None = None) -> tuple[Tour, SearchStats]:
    return run_search(inst, tour0, _with_algo(cfg, Algorithm.THREE_OPT))


def three_opt_rtdl(inst: Instance, tour0: Tour, cfg: SearchConfig | None = None) -> tuple[Tour, SearchStats]:
    return run_search(inst, tour0, _with_algo(cfg, Algorithm.THREE_OPT_RTDL))
