"""Exact small-instance solvers used as ground truth for everything else."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import permutations

import numpy as np

from .graph import Instance, Tour

HELD_KARP_MAX_N = 18
BRUTE_FORCE_MAX_N = 10


class ExactMethod(str, Enum):
    HELD_KARP = "held-karp"
    BRUTE_FORCE = "brute-force"


@dataclass(frozen=True)
class ExactResult:
    tour: Tour
    length: float
    method: ExactMethod


def _canonical_cycle(order: list[int]) -> list[int]:
    """Rotate to start at 0 and fix direction so order[1] < order[-1]."""
    i = order.index(0)
    rolled = order[i:] + order[:i]
    if rolled[1] > rolled[-1]:
        rolled = [rolled[0]] + rolled[1:][::-1]
    return rolled


def held_karp(inst: Instance) -> ExactResult:
    """Optimal tour by bitmask dynamic programming anchored at city 0.

    Memory and time grow as 2^n * n; refuses n outside [3, 18].
    """
    n = inst.n
    if not 3 <= n <= HELD_KARP_MAX_N:
        raise ValueError(
            f"held_karp handles 3 <= n <= {HELD_KARP_MAX_N}, got {n}; "
            "use brute_force for tiny n or an external solver beyond")
    m = n - 1
    d = inst.dist
    dsub = d[1:, 1:]  # distances among cities 1..n-1
    from0 = d[0, 1:]
    full = (1 << m) - 1
    dp = np.full((1 << m, m), np.inf)
    parent = np.full((1 << m, m), -1, dtype=np.int8)
    for j in range(m):
        dp[1 << j, j] = from0[j]
    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            continue
        row = dp[mask]
        for j in range(m):
            bit = 1 << j
            if not mask & bit:
                continue
            cand = dp[mask ^ bit] + dsub[:, j]
            k = int(np.argmin(cand))  # first minimum: smallest predecessor wins ties
            row[j] = cand[k]
            parent[mask, j] = k
    closing = dp[full] + from0
    j = int(np.argmin(closing))
    best = float(closing[j])

    seq = []
    mask = full
    while j >= 0:
        seq.append(j + 1)
        mask, j = mask ^ (1 << j), int(parent[mask, j])
    order = _canonical_cycle([0] + seq[::-1])
    tour = Tour(inst, order)
    return ExactResult(tour, tour.length, ExactMethod.HELD_KARP)


def brute_force(inst: Instance) -> ExactResult:
    """Optimal tour by enumerating all (n-1)!/2 distinct cycles through city 0."""
    n = inst.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute_force handles n <= {BRUTE_FORCE_MAX_N}, got {n}")
    if n < 3:
        raise ValueError("need at least 3 cities")
    d = inst.dist
    best_len = np.inf
    best_perm: tuple[int, ...] | None = None
    chunk: list[tuple[int, ...]] = []

    def flush() -> None:
        nonlocal best_len, best_perm
        if not chunk:
            return
        p = np.asarray(chunk, dtype=np.intp)
        lengths = d[0, p[:, 0]] + d[p[:, -1], 0] + d[p[:, :-1], p[:, 1:]].sum(axis=1)
        k = int(np.argmin(lengths))
        if lengths[k] < best_len:  # strict: earlier (lex-smaller) perm keeps ties
            best_len = float(lengths[k])
            best_perm = chunk[k]
        chunk.clear()

    for perm in permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue  # mirror image already covered
        chunk.append(perm)
        if len(chunk) >= 65536:
            flush()
    flush()
    assert best_perm is not None
    tour = Tour(inst, _canonical_cycle([0, *best_perm]))
    return ExactResult(tour, tour.length, ExactMethod.BRUTE_FORCE)
