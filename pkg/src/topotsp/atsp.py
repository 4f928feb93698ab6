"""Asymmetric TSP to symmetric TSP reduction (city-doubling transform).

Every city i gets a ghost copy i+n.  A city couples to its own ghost at zero
cost, ghost i reaches city j at c(i, j) plus a uniform surcharge M, and every
remaining pair is blocked by a larger finite weight.  The surcharge plays the
role of the classic large negative coupling shifted into non-negative range:
a tour skipping even one coupling edge pays at least an extra M, so optimal
tours alternate city/ghost and cost exactly (asymmetric optimum + n*M).
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .graph import Instance, Tour, WeightKind

BackMap = Callable[[Tour | Sequence[int]], list[int]]


def atsp_to_tsp(costs: np.ndarray) -> tuple[Instance, BackMap, float]:
    """Reduce an n x n asymmetric cost matrix to a 2n-city symmetric instance.

    Returns (instance, back_map, constant): optimal symmetric length equals
    the optimal asymmetric length plus `constant`.  back_map turns a symmetric
    tour into the visited city order of the asymmetric problem and raises
    ValueError for tours that do not alternate city/ghost (only possible when
    a blocked or non-coupling pairing was used).
    """
    c = np.asarray(costs, dtype=np.float64)
    n = c.shape[0]
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError(f"cost matrix must be square, got {c.shape}")
    if n < 3:
        raise ValueError("need at least 3 cities")
    if not np.all(np.isfinite(c)):
        raise ValueError("costs must be finite")
    if np.any(np.diagonal(c) != 0.0):
        raise ValueError("diagonal must be zero")

    surcharge = float(c.sum()) + 1.0
    blocked = (2.0 * n + 1.0) * surcharge
    d = np.full((2 * n, 2 * n), blocked)
    # ghost(i) <-> city j carries c(i, j) + M; city <-> own ghost couples at 0
    d[n:, :n] = c + surcharge
    d[:n, n:] = c.T + surcharge
    for i in range(n):
        d[i, i + n] = d[i + n, i] = 0.0
    np.fill_diagonal(d, 0.0)
    inst = Instance(d, name=f"atsp{n}-reduced", weight_kind=WeightKind.SYNTHETIC)
    constant = n * surcharge

    def back_map(tour: Tour | Sequence[int]) -> list[int]:
        order = list(tour.order) if isinstance(tour, Tour) else list(tour)
        if sorted(order) != list(range(2 * n)):
            raise ValueError("not a tour of the reduced instance")
        for seq in (order, order[::-1]):
            pos = {city: k for k, city in enumerate(seq)}
            if all(seq[(pos[i] + 1) % (2 * n)] == i + n for i in range(n)):
                cities = [city for city in seq if city < n]
                at0 = cities.index(0)
                return cities[at0:] + cities[:at0]
        raise ValueError("tour does not alternate city/ghost; cannot map back")

    return inst, back_map, constant


def atsp_cycle_cost(costs: np.ndarray, cities: Sequence[int]) -> float:
    c = np.asarray(costs, dtype=np.float64)
    return float(sum(c[cities[k], cities[(k + 1) % len(cities)]] for k in range(len(cities))))
