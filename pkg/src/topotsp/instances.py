"""Random instance generators for benchmarks."""
from __future__ import annotations

import numpy as np

from .graph import Instance, WeightKind


def gen_euclidean(n: int, seed: int | None = None) -> Instance:
    """Uniform points in the unit square with exact Euclidean distances."""
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    d = np.hypot(pts[:, 0, None] - pts[None, :, 0], pts[:, 1, None] - pts[None, :, 1])
    np.fill_diagonal(d, 0.0)
    return Instance(d, name=f"euclid{n}-s{seed}", coords=pts, weight_kind=WeightKind.SYNTHETIC)


def gen_nonmetric(n: int, seed: int | None = None) -> Instance:
    """Symmetric weights drawn independently and uniformly from (0, 1)."""
    if n < 2:
        raise ValueError("need n >= 2")
    rng = np.random.default_rng(seed)
    w = rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=(n, n))
    d = np.triu(w, 1)
    d = d + d.T
    return Instance(d, name=f"nonmetric{n}-s{seed}", weight_kind=WeightKind.SYNTHETIC)
