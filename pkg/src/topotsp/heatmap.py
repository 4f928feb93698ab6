"""Heatmap ingestion and greedy tour decoding.

Heatmaps come from external neural solvers as n x n relevance matrices,
either as CSV or in a small binary container: 16-byte header (magic 'HMAP',
little-endian uint32 n, 8 reserved bytes) followed by row-major float64.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Instance, Tour

MAGIC = b"HMAP"
HEADER = struct.Struct("<4sI8x")


@dataclass(frozen=True)
class Heatmap:
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"heatmap must be square, got {v.shape}")
        if np.isnan(v).any():
            raise ValueError("heatmap contains NaN entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def load_heatmap(path: str | Path, fmt: str = "auto") -> Heatmap:
    """Read a heatmap from disk; fmt is 'csv', 'f64le-bin', or 'auto' (sniff
    the magic bytes)."""
    path = Path(path)
    raw = path.read_bytes()
    if fmt == "auto":
        fmt = "f64le-bin" if raw[:4] == MAGIC else "csv"
    if fmt == "f64le-bin":
        if len(raw) < HEADER.size or raw[:4] != MAGIC:
            raise ValueError(f"{path}: not a heatmap binary (bad magic)")
        _, n = HEADER.unpack_from(raw)
        body = np.frombuffer(raw, dtype="<f8", offset=HEADER.size)
        if body.size != n * n:
            raise ValueError(f"{path}: payload holds {body.size} floats, expected {n * n}")
        return Heatmap(body.reshape(n, n).copy())
    if fmt == "csv":
        values = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
        return Heatmap(values)
    raise ValueError(f"unknown heatmap format {fmt!r}")


def save_heatmap(hm: Heatmap, path: str | Path, fmt: str = "f64le-bin") -> None:
    path = Path(path)
    if fmt == "f64le-bin":
        with path.open("wb") as fh:
            fh.write(HEADER.pack(MAGIC, hm.n))
            fh.write(hm.values.astype("<f8").tobytes())
    elif fmt == "csv":
        np.savetxt(path, hm.values, delimiter=",")
    else:
        raise ValueError(f"unknown heatmap format {fmt!r}")


def greedy_decode(hm: Heatmap, inst: Instance) -> Tour:
    """Start at city 0 and repeatedly hop to the unvisited city with the
    largest heatmap value; equal values break toward the smaller index."""
    n = inst.n
    if hm.n != n:
        raise ValueError(f"heatmap is {hm.n}x{hm.n} but instance has {n} cities")
    values = hm.values
    visited = np.zeros(n, dtype=bool)
    order = np.empty(n, dtype=np.intp)
    order[0] = 0
    visited[0] = True
    cur = 0
    for i in range(1, n):
        row = np.where(visited, -np.inf, values[cur])
        cur = int(np.argmax(row))  # first maximum: smallest index wins ties
        order[i] = cur
        visited[cur] = True
    return Tour(inst, order)
