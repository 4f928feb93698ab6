"""TSPLIB file parsing and synthesis.

Covers the symmetric metric types the benchmark instances use (EUC_2D,
CEIL_2D, GEO, ATT) and EXPLICIT matrices in the four common packings.  The
metric formulas follow the TSPLIB reference implementation; in particular the
GEO degree extraction truncates toward zero, which is the convention that
reproduces the published optima (ulysses16 = 6859).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Instance, WeightKind

GEO_EARTH_RADIUS = 6378.388
GEO_PI = 3.141592

_COORD_TYPES = {"EUC_2D", "CEIL_2D", "GEO", "ATT"}
_EXPLICIT_FORMATS = {"FULL_MATRIX", "UPPER_ROW", "LOWER_DIAG_ROW", "UPPER_DIAG_ROW"}
_SPEC_KEYS = {
    "NAME", "TYPE", "COMMENT", "DIMENSION", "CAPACITY", "EDGE_WEIGHT_TYPE",
    "EDGE_WEIGHT_FORMAT", "EDGE_DATA_FORMAT", "NODE_COORD_TYPE", "DISPLAY_DATA_TYPE",
}
_SECTION_KEYS = {
    "NODE_COORD_SECTION", "EDGE_WEIGHT_SECTION", "DISPLAY_DATA_SECTION",
    "DEPOT_SECTION", "FIXED_EDGES_SECTION",
}


class TsplibParseError(ValueError):
    """Malformed TSPLIB input; message carries the offending line number."""


@dataclass
class TsplibFile:
    """Raw parsed file before distance-matrix materialization."""

    name: str = "unnamed"
    type: str = "TSP"
    dimension: int = 0
    edge_weight_type: str = ""
    edge_weight_format: str = ""
    comment: str = ""
    node_coords: np.ndarray | None = None
    matrix: np.ndarray | None = None


def nint(x: float) -> int:
    return int(x + 0.5)


def euc_2d(a: np.ndarray, b: np.ndarray) -> int:
    return nint(math.hypot(a[0] - b[0], a[1] - b[1]))


def ceil_2d(a: np.ndarray, b: np.ndarray) -> int:
    return int(math.ceil(math.hypot(a[0] - b[0], a[1] - b[1])))


def _geo_radians(x: float) -> float:
    deg = int(x)  # truncation toward zero, per the reference implementation
    minutes = x - deg
    return GEO_PI * (deg + 5.0 * minutes / 3.0) / 180.0


def geo(a: np.ndarray, b: np.ndarray) -> int:
    if a[0] == b[0] and a[1] == b[1]:
        return 0  # the raw formula yields int(0 + 1.0) = 1 for coincident points
    lat1, lon1 = _geo_radians(a[0]), _geo_radians(a[1])
    lat2, lon2 = _geo_radians(b[0]), _geo_radians(b[1])
    q1 = math.cos(lon1 - lon2)
    q2 = math.cos(lat1 - lat2)
    q3 = math.cos(lat1 + lat2)
    arg = min(1.0, max(-1.0, 0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)))
    return int(GEO_EARTH_RADIUS * math.acos(arg) + 1.0)


def att(a: np.ndarray, b: np.ndarray) -> int:
    r = math.sqrt(((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2) / 10.0)
    t = nint(r)
    return t + 1 if t < r else t


_METRICS = {"EUC_2D": euc_2d, "CEIL_2D": ceil_2d, "GEO": geo, "ATT": att}


def parse_tsplib_file(source: str | bytes | Path) -> TsplibFile:
    """Parse TSPLIB text into its raw structure, without building an Instance."""
    if isinstance(source, Path):
        text = source.read_text()
    elif isinstance(source, bytes):
        text = source.decode("utf-8", errors="replace")
    elif "\n" not in source and source.endswith((".tsp", ".atsp")):
        text = Path(source).read_text()
    else:
        text = source

    out = TsplibFile()
    lines = text.splitlines()
    i = 0
    saw_eof = False
    while i < len(lines):
        ln = i + 1
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        if raw == "EOF" or raw == "-1":
            saw_eof = True
            break

        key, _, value = raw.partition(":")
        key = key.strip().upper()
        value = value.strip()
        if key in _SPEC_KEYS:
            if key == "NAME":
                out.name = value
            elif key == "TYPE":
                out.type = value.upper()
            elif key == "COMMENT":
                out.comment = value
            elif key == "DIMENSION":
                try:
                    out.dimension = int(value)
                except ValueError:
                    raise TsplibParseError(f"line {ln}: bad DIMENSION {value!r}") from None
            elif key == "EDGE_WEIGHT_TYPE":
                out.edge_weight_type = value.upper()
            elif key == "EDGE_WEIGHT_FORMAT":
                out.edge_weight_format = value.upper()
            continue

        section = raw.split()[0].upper()
        if section not in _SECTION_KEYS:
            raise TsplibParseError(f"line {ln}: unknown keyword {raw.split()[0]!r}")
        if out.dimension <= 0:
            raise TsplibParseError(f"line {ln}: {section} before DIMENSION")
        n = out.dimension

        if section == "NODE_COORD_SECTION":
            coords = np.zeros((n, 2))
            for row in range(n):
                if i >= len(lines):
                    raise TsplibParseError(f"line {i + 1}: truncated NODE_COORD_SECTION")
                parts = lines[i].split()
                i += 1
                if len(parts) < 3:
                    raise TsplibParseError(f"line {i}: node line needs 'index x y'")
                try:
                    idx = int(parts[0])
                    coords[idx - 1] = (float(parts[1]), float(parts[2]))
                except (ValueError, IndexError):
                    raise TsplibParseError(f"line {i}: bad node coordinate line") from None
            out.node_coords = coords
        elif section == "EDGE_WEIGHT_SECTION":
            fmt = out.edge_weight_format or "FULL_MATRIX"
            if fmt not in _EXPLICIT_FORMATS:
                raise TsplibParseError(f"line {ln}: unsupported EDGE_WEIGHT_FORMAT {fmt!r}")
            need = {"FULL_MATRIX": n * n,
                    "UPPER_ROW": n * (n - 1) // 2,
                    "LOWER_DIAG_ROW": n * (n + 1) // 2,
                    "UPPER_DIAG_ROW": n * (n + 1) // 2}[fmt]
            values: list[float] = []
            while i < len(lines) and len(values) < need:
                row = lines[i].split()
                if row and not _is_number(row[0]):
                    break
                values.extend(float(tok) for tok in row)
                i += 1
            if len(values) != need:
                raise TsplibParseError(
                    f"line {i}: EDGE_WEIGHT_SECTION has {len(values)} values, expected {need}")
            out.matrix = _expand_matrix(np.asarray(values), fmt, n)
        else:  # sections we acknowledge but do not use
            while i < len(lines):
                row = lines[i].split()
                if row and not _is_number(row[0]):
                    break
                i += 1

    if not saw_eof and i >= len(lines):
        pass  # EOF marker is customary but not mandatory
    if out.dimension < 2:
        raise TsplibParseError("DIMENSION missing or < 2")
    return out


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def _expand_matrix(values: np.ndarray, fmt: str, n: int) -> np.ndarray:
    m = np.zeros((n, n))
    if fmt == "FULL_MATRIX":
        m = values.reshape(n, n)
        return m
    pos = 0
    if fmt == "UPPER_ROW":
        for r in range(n):
            for c in range(r + 1, n):
                m[r, c] = m[c, r] = values[pos]
                pos += 1
    elif fmt == "LOWER_DIAG_ROW":
        for r in range(n):
            for c in range(r + 1):
                m[r, c] = m[c, r] = values[pos]
                pos += 1
    elif fmt == "UPPER_DIAG_ROW":
        for r in range(n):
            for c in range(r, n):
                m[r, c] = m[c, r] = values[pos]
                pos += 1
    return m


def parse_tsplib(source: str | bytes | Path) -> Instance:
    """Parse TSPLIB text (or a path to it) into a symmetric Instance."""
    f = parse_tsplib_file(source)
    if f.type not in ("TSP", ""):
        raise TsplibParseError(
            f"TYPE {f.type} is not a symmetric TSP; reduce ATSP input via atsp_to_tsp")
    n = f.dimension
    ewt = f.edge_weight_type
    if ewt in _COORD_TYPES:
        if f.node_coords is None:
            raise TsplibParseError(f"{ewt} requires NODE_COORD_SECTION")
        metric = _METRICS[ewt]
        coords = f.node_coords
        d = np.zeros((n, n))
        for a in range(n):
            for b in range(a + 1, n):
                d[a, b] = d[b, a] = metric(coords[a], coords[b])
        kind = WeightKind(ewt) if ewt != "CEIL_2D" else WeightKind.EXPLICIT
        return Instance(d, name=f.name, coords=coords, weight_kind=kind)
    if ewt == "EXPLICIT":
        if f.matrix is None:
            raise TsplibParseError("EXPLICIT requires EDGE_WEIGHT_SECTION")
        m = f.matrix
        if not np.array_equal(m, m.T):
            raise TsplibParseError("EXPLICIT matrix is not symmetric")
        np.fill_diagonal(m, 0.0)
        return Instance(m, name=f.name, weight_kind=WeightKind.EXPLICIT)
    raise TsplibParseError(f"unsupported EDGE_WEIGHT_TYPE {ewt!r}")


def synthesize_tsplib(inst: Instance) -> str:
    """Render an Instance back to TSPLIB text (coords for the coordinate
    metrics, FULL_MATRIX otherwise); parse(synthesize(x)) == x."""
    lines = [f"NAME : {inst.name}", "TYPE : TSP", f"DIMENSION : {inst.n}"]
    kind = inst.weight_kind
    if kind in (WeightKind.EUC_2D, WeightKind.GEO, WeightKind.ATT) and inst.coords is not None:
        lines.append(f"EDGE_WEIGHT_TYPE : {kind.value}")
        lines.append("NODE_COORD_SECTION")
        for i, (x, y) in enumerate(inst.coords, start=1):
            lines.append(f"{i} {float(x)!r} {float(y)!r}")
    else:
        lines.append("EDGE_WEIGHT_TYPE : EXPLICIT")
        lines.append("EDGE_WEIGHT_FORMAT : FULL_MATRIX")
        lines.append("EDGE_WEIGHT_SECTION")
        for row in inst.dist:
            lines.append(" ".join(_fmt_weight(w) for w in row))
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def _fmt_weight(w: float) -> str:
    if float(w).is_integer():
        return str(int(w))
    return repr(float(w))
