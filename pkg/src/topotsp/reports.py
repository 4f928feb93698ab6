"""Machine-readable run records: CSV/JSON writers and their inverse readers."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

CSV_HEADER = "instance,algo,seed,length,time_s,iterations,trials,gap_pct,hit_time_limit"


@dataclass
class RunRecord:
    instance: str
    algo: str
    seed: int
    length: float
    time_s: float
    iterations: int
    trials: int
    gap_pct: float | None = None
    hit_time_limit: bool = False


def gap_percent(length: float, reference: float | None) -> float | None:
    if reference is None or reference <= 0:
        return None
    return 100.0 * (length - reference) / reference


def records_to_csv(records: list[RunRecord]) -> str:
    lines = [CSV_HEADER]
    for r in records:
        gap = "" if r.gap_pct is None else repr(r.gap_pct)
        lines.append(
            f"{r.instance},{r.algo},{r.seed},{r.length!r},{r.time_s!r},"
            f"{r.iterations},{r.trials},{gap},{str(r.hit_time_limit).lower()}")
    return "\n".join(lines) + "\n"


def records_from_csv(text: str) -> list[RunRecord]:
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("bad report header")
    out = []
    for ln in lines[1:]:
        f = ln.split(",")
        out.append(RunRecord(
            instance=f[0], algo=f[1], seed=int(f[2]), length=float(f[3]),
            time_s=float(f[4]), iterations=int(f[5]), trials=int(f[6]),
            gap_pct=None if f[7] == "" else float(f[7]),
            hit_time_limit=f[8] == "true"))
    return out


def records_to_json(records: list[RunRecord]) -> str:
    return json.dumps([asdict(r) for r in records], indent=2) + "\n"


def records_from_json(text: str) -> list[RunRecord]:
    return [RunRecord(**obj) for obj in json.loads(text)]


def write_report(records: list[RunRecord], path: str | Path) -> None:
    """Write records as CSV or JSON depending on the file suffix."""
    path = Path(path)
    text = records_to_json(records) if path.suffix == ".json" else records_to_csv(records)
    path.write_text(text)
