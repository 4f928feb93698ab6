"""Benchmark harness: seeded trial matrices over generators or TSPLIB files,
with CSV/JSON reporting, and the penalty-vs-optimality probability study.

Per-trial seeds derive from the base seed plus the trial index, and every
algorithm in a run shares the trial's initial tour, so results are paired and
reproducible no matter how many workers execute them (TOPO_TSP_THREADS).
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .exact import HELD_KARP_MAX_N, held_karp
from .graph import Instance, Tour, edge_key, random_tour
from .heatmap import greedy_decode, load_heatmap
from .instances import gen_euclidean, gen_nonmetric
from .localsearch import Algorithm, SearchConfig, SearchStats, run_search
from .reports import RunRecord, gap_percent, records_to_csv, records_to_json
from .rtdl import edge_penalties
from .tsplib import parse_tsplib

GENERATORS = ("euclidean", "nonmetric", "tsplib-dir", "heatmap-dir")
SUMMARY_CSV_HEADER = ("group,algo,trials,mean_length,mean_time_s,"
                      "mean_trials_per_iter,fail_gap_rate,fail_time_rate")


@dataclass
class BenchSpec:
    generator: str = "euclidean"
    sizes: list[int] = field(default_factory=lambda: [100])
    trials: int = 100
    algorithms: list[Algorithm] = field(default_factory=lambda: [Algorithm.TWO_OPT])
    cfg: SearchConfig = field(default_factory=SearchConfig)
    seed: int = 0
    reference: str | Path | None = None  # "exact", a best-known JSON path, or None
    path: Path | None = None             # instance/heatmap directory

    def __post_init__(self) -> None:
        if self.generator not in GENERATORS:
            raise ValueError(f"generator must be one of {GENERATORS}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.algorithms:
            raise ValueError("need at least one algorithm")


@dataclass
class BenchSummary:
    group: str
    algo: str
    trials: int
    mean_length: float
    mean_time_s: float
    mean_trials_per_iter: float
    fail_gap_rate: float | None
    fail_time_rate: float
    mean_trials_series: list[float] = field(default_factory=list)


def _resolve_reference(spec: BenchSpec, inst: Instance) -> float | None:
    if spec.reference is None or spec.reference == "none":
        return None
    if spec.reference == "exact":
        if inst.n > HELD_KARP_MAX_N:
            raise ValueError(
                f"exact reference needs n <= {HELD_KARP_MAX_N}; "
                "supply a best-known lengths file instead")
        return held_karp(inst).length
    table = json.loads(Path(spec.reference).read_text())
    if inst.name not in table:
        raise ValueError(f"no reference length for {inst.name!r} in {spec.reference}")
    return float(table[inst.name])


def _trial_tasks(spec: BenchSpec) -> list[tuple[str, Instance, Tour, float | None, int]]:
    """(group, instance, initial tour, reference, trial seed) per trial."""
    tasks = []
    if spec.generator in ("euclidean", "nonmetric"):
        gen = gen_euclidean if spec.generator == "euclidean" else gen_nonmetric
        for size in spec.sizes:
            for t in range(spec.trials):
                inst = gen(size, spec.seed + t)
                tour0 = random_tour(inst, spec.seed + t)
                tasks.append((f"{spec.generator}-{size}", inst, tour0,
                              _resolve_reference(spec, inst), spec.seed + t))
        return tasks
    if spec.path is None:
        raise ValueError(f"generator {spec.generator!r} needs a directory path")
    if spec.generator == "tsplib-dir":
        for fp in sorted(Path(spec.path).glob("*.tsp")):
            inst = parse_tsplib(fp)
            ref = _resolve_reference(spec, inst)
            for t in range(spec.trials):
                tasks.append((inst.name, inst, random_tour(inst, spec.seed + t),
                              ref, spec.seed + t))
        return tasks
    # heatmap-dir: <name>.tsp next to <name>.hmap or <name>.csv; the decoded
    # tour is deterministic, so trials index only the record
    for fp in sorted(Path(spec.path).glob("*.tsp")):
        hm_path = fp.with_suffix(".hmap")
        if not hm_path.exists():
            hm_path = fp.with_suffix(".csv")
        if not hm_path.exists():
            continue
        inst = parse_tsplib(fp)
        tour0 = greedy_decode(load_heatmap(hm_path), inst)
        ref = _resolve_reference(spec, inst)
        for t in range(spec.trials):
            tasks.append((inst.name, inst, tour0, ref, spec.seed + t))
    return tasks


def _run_one(args) -> tuple[RunRecord, SearchStats]:
    group, inst, tour0, ref, algo, cfg, seed = args
    tour, stats = run_search(inst, tour0, replace(cfg, algorithm=algo, seed=seed))
    rec = RunRecord(
        instance=inst.name, algo=algo.value, seed=seed, length=stats.final_length,
        time_s=round(stats.wall_time, 3), iterations=stats.iterations,
        trials=stats.trials, gap_pct=gap_percent(stats.final_length, ref),
        hit_time_limit=stats.hit_time_limit)
    return rec, stats


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("TOPO_TSP_THREADS", "1")))
    except ValueError:
        return 1


def run_bench(spec: BenchSpec) -> tuple[list[RunRecord], list[BenchSummary]]:
    tasks = _trial_tasks(spec)
    jobs = []
    for group, inst, tour0, ref, trial_seed in tasks:
        for algo in spec.algorithms:
            jobs.append((group, inst, tour0, ref, algo, spec.cfg, trial_seed))

    workers = worker_count()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=1))
    else:
        results = [_run_one(j) for j in jobs]

    records = [rec for rec, _ in results]
    summaries = _summarize(jobs, results)
    return records, summaries


def _summarize(jobs, results) -> list[BenchSummary]:
    groups: dict[tuple[str, str], list[tuple[RunRecord, SearchStats]]] = {}
    for (group, *_rest), (rec, stats) in zip(jobs, results):
        groups.setdefault((group, rec.algo), []).append((rec, stats))

    out = []
    for (group, algo), runs in groups.items():
        recs = [r for r, _ in runs]
        stats = [s for _, s in runs]
        total_trials = sum(s.trials for s in stats)
        total_iters = sum(s.iterations for s in stats)
        gaps = [r.gap_pct for r in recs]
        fail_gap = (sum(1 for g in gaps if g is not None and g > 10.0) / len(gaps)
                    if all(g is not None for g in gaps) else None)
        max_iters = max((len(s.trials_per_iter) for s in stats), default=0)
        series = []
        for k in range(max_iters):
            vals = [s.trials_per_iter[k] for s in stats if len(s.trials_per_iter) > k]
            series.append(sum(vals) / len(vals))
        out.append(BenchSummary(
            group=group, algo=algo, trials=len(recs),
            mean_length=float(np.mean([r.length for r in recs])),
            mean_time_s=float(np.mean([r.time_s for r in recs])),
            mean_trials_per_iter=(total_trials / total_iters) if total_iters else 0.0,
            fail_gap_rate=fail_gap,
            fail_time_rate=sum(r.hit_time_limit for r in recs) / len(recs),
            mean_trials_series=series))
    return out


def summaries_to_csv(summaries: list[BenchSummary]) -> str:
    lines = [SUMMARY_CSV_HEADER]
    for s in summaries:
        fg = "" if s.fail_gap_rate is None else repr(s.fail_gap_rate)
        lines.append(f"{s.group},{s.algo},{s.trials},{s.mean_length!r},"
                     f"{s.mean_time_s!r},{s.mean_trials_per_iter!r},{fg},{s.fail_time_rate!r}")
    return "\n".join(lines) + "\n"


def summaries_to_json(summaries: list[BenchSummary]) -> str:
    return json.dumps([s.__dict__ for s in summaries], indent=2, default=list) + "\n"


def write_bench_outputs(records, summaries, out: Path) -> None:
    """Write per-run records (CSV/JSON by suffix) plus summary siblings."""
    out = Path(out)
    text = records_to_json(records) if out.suffix == ".json" else records_to_csv(records)
    out.write_text(text)
    out.with_name(out.stem + "-summary.csv").write_text(summaries_to_csv(summaries))
    out.with_name(out.stem + "-summary.json").write_text(summaries_to_json(summaries))


# ---------------------------------------------------------------------------
# Penalty-rank vs optimal-membership study
# ---------------------------------------------------------------------------

PROB_CSV_HEADER = "twoopt_iters,decile,probability,n_edges"


def run_prob_study(n: int, trials: int, twoopt_iters: list[int],
                   seed: int = 0) -> list[tuple[int, int, float, int]]:
    """Empirical probability that a tour edge lies in an exact optimal tour,
    bucketed by the edge's penalty rank decile (0 = lowest penalty).

    For every trial instance the exact optimum comes from held_karp, and
    partially optimized tours come from 2-opt truncated after `iters`
    improvement rounds (0 keeps the random start).
    """
    if not 3 <= n <= HELD_KARP_MAX_N:
        raise ValueError(f"prob study needs 3 <= n <= {HELD_KARP_MAX_N} (exact oracle)")
    counts: dict[tuple[int, int], list[int]] = {
        (it, d): [0, 0] for it in twoopt_iters for d in range(10)}
    for t in range(trials):
        inst = gen_euclidean(n, seed + t)
        opt = held_karp(inst)
        o = opt.tour.order
        opt_edges = set()
        for k in range(n):
            u, v = int(o[k]), int(o[(k + 1) % n])
            opt_edges.add((u, v) if u < v else (v, u))
        tour0 = random_tour(inst, seed + t)
        for it in twoopt_iters:
            if it == 0:
                tour = tour0
            else:
                tour, _ = run_search(inst, tour0, SearchConfig(max_iters=it))
            pmap = edge_penalties(inst, tour)
            ranked = sorted(pmap.penalties.items(),
                            key=lambda kv: (kv[1],) + edge_key(kv[0][0], kv[0][1], 0.0)[1:])
            for rank, (edge, _p) in enumerate(ranked):
                d = min(9, 10 * rank // len(ranked))
                bucket = counts[(it, d)]
                bucket[0] += edge in opt_edges
                bucket[1] += 1
    rows = []
    for (it, d), (members, total) in sorted(counts.items()):
        if total:
            rows.append((it, d, members / total, total))
    return rows


def prob_rows_to_csv(rows: list[tuple[int, int, float, int]]) -> str:
    lines = [PROB_CSV_HEADER]
    for it, d, p, total in rows:
        lines.append(f"{it},{d},{p!r},{total}")
    return "\n".join(lines) + "\n"
