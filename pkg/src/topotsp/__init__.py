"""topotsp: topology-guided TSP local search.

Computes the divergence barcode between a candidate tour and the instance
MST, turns it into per-edge penalties, and uses those to steer 2-opt/3-opt,
heatmap tour refinement, and RL reward shaping.  Ships a TSPLIB parser,
exact small-instance oracles, and a benchmark harness.
"""
from .graph import (
    Instance,
    InvalidInstanceError,
    OneTree,
    SpanningTree,
    Tour,
    UnionFind,
    WeightKind,
    compute_mst,
    compute_one_tree,
    nearest_neighbor_tour,
    path_length,
    random_tour,
    tour_length,
)
from .rtdl import (
    AlphaTable,
    Bar,
    Barcode,
    PenaltyMap,
    alpha_scores,
    alpha_via_rtdl,
    barcode_to_csv,
    compute_barcode,
    edge_penalties,
    oracle_bijection,
    reward_shaping,
)
from .exact import ExactMethod, ExactResult, brute_force, held_karp

__version__ = "0.1.0"

__all__ = [
    "AlphaTable", "Bar", "Barcode", "ExactMethod", "ExactResult", "Instance",
    "InvalidInstanceError", "OneTree", "PenaltyMap", "SpanningTree", "Tour",
    "UnionFind", "WeightKind", "alpha_scores", "alpha_via_rtdl",
    "barcode_to_csv", "brute_force", "compute_barcode", "compute_mst",
    "compute_one_tree", "edge_penalties", "held_karp", "nearest_neighbor_tour",
    "oracle_bijection", "path_length", "random_tour", "reward_shaping",
    "tour_length",
]
