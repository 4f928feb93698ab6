import importlib.resources as resources
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topotsp.atsp import atsp_cycle_cost, atsp_to_tsp
from topotsp.exact import held_karp
from topotsp.graph import Instance, Tour, WeightKind
from topotsp.heatmap import Heatmap, greedy_decode, load_heatmap, save_heatmap
from topotsp.instances import gen_euclidean, gen_nonmetric
from topotsp.reports import (
    RunRecord,
    gap_percent,
    records_from_csv,
    records_from_json,
    records_to_csv,
    records_to_json,
)
from topotsp.tsplib import (
    TsplibParseError,
    att,
    euc_2d,
    geo,
    parse_tsplib,
    parse_tsplib_file,
    synthesize_tsplib,
)


def data_text(name: str) -> str:
    return resources.files("topotsp.data").joinpath(name).read_text()


EUC_SAMPLE = """NAME : mini
TYPE : TSP
DIMENSION : 3
EDGE_WEIGHT_TYPE : EUC_2D
NODE_COORD_SECTION
1 0 0
2 3 4
3 0 8
EOF
"""


class TestMetrics:
    def test_euc_345(self):
        assert euc_2d(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == 5

    def test_att_hand_value(self):
        # dx=3, dy=4: r = sqrt(2.5) ~ 1.5811, t = 2 > r, so d = 2
        assert att(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == 2

    def test_att_rounds_up(self):
        # dx=4, dy=4: r = sqrt(3.2) ~ 1.789, t = 2 > r -> 2; dx=10,dy=0: r=sqrt(10)~3.16, t=3 < r -> 4
        assert att(np.array([0.0, 0.0]), np.array([10.0, 0.0])) == 4

    def test_geo_identical_coords(self):
        p = np.array([38.24, 20.42])
        assert geo(p, p) == 0


class TestParser:
    def test_euclidean_sample(self):
        inst = parse_tsplib(EUC_SAMPLE)
        assert inst.n == 3
        assert inst.w(0, 1) == 5.0
        assert inst.w(1, 2) == 5.0
        assert inst.w(0, 2) == 8.0
        assert inst.weight_kind is WeightKind.EUC_2D

    def test_unknown_keyword_reports_line(self):
        bad = EUC_SAMPLE.replace("NODE_COORD_SECTION", "NODE_COORD_SECTOIN")
        with pytest.raises(TsplibParseError, match="line 5"):
            parse_tsplib(bad)

    def test_dimension_mismatch(self):
        bad = EUC_SAMPLE.replace("DIMENSION : 3", "DIMENSION : 4")
        with pytest.raises(TsplibParseError):
            parse_tsplib(bad)

    def test_explicit_full_matrix(self):
        text = """NAME : m
TYPE : TSP
DIMENSION : 3
EDGE_WEIGHT_TYPE : EXPLICIT
EDGE_WEIGHT_FORMAT : FULL_MATRIX
EDGE_WEIGHT_SECTION
0 1 2
1 0 3
2 3 0
EOF
"""
        inst = parse_tsplib(text)
        assert inst.w(1, 2) == 3.0

    def test_upper_row_equals_full_matrix(self):
        upper = """NAME : u
TYPE : TSP
DIMENSION : 4
EDGE_WEIGHT_TYPE : EXPLICIT
EDGE_WEIGHT_FORMAT : UPPER_ROW
EDGE_WEIGHT_SECTION
1 2 3
4 5
6
EOF
"""
        full_rows = np.array([[0, 1, 2, 3], [1, 0, 4, 5], [2, 4, 0, 6], [3, 5, 6, 0]], dtype=float)
        full = "\n".join(["NAME : f", "TYPE : TSP", "DIMENSION : 4",
                          "EDGE_WEIGHT_TYPE : EXPLICIT", "EDGE_WEIGHT_FORMAT : FULL_MATRIX",
                          "EDGE_WEIGHT_SECTION"] +
                         [" ".join(str(int(v)) for v in row) for row in full_rows] + ["EOF"]) + "\n"
        assert np.array_equal(parse_tsplib(upper).dist, parse_tsplib(full).dist)

    def test_lower_and_upper_diag_rows(self):
        lower = """DIMENSION : 3
TYPE : TSP
EDGE_WEIGHT_TYPE : EXPLICIT
EDGE_WEIGHT_FORMAT : LOWER_DIAG_ROW
EDGE_WEIGHT_SECTION
0
7 0
8 9 0
EOF
"""
        upper = """DIMENSION : 3
TYPE : TSP
EDGE_WEIGHT_TYPE : EXPLICIT
EDGE_WEIGHT_FORMAT : UPPER_DIAG_ROW
EDGE_WEIGHT_SECTION
0 7 8
0 9
0
EOF
"""
        assert np.array_equal(parse_tsplib(lower).dist, parse_tsplib(upper).dist)

    def test_atsp_type_rejected_for_instance(self):
        text = """TYPE : ATSP
DIMENSION : 3
EDGE_WEIGHT_TYPE : EXPLICIT
EDGE_WEIGHT_FORMAT : FULL_MATRIX
EDGE_WEIGHT_SECTION
0 1 2
3 0 4
5 6 0
EOF
"""
        with pytest.raises(TsplibParseError, match="ATSP"):
            parse_tsplib(text)
        raw = parse_tsplib_file(text)  # raw structure still accessible
        assert raw.matrix is not None and raw.matrix[0, 1] != raw.matrix[1, 0]

    def test_roundtrip_euclidean(self):
        inst = parse_tsplib(EUC_SAMPLE)
        again = parse_tsplib(synthesize_tsplib(inst))
        assert np.array_equal(inst.dist, again.dist)
        assert again.weight_kind is WeightKind.EUC_2D

    def test_roundtrip_explicit_floats(self):
        inst = gen_nonmetric(6, 3)
        again = parse_tsplib(synthesize_tsplib(inst))
        assert np.array_equal(inst.dist, again.dist)


class TestBundledData:
    def test_berlin52_parses(self):
        inst = parse_tsplib(data_text("berlin52.tsp"))
        assert inst.n == 52 and inst.name == "berlin52"
        # published optimal tour evaluates to the published optimum
        opt = [1, 49, 32, 45, 19, 41, 8, 9, 10, 43, 33, 51, 11, 52, 14, 13, 47,
               26, 27, 28, 12, 25, 4, 6, 15, 5, 24, 48, 38, 37, 40, 39, 36, 35,
               34, 44, 46, 16, 29, 50, 20, 23, 30, 2, 7, 42, 21, 17, 3, 18, 31, 22]
        assert Tour(inst, [c - 1 for c in opt]).length == 7542.0

    def test_ulysses16_geo_optimum(self):
        inst = parse_tsplib(data_text("ulysses16.tsp"))
        opt = [1, 14, 13, 12, 7, 6, 15, 5, 11, 9, 10, 16, 3, 2, 4, 8]
        assert Tour(inst, [c - 1 for c in opt]).length == 6859.0

    def test_best_known_contains_berlin52(self):
        best = json.loads(data_text("best_known.json"))
        assert best["berlin52"] == 7542


class TestGenerators:
    def test_seeded_repeatable(self):
        a, b = gen_euclidean(20, 5), gen_euclidean(20, 5)
        assert np.array_equal(a.dist, b.dist)

    def test_triangle_inequality_sampled(self):
        inst = gen_euclidean(30, 1)
        rng = np.random.default_rng(0)
        for _ in range(200):
            i, j, k = rng.choice(30, size=3, replace=False)
            assert inst.dist[i, j] <= inst.dist[i, k] + inst.dist[k, j] + 1e-12

    def test_nonmetric_open_interval(self):
        inst = gen_nonmetric(40, 2)
        off = inst.dist[~np.eye(40, dtype=bool)]
        assert np.all(off > 0.0) and np.all(off < 1.0)


class TestHeatmap:
    def test_chain_heatmap_decodes_path(self):
        inst = gen_euclidean(4, 0)
        v = np.zeros((4, 4))
        v[0, 1] = v[1, 2] = v[2, 3] = 1.0
        t = greedy_decode(Heatmap(v), inst)
        assert t.order.tolist() == [0, 1, 2, 3]

    def test_uniform_heatmap_falls_back_to_index_order(self):
        inst = gen_euclidean(5, 1)
        t = greedy_decode(Heatmap(np.ones((5, 5))), inst)
        assert t.order.tolist() == [0, 1, 2, 3, 4]

    def test_shape_mismatch(self):
        inst = gen_euclidean(4, 0)
        with pytest.raises(ValueError):
            greedy_decode(Heatmap(np.ones((5, 5))), inst)

    def test_nan_rejected(self):
        v = np.ones((3, 3))
        v[0, 1] = np.nan
        with pytest.raises(ValueError):
            Heatmap(v)

    def test_binary_roundtrip(self, tmp_path):
        rng = np.random.default_rng(4)
        hm = Heatmap(rng.random((7, 7)))
        p = tmp_path / "h.hmap"
        save_heatmap(hm, p)
        again = load_heatmap(p)
        assert np.array_equal(hm.values, again.values)
        assert load_heatmap(p, fmt="f64le-bin").n == 7

    def test_csv_roundtrip(self, tmp_path):
        rng = np.random.default_rng(5)
        hm = Heatmap(rng.random((6, 6)))
        p = tmp_path / "h.csv"
        save_heatmap(hm, p, fmt="csv")
        assert np.allclose(load_heatmap(p).values, hm.values)

    @given(st.integers(0, 1000))
    @settings(max_examples=25, deadline=None)
    def test_decode_always_valid(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 30))
        inst = gen_euclidean(n, seed)
        hm = Heatmap(rng.random((n, n)))
        t = greedy_decode(hm, inst)
        assert sorted(t.order.tolist()) == list(range(n))


class TestAtspReduction:
    def test_three_city_directed_cycle(self):
        c = np.array([[0.0, 1.0, 10.0], [10.0, 0.0, 1.0], [1.0, 10.0, 0.0]])
        inst, back, const = atsp_to_tsp(c)
        assert inst.n == 6
        res = held_karp(inst)
        cities = back(res.tour)
        assert atsp_cycle_cost(c, cities) == 3.0
        assert res.length == pytest.approx(3.0 + const)

    def test_symmetric_input_preserves_optimum(self):
        rng = np.random.default_rng(8)
        w = rng.uniform(0.1, 1.0, size=(4, 4))
        c = np.triu(w, 1)
        c = c + c.T
        from topotsp.exact import brute_force
        direct = brute_force(Instance(c)).length
        inst, back, const = atsp_to_tsp(c)
        reduced = held_karp(inst)
        assert reduced.length - const == pytest.approx(direct, rel=1e-12)
        assert atsp_cycle_cost(c, back(reduced.tour)) == pytest.approx(direct, rel=1e-12)

    def test_back_map_of_greedy_tour(self):
        from topotsp.graph import nearest_neighbor_tour
        rng = np.random.default_rng(9)
        c = rng.uniform(0.05, 1.0, size=(6, 6))
        np.fill_diagonal(c, 0.0)
        inst, back, _ = atsp_to_tsp(c)
        cities = back(nearest_neighbor_tour(inst, start=2))
        assert sorted(cities) == list(range(6))
        assert cities[0] == 0

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            atsp_to_tsp(np.zeros((2, 2)))
        bad = np.ones((4, 4))
        with pytest.raises(ValueError):
            atsp_to_tsp(bad)  # nonzero diagonal


class TestReports:
    def test_empty_is_header_only(self):
        assert records_to_csv([]) == records_to_csv([])
        assert records_to_csv([]).strip().split("\n") == [
            "instance,algo,seed,length,time_s,iterations,trials,gap_pct,hit_time_limit"]

    def test_csv_roundtrip(self):
        rec = RunRecord("berlin52", "2opt-rtdl", 7, 7914.37, 1.251, 210, 15031,
                        gap_pct=4.937, hit_time_limit=False)
        assert records_from_csv(records_to_csv([rec])) == [rec]

    def test_json_roundtrip(self):
        rec = RunRecord("x", "2opt", 0, 1.5, 0.25, 3, 10)
        assert records_from_json(records_to_json([rec])) == [rec]

    def test_gap_absent_without_reference(self):
        rec = RunRecord("x", "2opt", 0, 1.0, 0.1, 1, 1)
        line = records_to_csv([rec]).strip().split("\n")[1]
        assert ",," in line
        assert gap_percent(1.0, None) is None
        assert gap_percent(110.0, 100.0) == pytest.approx(10.0)
