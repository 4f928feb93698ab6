import math

import numpy as np
import pytest

from topotsp.graph import compute_one_tree
from topotsp.rtdl import alpha_scores, alpha_via_rtdl

from conftest import brute_force_alpha, random_instance


class TestAlphaScores:
    def test_unit_square_diagonal(self, unit_square):
        table = alpha_scores(unit_square, special=0)
        assert table.get(0, 2) == pytest.approx(math.sqrt(2) - 1.0)

    def test_zero_on_minimal_one_tree_edges(self, unit_square):
        table = alpha_scores(unit_square, special=0)
        ot = compute_one_tree(unit_square, special=0)
        for u, v, _ in list(ot.tree.edges) + list(ot.attach):
            assert table.get(u, v) == 0.0

    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("special", [0, 2])
    def test_matches_exhaustive_enumeration_n6(self, seed, special):
        inst = random_instance(6, seed)
        table = alpha_scores(inst, special=special)
        for i in range(6):
            for j in range(i + 1, 6):
                expected = brute_force_alpha(inst, special, i, j)
                assert table.get(i, j) == pytest.approx(expected, abs=1e-9), (i, j)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_forced_one_tree_totals(self, seed):
        inst = random_instance(9, seed, metric=False)
        base = compute_one_tree(inst, special=0).total
        table = alpha_scores(inst, special=0)
        for i in range(9):
            for j in range(i + 1, 9):
                forced = compute_one_tree(inst, special=0, forced_edge=(i, j)).total
                assert table.get(i, j) == pytest.approx(forced - base, abs=1e-9)

    def test_nonnegative_and_symmetric(self):
        inst = random_instance(12, 5)
        table = alpha_scores(inst, special=0)
        assert np.all(table.alpha >= 0.0)
        assert np.array_equal(table.alpha, table.alpha.T)


class TestAlphaViaRtdl:
    def test_unit_square_agreement(self, unit_square):
        table = alpha_scores(unit_square, special=0)
        assert alpha_via_rtdl(unit_square, 0, 1, 3) == pytest.approx(table.get(1, 3))

    def test_rejects_special_endpoint(self, unit_square):
        with pytest.raises(ValueError):
            alpha_via_rtdl(unit_square, 0, 0, 2)

    def test_zero_for_sub_mst_edges(self, unit_square):
        # (1,2) lies in the MST of the square minus vertex 0
        assert alpha_via_rtdl(unit_square, 0, 1, 2) == 0.0

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("n", [5, 8])
    def test_all_pairs_equal_alpha_scores(self, seed, n):
        inst = random_instance(n, seed, metric=bool(seed % 2))
        table = alpha_scores(inst, special=0)
        for i in range(1, n):
            for j in range(i + 1, n):
                assert alpha_via_rtdl(inst, 0, i, j) == table.get(i, j), (i, j)
