import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacplan.errors import DegenerateTable
from pacplan.numerics import (
    ContingencyTable,
    bonferroni_multiplier,
    chi_square_independence,
    chi_square_sf,
)

from oracles import (
    chi_square_sf_quad,
    count_nominal_partitions,
    count_ordinal_partitions,
)


def table(cells):
    r = len(cells)
    c = len(cells[0])
    return ContingencyTable(
        tuple(f"r{i}" for i in range(r)),
        tuple(f"c{j}" for j in range(c)),
        tuple(tuple(row) for row in cells),
    )


class TestContingencyTable:
    def test_from_pairs_counts(self):
        pairs = [("a", "x"), ("a", "y"), ("b", "x"), ("a", "x")]
        t = ContingencyTable.from_pairs(pairs)
        assert t.row_labels == ("a", "b")
        assert t.col_labels == ("x", "y")
        assert t.counts == ((2, 1), (1, 0))
        assert t.grand_total() == 4

    def test_explicit_label_order(self):
        t = ContingencyTable.from_pairs(
            [("b", "y"), ("a", "x")], row_labels=["a", "b"], col_labels=["x", "y"]
        )
        assert t.counts == ((1, 0), (0, 1))

    def test_percentages_sum_to_100(self):
        t = table([[2, 1], [1, 0]])
        assert sum(sum(row) for row in t.percentages()) == pytest.approx(100.0)

    def test_rejects_negative_cells(self):
        with pytest.raises(ValueError):
            table([[1, -1], [0, 2]])

    def test_rejects_empty_table(self):
        with pytest.raises(ValueError):
            table([[0, 0], [0, 0]])


class TestChiSquareIndependence:
    def test_perfect_independence(self):
        res = chi_square_independence(table([[10, 10], [10, 10]]))
        assert res.statistic == 0.0
        assert res.p_value == 1.0

    def test_known_2x2(self):
        # expected cells are all 15, statistic = 4 * 25/15 = 20/3
        res = chi_square_independence(table([[20, 10], [10, 20]]))
        assert res.statistic == pytest.approx(20.0 / 3.0, abs=1e-12)
        assert res.df == 1
        assert res.p_value == pytest.approx(0.00983, abs=1e-5)

    def test_weak_2x2(self):
        res = chi_square_independence(table([[26, 24], [24, 26]]))
        assert res.statistic == pytest.approx(0.16, abs=1e-12)
        assert res.p_value == pytest.approx(0.689, abs=5e-4)

    def test_drops_zero_marginals(self):
        padded = table([[20, 0, 10], [0, 0, 0], [10, 0, 20]])
        res = chi_square_independence(padded)
        assert res.statistic == pytest.approx(20.0 / 3.0, abs=1e-12)
        assert res.df == 1

    def test_degenerate_after_dropping(self):
        with pytest.raises(DegenerateTable):
            chi_square_independence(table([[5, 0], [7, 0]]))

    @given(
        st.lists(
            st.lists(st.integers(min_value=1, max_value=40), min_size=2, max_size=4),
            min_size=2,
            max_size=4,
        ).filter(lambda rows: len({len(r) for r in rows}) == 1)
    )
    def test_permutation_invariance(self, cells):
        base = chi_square_independence(table(cells))
        rng = random.Random(13)
        rows = cells[:]
        rng.shuffle(rows)
        cols = list(range(len(cells[0])))
        rng.shuffle(cols)
        shuffled = [[row[j] for j in cols] for row in rows]
        res = chi_square_independence(table(shuffled))
        assert res.statistic == pytest.approx(base.statistic, rel=1e-12)
        assert res.df == base.df

    @given(
        st.lists(
            st.lists(st.integers(min_value=1, max_value=30), min_size=2, max_size=3),
            min_size=2,
            max_size=3,
        ).filter(lambda rows: len({len(r) for r in rows}) == 1),
        st.integers(min_value=2, max_value=9),
    )
    def test_count_scaling(self, cells, k):
        base = chi_square_independence(table(cells))
        scaled = chi_square_independence(table([[k * c for c in row] for row in cells]))
        assert scaled.statistic == pytest.approx(k * base.statistic, rel=1e-12)


class TestChiSquareSf:
    def test_zero_statistic(self):
        for df in (1, 2, 5, 10):
            assert chi_square_sf(0.0, df) == 1.0

    def test_classic_critical_value(self):
        assert chi_square_sf(3.841, 1) == pytest.approx(0.0500, abs=5e-5)

    def test_known_value(self):
        assert chi_square_sf(20.0 / 3.0, 1) == pytest.approx(0.00983, abs=1e-5)

    def test_against_quadrature_spot(self):
        for df in (1, 2, 3, 7):
            for x in (0.5, 2.0, 11.3, 25.0):
                assert chi_square_sf(x, df) == pytest.approx(
                    chi_square_sf_quad(x, df), abs=1e-10
                )

    def test_rejects_negative_x(self):
        with pytest.raises(ValueError):
            chi_square_sf(-1.0, 1)

    @given(
        st.floats(min_value=0.0, max_value=50.0),
        st.floats(min_value=0.0, max_value=50.0),
        st.integers(min_value=1, max_value=12),
    )
    def test_monotone_in_x(self, x1, x2, df):
        lo, hi = sorted((x1, x2))
        assert chi_square_sf(lo, df) >= chi_square_sf(hi, df) - 1e-12

    @given(st.floats(min_value=0.0, max_value=80.0), st.integers(min_value=1, max_value=12))
    def test_in_unit_interval(self, x, df):
        p = chi_square_sf(x, df)
        assert 0.0 <= p <= 1.0


class TestBonferroniMultiplier:
    def test_single_partition(self):
        for c in range(1, 7):
            assert bonferroni_multiplier(c, c, "ordinal") == 1
            assert bonferroni_multiplier(c, c, "nominal") == 1
            assert bonferroni_multiplier(c, 1, "ordinal") == 1
            assert bonferroni_multiplier(c, 1, "nominal") == 1

    def test_ordinal_small(self):
        assert bonferroni_multiplier(4, 2, "ordinal") == 3

    def test_nominal_small(self):
        assert bonferroni_multiplier(3, 2, "nominal") == 3

    def test_matches_enumeration(self):
        for c in range(1, 7):
            for r in range(1, c + 1):
                assert bonferroni_multiplier(c, r, "ordinal") == count_ordinal_partitions(c, r)
                assert bonferroni_multiplier(c, r, "nominal") == count_nominal_partitions(c, r)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            bonferroni_multiplier(3, 4, "ordinal")
        with pytest.raises(ValueError):
            bonferroni_multiplier(3, 2, "fancy")
