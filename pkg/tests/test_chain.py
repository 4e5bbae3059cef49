import numpy as np
import pytest

from reflectwalk import (
    HorizonTooLarge,
    excursion_series,
    excursion_table,
    n_step_table,
    reflection_time_table,
    step_row,
    verify_first_reflection_identity,
    verify_ladder_factorizations,
)
from conftest import random_laws


class TestStepRow:
    def test_law_a_at_origin(self, law_a):
        assert step_row(law_a, 0).entries == pytest.approx({0: 1 / 3, 1: 2 / 3})

    def test_law_a_interior(self, law_a):
        assert step_row(law_a, 5).entries == pytest.approx(
            {4: 1 / 3, 5: 1 / 3, 6: 1 / 3}
        )

    def test_law_b_at_origin(self, law_b):
        # folding: mu(1) + mu(-1) = 0.7
        assert step_row(law_b, 0).entries == pytest.approx({0: 0.3, 1: 0.7})

    def test_rows_are_stochastic(self):
        for law in random_laws(5, seed=2, centered=False):
            for x in range(0, 6):
                assert step_row(law, x).total() == pytest.approx(1.0, abs=1e-14)

    def test_matches_one_step_table(self, law_p5):
        for x in (0, 1, 3):
            row = step_row(law_p5, x)
            table = n_step_table(law_p5, x, 1)
            for y, q in row.entries.items():
                assert table.prob(1, y) == pytest.approx(q, abs=1e-16)


class TestNStepTable:
    def test_time_zero(self, law_b):
        table = n_step_table(law_b, 3, 0)
        assert table.prob(0, 3) == 1.0 and table.row_total(0) == 1.0

    def test_law_a_two_steps(self, law_a):
        # 1/3*1/3 (stay twice) + 2/3*1/3 (out and back)
        assert n_step_table(law_a, 0, 2).prob(2, 0) == pytest.approx(1 / 3, abs=1e-15)

    def test_stochastic_to_1000(self, law_a, law_b):
        for law in (law_a, law_b):
            table = n_step_table(law, 0, 1000)
            totals = np.array([table.row_total(n) for n in range(1001)])
            assert np.max(np.abs(totals - 1.0)) < 1e-12

    def test_horizon_guard(self, law_a):
        with pytest.raises(HorizonTooLarge):
            n_step_table(law_a, 0, 20_000)


class TestExcursionAndReflection:
    def test_excursion_one_step(self, law_a):
        table = excursion_table(law_a, 0, 1)
        assert table.prob(1, 0) == pytest.approx(1 / 3, abs=1e-16)
        assert table.prob(1, 1) == pytest.approx(1 / 3, abs=1e-16)
        assert table.row_total(1) == pytest.approx(2 / 3, abs=1e-16)

    def test_far_from_wall_matches_free_walk(self, law_p5):
        # no boundary interaction: excursion from large x is the unrestricted walk
        x, n = 30, 10
        exc = excursion_table(law_p5, x, n)
        free = np.array([1.0])
        for m in range(1, n + 1):
            free = np.convolve(free, law_p5.masses)
            for i, p in enumerate(free):
                dy = i - law_p5.a * m
                assert exc.prob(m, x + dy) == pytest.approx(p, abs=1e-15)

    def test_row_sums_decrease(self, law_b):
        table = excursion_table(law_b, 1, 80)
        totals = [table.row_total(n) for n in range(81)]
        assert all(b <= a for a, b in zip(totals, totals[1:]))

    def test_reflection_entries_law_a(self, law_a):
        refl = reflection_time_table(law_a, 0, 10)
        assert refl.prob(1, 1) == pytest.approx(1 / 3, abs=1e-16)
        assert refl.prob(2, 1) == pytest.approx(1 / 9, abs=1e-16)
        assert refl.prob(2, 0) == 0.0  # landing state 0 impossible
        assert refl.prob(2, 2) == 0.0  # overshoot bounded by a = 1

    def test_bookkeeping_identity(self, law_a, law_b, law_p5):
        # excursion mass + cumulative reflection mass = 1 at every horizon
        for law in (law_a, law_b, law_p5):
            exc = excursion_table(law, 2, 120)
            refl = reflection_time_table(law, 2, 120)
            cum = 0.0
            for n in range(121):
                cum += refl.row_total(n)
                assert exc.row_total(n) + cum == pytest.approx(1.0, abs=1e-12)

    def test_excursion_series_matches_table(self, law_b):
        table = excursion_table(law_b, 2, 50)
        series = excursion_series(law_b, 2, [0, 3], 50)
        for y in (0, 3):
            assert np.array_equal(series[y].coeffs, table.column(y).coeffs)


class TestIdentities:
    def test_hand_case(self, law_a):
        # n=1, x=0, y=1: 2/3 = 1/3 (no reflection) + 1/3 * 1 (reflect to 1)
        assert verify_first_reflection_identity(law_a, 0, 1, 1) == pytest.approx(
            0.0, abs=1e-16
        )

    def test_first_reflection_grid(self, law_a, law_b):
        for law in (law_a, law_b):
            for x in (0, 1, 3):
                for y in (0, 1, 2):
                    assert verify_first_reflection_identity(law, x, y, 60) < 1e-12

    def test_ladder_factorizations_grid(self, law_a, law_b, law_p5):
        for law in (law_a, law_b, law_p5):
            for x in (0, 1, 3):
                for y in (0, 1, 2):
                    res_e, res_r = verify_ladder_factorizations(law, x, y, 60)
                    assert res_e < 1e-12 and res_r < 1e-12

    def test_random_laws_identities(self):
        for law in random_laws(3, seed=17, centered=False):
            assert verify_first_reflection_identity(law, 2, 1, 40) < 1e-12
            res_e, res_r = verify_ladder_factorizations(law, 2, 1, 40)
            assert res_e < 1e-12 and res_r < 1e-12
