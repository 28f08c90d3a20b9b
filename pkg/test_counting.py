"""Tests for the closed-form counting series against the walk oracle."""

import pytest

from kreweras.counting import (
    axis_gf_closed,
    counting_bundle,
    q_diag_closed,
    q_full_by_recurrence,
    q_full_from_closed,
    q_x0_closed,
    verify_counting,
    verify_kernel_equation_R,
    verify_q_xy_closed,
)
from kreweras.series import diagonal, first_difference
from kreweras.walks import build_walk_table, walk_table_to_bseries


def test_q_x0_closed_matches_oracle():
    order = 15
    table = build_walk_table(order)
    qx0 = q_x0_closed(order)
    for n in range(order):
        for i in range(8):
            assert qx0.coefficient_at(n, i) == table.count(i, 0, n)


def test_q_x0_closed_has_nonnegative_integer_coefficients():
    qx0 = q_x0_closed(18)
    assert all(c.denominator == 1 and c > 0 for _, _, c in qx0.terms())
    assert qx0.x_exponent_range()[0] == 0


@pytest.mark.parametrize("i", range(5))
def test_axis_generating_functions(i):
    order = 16
    table = build_walk_table(order)
    series = axis_gf_closed(i, order)
    assert [series.coefficient_at(n, 0) for n in range(order)] == [table.count(i, 0, n) for n in range(order)]


def test_diagonal_matches_oracle():
    order = 20
    oracle = diagonal(walk_table_to_bseries(build_walk_table(order - 1)))
    assert first_difference(q_diag_closed(order), oracle, order) is None


def test_full_series_from_closed_boundary():
    order = 14
    oracle = walk_table_to_bseries(build_walk_table(order - 1))
    assert q_full_from_closed(order).first_difference(oracle) is None
    assert q_full_by_recurrence(order).first_difference(oracle) is None


def test_counting_bundle():
    bundle = counting_bundle(9)
    assert bundle.Qfull.coefficient(0, 0, 6) == 16
    assert bundle.Qx0.coefficient_at(2, 1) == 1
    assert bundle.W.coefficient_at(1, 0) == 2


def test_closed_q_xy_equation():
    report = verify_q_xy_closed(12)
    assert report.passed, [c for c in report.checks if not c.passed]


def test_kernel_equation_for_r():
    report = verify_kernel_equation_R(8)
    assert report.passed, [c for c in report.checks if not c.passed]


def test_verify_counting_small_order():
    report = verify_counting(12, 6)
    assert report.passed, [c for c in report.checks if not c.passed]
    assert any("n + i + j = 0 mod 3" in c.name for c in report.checks)


@pytest.mark.slow
def test_verify_counting_order_24():
    report = verify_counting(24, 12)
    assert report.passed, [c for c in report.checks if not c.passed]
