"""Tests for the brute-force walk tables and the count formulas."""

import csv
import io

import pytest

from kreweras.walks import (
    axis_count,
    build_walk_table,
    catalan,
    kreweras_count,
    square_lattice_count,
    square_lattice_oracle,
    walk_table_to_bseries,
)


def test_kreweras_count_first_values():
    assert [kreweras_count(n) for n in range(5)] == [1, 2, 16, 192, 2816]


def test_catalan_numbers():
    assert [catalan(i) for i in range(7)] == [1, 1, 2, 5, 14, 42, 132]


def test_short_walks_by_hand():
    table = build_walk_table(3)
    assert table.row_total(1) == 1
    assert table.row_total(2) == 3
    assert table.count(1, 1, 1) == 1
    assert table.count(0, 0, 3) == 2
    assert table.count(1, 0, 2) == 1
    assert table.count(5, 5, 2) == 0
    assert table.count(0, 0, 99) == 0


def test_oracle_matches_origin_formula():
    table = build_walk_table(24)
    for n in range(9):
        assert table.count(0, 0, 3 * n) == kreweras_count(n)


def test_oracle_matches_axis_formula():
    table = build_walk_table(30)
    for i in range(7):
        for n in range(7):
            if 3 * n + 2 * i <= 30:
                assert table.count(i, 0, 3 * n + 2 * i) == axis_count(i, n)


def test_axis_formula_reduces_to_origin_formula():
    assert all(axis_count(0, n) == kreweras_count(n) for n in range(10))


def test_counts_live_on_one_residue_class():
    table = build_walk_table(15)
    assert set(table.slice(2)) == {(0, 1), (1, 0), (2, 2)}
    for n in range(16):
        assert all((n + i + j) % 3 == 0 for (i, j) in table.slice(n))


def test_table_is_symmetric():
    table = build_walk_table(12)
    for n in range(13):
        for (i, j), value in table.slice(n).items():
            assert table.count(j, i, n) == value


def test_square_lattice_formula_against_oracle():
    assert square_lattice_count(2) == 10
    assert square_lattice_oracle(2) == 10
    for n in range(7):
        assert square_lattice_count(n) == square_lattice_oracle(n)


def test_table_to_bseries_keeps_counts():
    table = build_walk_table(6)
    series = walk_table_to_bseries(table)
    assert series.order == 7
    assert series.coefficient(0, 0, 6) == kreweras_count(2)
    assert series.total(6) == table.row_total(6)


def test_to_csv_writes_nonzero_counts():
    table = build_walk_table(3)
    stream = io.StringIO()
    rows = table.to_csv(stream, n_min=1, n_max=2)
    lines = list(csv.reader(io.StringIO(stream.getvalue())))
    assert lines[0] == ["n", "i", "j", "count"]
    assert rows == len(lines) - 1 == 4
    assert ["1", "1", "1", "1"] in lines


@pytest.mark.parametrize("func", [build_walk_table, kreweras_count, catalan, square_lattice_count])
def test_negative_arguments_rejected(func):
    with pytest.raises(ValueError):
        func(-1)
