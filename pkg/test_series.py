"""Tests for the exact series arithmetic."""

import random
from fractions import Fraction

import pytest

from kreweras.series import (
    BSeries,
    DivisionRemainderError,
    LPoly,
    TSeries,
    compose,
    diagonal,
    divide_exact,
    first_difference,
    format_rat,
    invert,
    mul,
    parse_rat,
    solve_valuation_fixed_point,
    sqrt,
    substitute_monomial,
    x_part,
)


# Random series are drawn from this fixed seed so failures reproduce.
SEED = 20240607


def coefficients(series: TSeries, upto: int):
    return [series.coefficient_at(n, 0) for n in range(upto)]


def random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-5, 5), rng.randint(1, 4))


def random_unit(rng: random.Random, order: int, square_lead: bool = False) -> TSeries:
    """Series whose t^0 coefficient is a non-zero rational, optionally a square."""
    lead = Fraction(rng.randint(1, 6), rng.randint(1, 5))
    terms = {(0, 0): lead**2 if square_lead else lead}
    for n in range(1, order):
        for e in range(-2, 3):
            if rng.random() < 0.4:
                terms[(n, e)] = random_rational(rng)
    return TSeries.from_terms(terms, order)


def random_bseries(rng: random.Random, order: int) -> BSeries:
    terms = {}
    for _ in range(30):
        key = (rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, order - 1))
        terms[key] = random_rational(rng)
    return BSeries.from_terms(terms, order)


# ============================================================================
# Rationals
# ============================================================================
def test_parse_rat_accepts_fractions_and_ints():
    assert parse_rat("3/6") == Fraction(1, 2)
    assert parse_rat("-2") == Fraction(-2)
    assert parse_rat(5) == Fraction(5)


@pytest.mark.parametrize("value", [0.5, "0.5", "1/0", "a/b", True])
def test_parse_rat_refuses_inexact_input(value):
    with pytest.raises(ValueError):
        parse_rat(value)


def test_format_rat_always_writes_a_denominator():
    assert format_rat(Fraction(2)) == "2/1"
    assert format_rat(Fraction(-3, 4)) == "-3/4"


# ============================================================================
# Arithmetic
# ============================================================================
def test_invert_geometric_series():
    one_minus_t = TSeries.from_terms({(0, 0): 1, (1, 0): -1}, 8)
    inverse = invert(one_minus_t)
    assert inverse.precision == 8
    assert coefficients(inverse, 8) == [1] * 8


def test_invert_negative_valuation():
    series = TSeries.from_terms({(1, 0): 1, (2, 0): -1}, 6)
    inverse = invert(series)
    assert inverse.valuation == -1
    assert inverse.precision == 4
    assert [inverse.coefficient_at(n, 0) for n in range(-1, 4)] == [1, 1, 1, 1, 1]


def test_invert_refuses_x_dependent_leading_coefficient():
    with pytest.raises(ValueError, match="depends on x"):
        invert(TSeries.constant(LPoly.monomial(1, 1), 4))


def test_sqrt_of_one_minus_four_t():
    series = TSeries.from_terms({(0, 0): 1, (1, 0): -4}, 7)
    root = sqrt(series)
    assert coefficients(root, 7) == [1, -2, -2, -4, -10, -28, -84]
    assert first_difference(root * root, series) is None


def test_sqrt_rejects_odd_valuation_and_non_squares():
    with pytest.raises(ValueError, match="odd"):
        sqrt(TSeries.monomial(1, 1, 0, 5))
    with pytest.raises(ValueError, match="square"):
        sqrt(TSeries.constant(2, 5))


def test_mul_tracks_precision_pessimistically():
    a = TSeries.from_terms({(0, 0): 1, (1, 1): 2}, 5)
    b = TSeries.from_terms({(2, 0): 1}, 5)
    product = a * b
    assert product.valuation == 2
    assert product.precision == 5
    assert product.coefficient_at(3, 1) == 2


def test_x_part_modes():
    series = TSeries.constant(LPoly({-1: 1, 0: 2, 1: 3}), 3)
    assert x_part(series, "positive").coefficient(0) == LPoly({1: 3})
    assert x_part(series, "negative").coefficient(0) == LPoly({-1: 1})
    assert x_part(series, "nonnegative").coefficient(0) == LPoly({0: 2, 1: 3})
    assert x_part(series, "nonpositive").coefficient(0) == LPoly({-1: 1, 0: 2})
    with pytest.raises(ValueError):
        x_part(series, "even")


def test_substitute_monomial():
    series = TSeries.from_terms({(0, 1): 1, (1, 2): 1}, 3)
    value = substitute_monomial(series, 2, 1)
    assert value.precision == 4
    assert coefficients(value, 4) == [0, 2, 0, 4]


def test_substitute_monomial_checks_declared_floor():
    series = TSeries.from_terms({(0, 1): 1}, 3)
    with pytest.raises(ValueError, match="floor"):
        substitute_monomial(series, 2, 1, x_floor=2)


def test_divide_exact_with_x_dependent_leading_coefficient():
    numerator = TSeries.from_terms({(0, 1): 1, (1, 0): 1, (1, 1): 1, (2, 0): 1}, 6)
    denominator = TSeries.from_terms({(0, 1): 1, (1, 0): 1}, 8)
    quotient = divide_exact(numerator, denominator)
    assert first_difference(quotient, TSeries.from_terms({(0, 0): 1, (1, 0): 1}, 6)) is None


def test_divide_exact_raises_on_remainder():
    with pytest.raises(DivisionRemainderError):
        divide_exact(TSeries.constant(1, 4), TSeries.constant(LPoly({0: 1, 1: 1}), 4))


def test_fixed_point_gives_catalan_numbers():
    order = 8

    def update(u: TSeries) -> TSeries:
        return 1 + (u * u).shift_t(1)

    catalan = solve_valuation_fixed_point(update, order)
    assert coefficients(catalan, order) == [1, 1, 2, 5, 14, 42, 132, 429]


def test_compose_substitutes_a_series_for_x():
    a = TSeries.constant(LPoly({1: 1, 2: 1}), 6)
    u = TSeries.monomial(1, 1, 0, 6)
    assert coefficients(compose(a, u), 6) == [0, 1, 1, 0, 0, 0]
    with pytest.raises(ValueError):
        compose(a, TSeries.constant(1, 6))


def test_series_json_round_trip():
    series = TSeries.from_terms({(-1, 2): Fraction(1, 3), (0, -1): -2, (2, 0): 5}, 4)
    restored = TSeries.from_json(series.to_json())
    assert restored.valuation == series.valuation
    assert first_difference(restored, series) is None


# ============================================================================
# Bivariate series
# ============================================================================
def test_bseries_swap_and_scale_vars():
    b = BSeries.from_terms({(1, 0, 0): 1, (1, 2, 1): 3}, 3)
    swapped = b.swap()
    assert swapped.coefficient(0, 1, 0) == 1
    assert swapped.coefficient(2, 1, 1) == 3
    scaled = b.scale_vars(2, 3)
    assert scaled.coefficient(1, 2, 1) == 3 * 2 * 9


def test_bseries_restrictions_and_rows():
    b = BSeries.from_terms({(0, 0, 0): 1, (2, 0, 1): 4, (0, 3, 1): 5, (1, 1, 2): 6}, 3)
    assert b.restrict_y0().coefficient(0, 3, 1) == 0
    assert b.restrict_y0().coefficient(2, 0, 1) == 4
    assert b.restrict_x0().coefficient(0, 3, 1) == 5
    assert b.row(0).coefficient_at(1, 2) == 4
    assert b.column(0).coefficient_at(1, 3) == 5


def test_diagonal_keeps_i_equal_j():
    b = BSeries.from_terms({(1, 1, 0): 2, (1, 0, 0): 1, (2, 2, 1): 7}, 2)
    diag = diagonal(b)
    assert diag.coefficient_at(0, 1) == 2
    assert diag.coefficient_at(1, 2) == 7
    assert diag.coefficient_at(0, 0) == 0


def test_bseries_product_order():
    a = BSeries.from_terms({(0, 0, 0): 1, (1, 0, 1): 1}, 4)
    b = BSeries.from_terms({(0, 1, 1): 1}, 4)
    product = a * b
    assert product.order == 4
    assert product.coefficient(1, 1, 2) == 1


# ============================================================================
# Properties
# ============================================================================
def test_sqrt_squares_back():
    rng = random.Random(SEED)
    for _ in range(100):
        a = random_unit(rng, 8, square_lead=True)
        root = sqrt(a)
        assert root.coefficient_at(0, 0) > 0
        assert first_difference(root * root, a) is None


def test_invert_is_a_two_sided_inverse():
    rng = random.Random(SEED)
    for _ in range(30):
        a = random_unit(rng, 10)
        one = TSeries.constant(1, 10)
        assert first_difference(mul(a, invert(a)), one) is None
        assert first_difference(mul(invert(a), a), one) is None


def test_x_parts_reassemble():
    rng = random.Random(SEED)
    for _ in range(20):
        a = random_unit(rng, 8)
        assert first_difference(x_part(a, "positive") + x_part(a, "nonpositive"), a) is None
        assert first_difference(x_part(a, "negative") + x_part(a, "nonnegative"), a) is None


def test_fixed_point_satisfies_its_equation():
    order = 12

    def update(u: TSeries) -> TSeries:
        return 1 + (u * u + u.shift_x(1)).shift_t(1)

    u = solve_valuation_fixed_point(update, order)
    assert first_difference(update(u), u, order) is None
    assert u.coefficient_at(1, 1) == 1
    assert u.coefficient_at(1, 0) == 1


def test_bseries_ring_axioms():
    rng = random.Random(SEED)
    order = 16
    for _ in range(5):
        a, b, c = (random_bseries(rng, order) for _ in range(3))
        assert (a + b).first_difference(b + a) is None
        assert ((a + b) + c).first_difference(a + (b + c)) is None
        assert (a * b).first_difference(b * a, order) is None
        assert ((a * b) * c).first_difference(a * (b * c), order) is None
        assert (a * (b + c)).first_difference(a * b + a * c, order) is None
        assert (a - a).is_zero()
        assert (a * BSeries.from_terms({(0, 0, 0): 1}, order)).first_difference(a) is None
