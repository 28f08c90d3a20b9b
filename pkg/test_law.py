"""Tests for the time-dependent law of the reflected chain."""

import csv
import io

import numpy as np
import pytest

from kreweras.law import (
    b_decomposition,
    b_from_roots,
    b_lagrange,
    d_x0_closed,
    e_coefficients_closed,
    ergodicity_observe,
    law_dp,
    origin_trace,
    p00_closed_general,
    p00_from_table,
    p00_symmetric,
    q_px0_symmetric,
    q_from_table,
    s_x0_closed,
    sd_from_oracle,
    verify_functional_equation,
    verify_law,
    verify_sd_equations,
)
from kreweras.schemas import ChainParams
from kreweras.series import TSeries, first_difference

ASYMMETRIC = ChainParams(p="1/3", q="1/2", r="1/6")
SYMMETRIC = ChainParams(p="2/5", q="2/5", r="1/5")
MIRRORED = ChainParams(p="1/2", q="1/3", r="1/6")
TRANSIENT = ChainParams(p="1/6", q="1/3", r="1/2")

ORDER = 12


def failed(report):
    return [c for c in report.checks if not c.passed]


def oracle(params, order=ORDER):
    return law_dp(params, order - 1)


# ============================================================================
# Oracle
# ============================================================================
def test_first_steps_by_hand():
    table = law_dp(ASYMMETRIC, 6)
    assert table.probability(1, 1, 1) == 1
    assert table.probability(0, 1, 2) == ASYMMETRIC.p
    assert table.probability(0, 0, 3) == ASYMMETRIC.p * ASYMMETRIC.q_second + ASYMMETRIC.q * ASYMMETRIC.p_prime
    assert table.probability(0, 0, 7) == 0
    assert all(table.row_total(n) == 1 for n in range(7))


def test_law_lives_on_one_residue_class():
    table = law_dp(MIRRORED, 12)
    assert set(table.slice(2)) == {(0, 1), (1, 0), (2, 2)}
    for n in range(13):
        assert all((n + i + j) % 3 == 0 for (i, j) in table.slice(n))


def test_law_dp_argument_checks():
    with pytest.raises(ValueError):
        law_dp(ASYMMETRIC, -1)
    with pytest.raises(ValueError, match="cannot hold"):
        law_dp(ASYMMETRIC, 10, grid=11)
    assert law_dp(ASYMMETRIC, 10, grid=12).n_max == 10


def test_law_table_csv():
    stream = io.StringIO()
    rows = law_dp(SYMMETRIC, 2).to_csv(stream)
    lines = list(csv.reader(io.StringIO(stream.getvalue())))
    assert lines[0] == ["n", "i", "j", "probability"]
    assert rows == 5
    assert ["2", "2", "2", "1/5"] in lines
    assert ["0", "0", "0", "1/1"] in lines
    assert ["2", "0", "1", "2/5"] in lines


def test_origin_trace_matches_exact_table():
    table = law_dp(ASYMMETRIC, 15)
    trace = origin_trace(ASYMMETRIC, 15)
    exact = np.array([float(table.probability(0, 0, n)) for n in range(16)])
    assert np.allclose(trace, exact, atol=1e-14)


def test_q_from_table_weights_the_boundaries():
    table = oracle(ASYMMETRIC, 6)
    q = q_from_table(table)
    assert q.coefficient(0, 0, 0) == 1
    assert q.coefficient(1, 1, 1) == ASYMMETRIC.r
    assert q.coefficient(0, 1, 2) == ASYMMETRIC.p * ASYMMETRIC.r_second
    with pytest.raises(ValueError):
        q_from_table(table, 10)


@pytest.mark.parametrize("params", [ASYMMETRIC, SYMMETRIC])
def test_functional_equation_holds_for_oracle(params):
    report = verify_functional_equation(oracle(params, 10))
    assert report.passed, failed(report)


def test_sd_equations_hold_for_oracle():
    sd = sd_from_oracle(oracle(ASYMMETRIC, 10))
    report = verify_sd_equations(ASYMMETRIC, sd)
    assert report.passed, failed(report)


# ============================================================================
# Closed Forms
# ============================================================================
@pytest.mark.parametrize("params", [ASYMMETRIC, MIRRORED, SYMMETRIC])
def test_p00_closed_matches_oracle(params):
    closed = p00_closed_general(params, ORDER)
    assert first_difference(closed, p00_from_table(oracle(params)), ORDER) is None
    assert closed.coefficient_at(0, 0) == 1


def test_s_x0_closed_matches_oracle():
    sd = sd_from_oracle(oracle(ASYMMETRIC))
    assert first_difference(s_x0_closed(ASYMMETRIC, ORDER), sd.Sx0, ORDER) is None


def test_b_decomposition_shape():
    bc = b_decomposition(ASYMMETRIC, ORDER)
    low, _ = bc.Cplus.x_exponent_range()
    assert low >= 3
    assert first_difference(bc.B.x_coefficient(1), TSeries.monomial(-1, 1, 0, bc.B.precision)) is None
    assert first_difference(bc.B, b_lagrange(ASYMMETRIC, bc.B.precision)) is None


def test_b_from_kernel_roots_matches_radical():
    bc = b_decomposition(SYMMETRIC, 10)
    assert first_difference(bc.B, b_from_roots(SYMMETRIC, 14), bc.B.precision) is None


def test_d_x0_closed_matches_oracle():
    sd = sd_from_oracle(oracle(ASYMMETRIC))
    assert first_difference(d_x0_closed(ASYMMETRIC, ORDER), sd.Dx0, ORDER) is None


def test_d_vanishes_when_p_equals_q():
    assert d_x0_closed(SYMMETRIC, ORDER).is_zero()
    assert sd_from_oracle(oracle(SYMMETRIC, 8)).D.is_zero()


def test_e_coefficients_match_oracle():
    sd = sd_from_oracle(oracle(MIRRORED))
    e2, e4 = e_coefficients_closed(MIRRORED, ORDER)
    assert first_difference(e2, sd.E.x_coefficient(2), ORDER) is None
    assert first_difference(e4, sd.E.x_coefficient(4), ORDER) is None


def test_symmetric_forms():
    p00 = p00_symmetric(SYMMETRIC, ORDER)
    assert first_difference(p00, p00_closed_general(SYMMETRIC, ORDER), ORDER) is None
    q_px0 = q_px0_symmetric(SYMMETRIC, ORDER)
    expected = q_from_table(oracle(SYMMETRIC)).scale_vars(SYMMETRIC.p, SYMMETRIC.q).row(0)
    assert first_difference(q_px0, expected, ORDER) is None
    with pytest.raises(ValueError, match="p = q"):
        p00_symmetric(ASYMMETRIC, ORDER)


# ============================================================================
# Ergodicity
# ============================================================================
def test_ergodic_trend_reaches_three_p00():
    report = ergodicity_observe(SYMMETRIC)
    assert report.data["regime"] == "ergodic"
    assert report.data["final_gap"] < 1e-3
    assert report.checks[0].passed


def test_transient_trend_is_expected_divergent():
    report = ergodicity_observe(TRANSIENT)
    assert report.data["regime"] == "non-ergodic"
    assert report.passed, failed(report)
    assert "expected-divergent" in report.checks[-1].name


@pytest.mark.slow
@pytest.mark.parametrize("params", [ASYMMETRIC, SYMMETRIC, MIRRORED])
def test_verify_law_order_18(params):
    report = verify_law(params, 18)
    assert report.passed, failed(report)
    assert len(report.data["P00"]) == 18
