"""Tests for the kernel roots, the canonical factorization and the orbit."""

import random
from fractions import Fraction

import pytest

from kreweras.kernel import (
    X2_series,
    canonical_factorization,
    compute_Y0,
    delta_minus_w_form,
    discriminant,
    kernel_at,
    kernel_data,
    verify_factorization,
    verify_kernel,
    verify_kernel_roots,
    verify_orbit_invariance,
    w_series,
    z_series,
)
from kreweras.schemas import KernelParams, zero_check
from kreweras.series import first_difference

SEED = 20240607


def random_rhos(count: int):
    rng = random.Random(SEED)
    return [Fraction(rng.randint(1, 9), rng.randint(1, 9)) for _ in range(count)]


def test_z_series_coefficients():
    z = z_series(KernelParams(rho=1, order=10))
    assert [z.coefficient_at(n, 0) for n in range(10)] == [1, 0, 0, 4, 0, 0, 48, 0, 0, 768]


def test_w_is_two_t_z():
    params = KernelParams(rho=Fraction(1, 36), order=9)
    w = w_series(params)
    assert w.coefficient_at(1, 0) == 2
    assert w.coefficient_at(4, 0) == 2 * 4 * Fraction(1, 36)


def test_y0_solves_the_kernel():
    params = KernelParams(rho=1, order=10)
    y0 = compute_Y0(params)
    assert y0.valuation == 1
    assert y0.coefficient_at(1, 0) == 1
    assert zero_check("K(x,Y0) = 0", kernel_at(params, y0), 10).passed


def test_discriminant_has_unit_constant_term():
    delta = discriminant(KernelParams(rho=Fraction(2, 3), order=5))
    assert delta.coefficient_at(0, 0) == 1
    assert delta.coefficient_at(2, 1) == Fraction(-8, 3)


def test_x2_leading_term():
    rho = Fraction(3, 5)
    x2 = X2_series(KernelParams(rho=rho, order=8))
    assert x2.valuation == -2
    assert x2.coefficient_at(-2, 0) == 1 / (4 * rho)


def test_factorization_at_rho_one():
    report = verify_factorization(KernelParams(rho=1, order=24))
    assert report.passed, [c for c in report.checks if not c.passed]


@pytest.mark.parametrize("rho", random_rhos(3))
def test_factorization_for_random_rho(rho):
    params = KernelParams(rho=rho, order=18)
    delta0, delta_plus, delta_minus = canonical_factorization(params)
    assert first_difference(delta0 * delta_plus * delta_minus, discriminant(params), 18) is None
    assert first_difference(delta_minus, delta_minus_w_form(params), 18) is None


@pytest.mark.parametrize("rho", [Fraction(1), Fraction(1, 36), Fraction(5, 2)])
def test_kernel_roots(rho):
    report = verify_kernel_roots(KernelParams(rho=rho, order=12))
    assert report.passed, [c for c in report.checks if not c.passed]


def test_orbit_has_six_pairs():
    report = verify_orbit_invariance(KernelParams(rho=Fraction(1, 36), order=4))
    assert report.passed
    assert len(report.data["orbit"]) == 6


def test_kernel_data_bundle():
    data = kernel_data(KernelParams(rho=1, order=8))
    assert data.Z.coefficient_at(3, 0) == 4
    assert data.W.coefficient_at(1, 0) == 2
    assert data.DeltaPlus.coefficient_at(2, 1) == -4


def test_verify_kernel_merges_groups():
    report = verify_kernel(KernelParams(rho=Fraction(1, 36), order=12))
    assert report.passed
    prefixes = {check.name.split(":")[0] for check in report.checks}
    assert prefixes == {"roots", "factorization", "orbit"}
    assert report.to_document()["schema"] == 1
