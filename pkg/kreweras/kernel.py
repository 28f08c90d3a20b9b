"""
The kernel K(x,y) = xy - t(x + y + rho*x^2*y^2).

rho = 1 is the walk-counting kernel, rho = pqr the kernel of the chain law.
Here live its power-series root Y0, the symmetric functions of both roots,
the discriminant with its canonical factorization, and the orbit of the
kernel-preserving involutions.
"""

import logging
from fractions import Fraction
from typing import Dict, List, Tuple

from kreweras.schemas import (
    KernelData,
    KernelParams,
    Report,
    flag_check,
    series_check,
    zero_check,
)
from kreweras.series import TSeries, invert, solve_valuation_fixed_point

logger = logging.getLogger("Kreweras.kernel")

Monomial = Tuple[Fraction, int, int]  # c * x^a * y^b
Point = Tuple[Monomial, Monomial]


# ============================================================================
# Roots & Symmetric Functions
# ============================================================================
def kernel_at(params: KernelParams, y: TSeries) -> TSeries:
    """K(x, y) for a series y in t with Laurent coefficients in x."""
    tx = TSeries.monomial(1, 1, 1, y.precision + 1)
    return y.shift_x(1) - tx - y.shift_t(1) - (y * y).shift_x(2).shift_t(1).scale(params.rho)


def compute_Y0(params: KernelParams) -> TSeries:
    """Power-series root Y0 = t(1 + Y0/x + rho*x*Y0^2)."""
    order = params.order
    one = TSeries.constant(1, order)

    def update(u: TSeries) -> TSeries:
        return (one + u.shift_x(-1) + (u * u).shift_x(1).scale(params.rho)).shift_t(1)

    y0 = solve_valuation_fixed_point(update, order)
    exp_range = y0.x_exponent_range()
    if exp_range and (exp_range[0] < -order or exp_range[1] > order):
        raise ArithmeticError(f"Y0 x-exponents {exp_range} escape the window [-{order}, {order}]")
    return y0


def symmetric_functions(params: KernelParams, precision: int = None) -> Tuple[TSeries, TSeries]:
    """(Y0 + Y1, Y0 * Y1) = (x̄(1 - t x̄)/(rho t), x̄/rho)."""
    precision = params.order + 2 if precision is None else precision
    inv_rho = 1 / params.rho
    e1 = TSeries.from_terms({(-1, -1): inv_rho, (0, -2): -inv_rho}, precision)
    e2 = TSeries.from_terms({(0, -1): inv_rho}, precision)
    return e1, e2


def discriminant(params: KernelParams) -> TSeries:
    """Δ(x) = (1 - t x̄)^2 - 4 rho t^2 x."""
    return TSeries.from_terms(
        {(0, 0): 1, (1, -1): -2, (2, -2): 1, (2, 1): -4 * params.rho}, params.order
    )


# ============================================================================
# Canonical Factorization
# ============================================================================
def z_series(params: KernelParams) -> TSeries:
    """Z = 1 + 4 rho t^3 Z^3."""
    order = params.order
    one = TSeries.constant(1, order)
    factor = 4 * params.rho

    def update(u: TSeries) -> TSeries:
        return one + (u * u * u).shift_t(3).scale(factor)

    return solve_valuation_fixed_point(update, order)


def w_series(params: KernelParams) -> TSeries:
    """W = 2tZ, the root of W = t(2 + rho W^3)."""
    return z_series(params).shift_t(1).scale(2).truncate(params.order)


def X2_series(params: KernelParams) -> TSeries:
    """The Laurent root X2 = 1/(4 rho t^2 Z^2) of the discriminant."""
    z = z_series(params)
    return invert((z * z).shift_t(2).scale(4 * params.rho))


def canonical_factorization(params: KernelParams) -> Tuple[TSeries, TSeries, TSeries]:
    """Δ0 = 1/Z^2, Δ+(x) = 1 - 4 rho t^2 Z^2 x, Δ-(x̄) = 1 - tZ(1+Z)x̄ + t^2 Z^2 x̄^2."""
    order = params.order
    z = z_series(params)
    z2 = z * z
    delta0 = invert(z2)
    delta_plus = 1 - z2.shift_t(2).shift_x(1).scale(4 * params.rho)
    delta_minus = 1 - (z * (z + 1)).shift_t(1).shift_x(-1) + z2.shift_t(2).shift_x(-2)
    return delta0.truncate(order), delta_plus.truncate(order), delta_minus.truncate(order)


def delta_minus_w_form(params: KernelParams) -> TSeries:
    """Δ-(x̄) = 1 - x̄W(1 + rho W^3/4) + x̄^2 W^2/4."""
    w = w_series(params)
    w3 = w * w * w
    inner = 1 + w3.scale(params.rho / 4)
    return (1 - (w * inner).shift_x(-1) + (w * w).shift_x(-2).scale(Fraction(1, 4))).truncate(
        params.order
    )


def kernel_data(params: KernelParams) -> KernelData:
    e1, e2 = symmetric_functions(params)
    delta0, delta_plus, delta_minus = canonical_factorization(params)
    return KernelData(
        params=params,
        Y0=compute_Y0(params),
        e1=e1,
        e2=e2,
        Delta=discriminant(params),
        Z=z_series(params),
        W=w_series(params),
        X2=X2_series(params),
        Delta0=delta0,
        DeltaPlus=delta_plus,
        DeltaMinus=delta_minus,
    )


# ============================================================================
# Verification
# ============================================================================
def verify_kernel_roots(params: KernelParams) -> Report:
    """K(x,Y0) = 0; Y1 := e1 - Y0 is the second root; (rho t x)^2 (Y0 - Y1)^2 = Δ."""
    order = params.order
    report = Report(command="kernel-roots", params={"rho": str(params.rho), "order": str(order)})
    y0 = compute_Y0(params)
    e1, e2 = symmetric_functions(params)
    y1 = e1 - y0
    report.add(zero_check("K(x,Y0) = 0", kernel_at(params, y0), order))
    report.add(series_check("Y0*Y1 = e2", y0 * y1, e2, order - 1))
    report.add(zero_check("K(x,Y1) = 0", kernel_at(params, y1), order))
    gap = y0 - y1
    scaled = (gap * gap).shift_t(2).shift_x(2).scale(params.rho**2)
    report.add(series_check("(rho t x)^2 (Y0 - Y1)^2 = Delta", scaled, discriminant(params), order))
    return report


def verify_factorization(params: KernelParams) -> Report:
    order = params.order
    report = Report(command="factorization", params={"rho": str(params.rho), "order": str(order)})
    delta0, delta_plus, delta_minus = canonical_factorization(params)
    report.add(
        series_check(
            "Delta0*Delta+*Delta- = Delta",
            delta0 * delta_plus * delta_minus,
            discriminant(params),
            order,
        )
    )
    report.add(series_check("Delta- Z-form = W-form", delta_minus, delta_minus_w_form(params), order))

    z = z_series(params)
    x2 = X2_series(params)
    report.add(
        series_check(
            "4 rho t^2 X2 Z^2 = 1",
            (x2 * z * z).shift_t(2).scale(4 * params.rho),
            TSeries.constant(1, order),
            order,
        )
    )

    rho = params.rho
    w_direct = solve_valuation_fixed_point(
        lambda u: (TSeries.constant(2, order) + (u * u * u).scale(rho)).shift_t(1), order
    )
    report.add(series_check("W = 2tZ solves W = t(2 + rho W^3)", w_series(params), w_direct, order))

    if rho == 1:
        w = w_series(params)
        report.add(series_check("Delta+ = 1 - x W^2", delta_plus, 1 - (w * w).shift_x(1), order))
    return report


def _evaluate(poly: Dict[Tuple[int, int, int], Fraction], point: Point) -> Dict[Tuple[int, int, int], Fraction]:
    """Substitute the monomial pair (X, Y) into a Laurent polynomial in x, y, t."""
    (cx, ax, bx), (cy, ay, by) = point
    out: Dict[Tuple[int, int, int], Fraction] = {}
    for (a, b, n), c in poly.items():
        key = (a * ax + b * ay, a * bx + b * by, n)
        out[key] = out.get(key, 0) + c * cx**a * cy**b
    return {key: value for key, value in out.items() if value}


def _rational_kernel(rho: Fraction) -> Dict[Tuple[int, int, int], Fraction]:
    """1 - t(x̄ + ȳ + rho x y) as {(x-exp, y-exp, t-exp): coefficient}."""
    return {
        (0, 0, 0): Fraction(1),
        (-1, 0, 1): Fraction(-1),
        (0, -1, 1): Fraction(-1),
        (1, 1, 1): -rho,
    }


def _partner(point: Point, rho: Fraction) -> Monomial:
    """x̄ȳ/rho evaluated at the pair."""
    (cx, ax, bx), (cy, ay, by) = point
    return (1 / (rho * cx * cy), -ax - ay, -bx - by)


def _phi(point: Point, rho: Fraction) -> Point:
    return (_partner(point, rho), point[1])


def _psi(point: Point, rho: Fraction) -> Point:
    return (point[0], _partner(point, rho))


def _describe(point: Point) -> str:
    def mono(m: Monomial) -> str:
        c, a, b = m
        return f"{c}*x^{a}*y^{b}"

    return f"({mono(point[0])}, {mono(point[1])})"


def verify_orbit_invariance(params: KernelParams) -> Report:
    """
    The rational kernel is invariant under (x,y) -> (x̄ȳ/rho, y) and
    (x,y) -> (x, x̄ȳ/rho); their alternating orbit has six pairs and closes.

    Raises:
        ArithmeticError: if any identity fails
    """
    rho = params.rho
    kernel = _rational_kernel(rho)
    start: Point = ((Fraction(1), 1, 0), (Fraction(1), 0, 1))
    orbit: List[Point] = [start]
    moves = (_phi, _psi)
    current = start
    for step in range(12):
        current = moves[step % 2](current, rho)
        if current == start:
            break
        orbit.append(current)
    else:
        raise ArithmeticError("orbit of the kernel involutions did not close")

    report = Report(command="orbit", params={"rho": str(rho)})
    invariant = all(_evaluate(kernel, point) == kernel for point in orbit)
    images_ok = all(
        _evaluate(kernel, move(point, rho)) == kernel for point in orbit for move in moves
    )
    involutive = all(move(move(point, rho), rho) == point for point in orbit for move in moves)
    report.add(flag_check("K_r invariant on the orbit", invariant and images_ok, f"{len(orbit)} pairs"))
    report.add(flag_check("Phi∘Phi = Psi∘Psi = identity", involutive))
    report.add(flag_check("orbit has six pairs", len(orbit) == 6, f"{len(orbit)} pairs"))
    report.data["orbit"] = [_describe(point) for point in orbit]
    if not report.passed:
        raise ArithmeticError(f"kernel orbit identities failed for rho = {rho}")
    logger.info(f"✅ orbit of size {len(orbit)} verified for rho = {rho}")
    return report


def verify_kernel(params: KernelParams) -> Report:
    """Roots, factorization and orbit checks in one report."""
    report = Report(command="verify-kernel", params={"rho": str(params.rho), "order": str(params.order)})
    report.merge(verify_kernel_roots(params), "roots: ")
    report.merge(verify_factorization(params), "factorization: ")
    report.merge(verify_orbit_invariance(params), "orbit: ")
    report.data["X2"] = X2_series(params).to_json()
    return report
