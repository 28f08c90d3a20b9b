"""
Law of the reflected Kreweras chain started at the origin.

An exact rational oracle for p_{i,j}(n), the symmetric and antisymmetric
series S and D assembled from it, and the closed forms for P00, S(x,0) and
D(x,0) together with the splitting of B(x) into C- and C+ they rest on.
"""

import csv
import logging
from fractions import Fraction
from math import factorial
from typing import Dict, List, Optional, TextIO, Tuple

import numpy as np

from kreweras.config import get_default_law_order
from kreweras.kernel import (
    canonical_factorization,
    compute_Y0,
    discriminant,
    symmetric_functions,
    w_series,
    z_series,
)
from kreweras.schemas import (
    BCDecomposition,
    ChainParams,
    KernelParams,
    Report,
    SDPair,
    bseries_check,
    flag_check,
    series_check,
    zero_check,
)
from kreweras.series import (
    BSeries,
    DivisionRemainderError,
    LPoly,
    TSeries,
    compose,
    divide_exact,
    first_difference,
    format_rat,
    invert,
    sqrt,
    substitute_monomial,
    x_part,
)
from kreweras.stationary import p00_closed, transition_step, transition_weights

logger = logging.getLogger("Kreweras.law")

# Covers the t^-3 lost when 1 - 2pZ vanishes at t = 0 (p = 1/2) and the t^-1 of B.
LAW_PADDING = 4
ERGODICITY_HORIZON = 180
ERGODICITY_TOL = 1e-3

X = LPoly.monomial(1, 1)


# ============================================================================
# Exact Oracle
# ============================================================================
class LawTable:
    """p_{i,j}(n) for n <= n_max, exact."""

    def __init__(self, params: ChainParams, n_max: int, probs: List[Dict[Tuple[int, int], Fraction]]):
        self.params = params
        self.n_max = n_max
        self._probs = probs

    def probability(self, i: int, j: int, n: int) -> Fraction:
        if n < 0 or n > self.n_max:
            return Fraction(0)
        return self._probs[n].get((i, j), Fraction(0))

    def slice(self, n: int) -> Dict[Tuple[int, int], Fraction]:
        return dict(self._probs[n])

    def row_total(self, n: int) -> Fraction:
        return sum(self._probs[n].values(), Fraction(0))

    def to_csv(self, stream: TextIO, n_min: int = 0, n_max: Optional[int] = None) -> int:
        last = self.n_max if n_max is None else min(n_max, self.n_max)
        writer = csv.writer(stream)
        writer.writerow(["n", "i", "j", "probability"])
        rows = 0
        for n in range(n_min, last + 1):
            for (i, j), value in sorted(self._probs[n].items()):
                writer.writerow([n, i, j, format_rat(value)])
                rows += 1
        return rows


def _moves(params: ChainParams, i: int, j: int) -> List[Tuple[Tuple[int, int], Fraction]]:
    if i == 0 and j == 0:
        return [((1, 1), Fraction(1))]
    if j == 0:
        return [((-1, 0), params.p_prime), ((1, 1), params.r_prime)]
    if i == 0:
        return [((0, -1), params.q_second), ((1, 1), params.r_second)]
    return [((-1, 0), params.p), ((0, -1), params.q), ((1, 1), params.r)]


def law_dp(params: ChainParams, n_max: int, grid: Optional[int] = None) -> LawTable:
    """
    Forward dynamic programming over the exact transition probabilities.

    Args:
        params: step probabilities
        n_max: last time computed
        grid: optional side of the state window; must hold every point
              reachable in n_max steps

    Returns:
        LawTable with one map (i, j) -> p_{i,j}(n) per time
    """
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    if grid is not None and grid < n_max + 2:
        raise ValueError(f"grid {grid} cannot hold walks of length {n_max}; use at least {n_max + 2}")
    current: Dict[Tuple[int, int], Fraction] = {(0, 0): Fraction(1)}
    probs = [current]
    for _ in range(n_max):
        following: Dict[Tuple[int, int], Fraction] = {}
        for (i, j), mass in current.items():
            for (di, dj), weight in _moves(params, i, j):
                key = (i + di, j + dj)
                following[key] = following.get(key, Fraction(0)) + mass * weight
        probs.append(following)
        current = following
    logger.debug(f"law table built up to n = {n_max} for {params.as_strings()}")
    return LawTable(params, n_max, probs)


def origin_trace(params: ChainParams, n_max: int = ERGODICITY_HORIZON) -> np.ndarray:
    """p_{0,0}(n) for n <= n_max in floating point, for horizons the exact table cannot reach."""
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    # A walk that reaches x or y beyond n_max/2 cannot be back at the origin by n_max.
    size = n_max // 2 + 2
    wp, wq, wr = transition_weights(params, size, dtype=np.float64)
    grid = np.zeros((size, size))
    grid[0, 0] = 1.0
    trace = np.zeros(n_max + 1)
    trace[0] = 1.0
    for n in range(1, n_max + 1):
        grid = transition_step(grid, wp, wq, wr)
        trace[n] = grid[0, 0]
    return trace


def _law_weight(params: ChainParams, i: int, j: int) -> Fraction:
    if i == 0 and j == 0:
        return Fraction(1)
    if j == 0:
        return params.r_prime
    if i == 0:
        return params.r_second
    return params.r


def q_from_table(table: LawTable, order: Optional[int] = None) -> BSeries:
    """Q(x,y) = P00 + r'P1(x) + r''P2(y) + rP(x,y) truncated at t^order."""
    order = table.n_max + 1 if order is None else order
    if order > table.n_max + 1:
        raise ValueError(f"order {order} needs the table up to n = {order - 1}, have {table.n_max}")
    params = table.params
    layers = [
        {(i, j): prob * _law_weight(params, i, j) for (i, j), prob in table.slice(n).items()}
        for n in range(order)
    ]
    return BSeries(layers)


def _bpoly(terms: Dict[Tuple[int, int, int], Fraction], order: int) -> BSeries:
    return BSeries.from_terms(terms, order)


def verify_functional_equation(table: LawTable, order: Optional[int] = None) -> Report:
    """K(x,y)Q(px,qy) + (t - qy)xQ(px,0) + (t - px)yQ(0,qy) = rxy."""
    params = table.params
    p, q, r = params.p, params.q, params.r
    q_series = q_from_table(table, order)
    order = q_series.order
    big = order + 4
    scaled = q_series.scale_vars(p, q)
    kernel = _bpoly({(1, 1, 0): 1, (1, 0, 1): -1, (0, 1, 1): -1, (2, 2, 1): -params.rho}, big)
    left = _bpoly({(1, 0, 1): 1, (1, 1, 0): -q}, big)
    right = _bpoly({(0, 1, 1): 1, (1, 1, 0): -p}, big)
    lhs = kernel * scaled + left * scaled.restrict_y0() + right * scaled.restrict_x0()
    report = Report(command="law-functional-equation", params=params.as_strings())
    report.add(bseries_check("K Q(px,qy) + boundary terms = rxy", lhs, _bpoly({(1, 1, 0): r}, big), order))
    return report


def sd_from_oracle(table: LawTable, order: Optional[int] = None) -> SDPair:
    """S = (t-qx)(t-py)Q(px,qy) + (t-px)(t-qy)Q(py,qx), D the same with a minus sign."""
    params = table.params
    p, q = params.p, params.q
    q_series = q_from_table(table, order)
    big = q_series.order + 4
    direct = q_series.scale_vars(p, q)
    mirrored = direct.swap()
    first = _bpoly({(0, 0, 2): 1, (0, 1, 1): -p, (1, 0, 1): -q, (1, 1, 0): p * q}, big)
    second = _bpoly({(0, 0, 2): 1, (0, 1, 1): -q, (1, 0, 1): -p, (1, 1, 0): p * q}, big)
    s = first * direct + second * mirrored
    d = first * direct - second * mirrored
    s_x0 = s.row(0)
    d_x0 = d.row(0)
    return SDPair(S=s, D=d, Sx0=s_x0, Dx0=d_x0, T=s_x0.shift_x(1), E=d_x0.shift_x(1))


def p00_from_table(table: LawTable, order: Optional[int] = None) -> TSeries:
    order = table.n_max + 1 if order is None else order
    return TSeries.from_terms({(n, 0): table.probability(0, 0, n) for n in range(order)}, order)


# ============================================================================
# Closed-form Building Blocks
# ============================================================================
def _poly(terms: Dict[Tuple[int, int], Fraction], precision: int) -> TSeries:
    """Polynomial in t and x from {(t-exponent, x-exponent): coefficient}."""
    return TSeries.from_terms(terms, precision)


def _one_minus_t3(precision: int) -> TSeries:
    return _poly({(0, 0): 1, (3, 0): -1}, precision)


def _assert_polynomial_in_x(series: TSeries, what: str) -> None:
    negative = x_part(series, "negative")
    if not negative.is_zero():
        n, e, _ = next(negative.terms())
        raise DivisionRemainderError(
            f"{what}: the division by the quartic prefactor leaves x^{e} t^{n}"
        )


def delta_minus_at(c: Fraction, z: TSeries) -> TSeries:
    """Δ-(x̄) at x̄ = c/t: 1 - cZ(1 + Z) + c^2 Z^2."""
    return 1 - (z * (z + 1)).scale(c) + (z * z).scale(c * c)


def a_series(first: Fraction, second: Fraction, r: Fraction, z: TSeries) -> TSeries:
    """A_{first,second} = (first(1 - 2 first) - second r t^3) sqrt(Δ-(first/t)) / ((1 - t^3)(1 - 2 first Z))."""
    precision = z.precision
    numerator = _poly({(0, 0): first * (1 - 2 * first), (3, 0): -second * r}, precision + 8)
    denominator = _one_minus_t3(precision + 8) * (1 - z.scale(2 * first))
    return numerator * sqrt(delta_minus_at(first, z)) * invert(denominator)


def law_polynomials(params: ChainParams, precision: int) -> Dict[str, TSeries]:
    """The quadratic factors of the prefactor, F_{p,q}, F_{q,p} and H."""
    p, q, r = params.p, params.q, params.r
    p_side = _poly({(1, 0): 1, (0, 1): -(1 - p), (2, 2): q * r}, precision)
    q_side = _poly({(1, 0): 1, (0, 1): -(1 - q), (2, 2): p * r}, precision)
    f_pq = _poly({(1, 0): 1, (0, 1): -q}, precision) * q_side
    f_qp = _poly({(1, 0): 1, (0, 1): -p}, precision) * p_side
    h = (
        _poly({(1, 0): 2 * q, (0, 1): q * (p - 1)}, precision) * f_pq
        + _poly({(1, 0): 2 * p, (0, 1): p * (q - 1)}, precision) * f_qp
        - _poly(
            {(1, 2): 2 * r, (0, 3): -(1 - p) * (1 - q), (2, 4): 2 * p * q * r},
            precision,
        ).scale((p - q) ** 2)
    )
    return {"p_side": p_side, "q_side": q_side, "F_pq": f_pq, "F_qp": f_qp, "H": h}


def _z(params: ChainParams, precision: int) -> TSeries:
    return z_series(KernelParams(rho=params.rho, order=precision))


# ============================================================================
# Origin and S(x,0)
# ============================================================================
def p00_closed_general(params: ChainParams, order: int = None) -> TSeries:
    """P00 from 2pq P00 + r(1 - r) = A_{p,q} + A_{q,p}."""
    order = order or get_default_law_order()
    p, q, r = params.p, params.q, params.r
    z = _z(params, order + LAW_PADDING)
    total = a_series(p, q, r, z) + a_series(q, p, r, z)
    return (total - r * (1 - r)).scale(1 / (2 * p * q)).truncate(order)


def a_numerator_identity(c: Fraction, other: Fraction, r: Fraction, z: TSeries) -> Tuple[TSeries, TSeries]:
    """(c(1 - 2c) - other r t^3, (1 - 2cZ)(1 + (2c - 1)Z(1 + 2cZ)) / (4cZ^3))."""
    lhs = _poly({(0, 0): c * (1 - 2 * c), (3, 0): -other * r}, z.precision)
    inner = 1 + (z * (1 + z.scale(2 * c))).scale(2 * c - 1)
    rhs = ((1 - z.scale(2 * c)) * inner * invert(z * z * z)).scale(1 / (4 * c))
    return lhs, rhs


def p00_symmetric(params: ChainParams, order: int = None) -> TSeries:
    """P00 = (r/p)(sqrt(Δ-(p/t)) / (1 - 2pZ) - 1) when p = q."""
    if params.p != params.q:
        raise ValueError("the symmetric closed form needs p = q")
    order = order or get_default_law_order()
    p, r = params.p, params.r
    z = _z(params, order + LAW_PADDING)
    value = sqrt(delta_minus_at(p, z)) * invert(1 - z.scale(2 * p)) - 1
    return value.scale(r / p).truncate(order)


def q_px0_symmetric(params: ChainParams, order: int = None) -> TSeries:
    """
    Q(px,0) for p = q from
    (t - x(1-p) + pr x^2 t^2) Q(px,0) = (r/2p)((2tZ - x) sqrt(Δ-(p/t)) sqrt(Δ+(x)) / (Z(1-2pZ)) - 2t + x(1-p)).
    """
    if params.p != params.q:
        raise ValueError("the symmetric closed form needs p = q")
    order = order or get_default_law_order()
    p, r = params.p, params.r
    work = order + LAW_PADDING
    z = _z(params, work)
    _, delta_plus, _ = canonical_factorization(KernelParams(rho=params.rho, order=work))
    radical = (z.shift_t(1).scale(2) - X) * sqrt(delta_minus_at(p, z)) * sqrt(delta_plus)
    rhs = radical * invert(z * (1 - z.scale(2 * p))) - _poly({(1, 0): 2, (0, 1): -(1 - p)}, work + 8)
    prefactor = _poly({(1, 0): 1, (0, 1): -(1 - p), (2, 2): p * r}, work + 8)
    result = divide_exact(rhs.scale(r / (2 * p)), prefactor)
    _assert_polynomial_in_x(result, "Q(px,0)")
    return result.truncate(order)


def s_x0_closed(params: ChainParams, order: int = None) -> TSeries:
    """
    S(x,0) from
    (t-(1-p)x+t^2 qr x^2)(t-(1-q)x+t^2 pr x^2) S(x,0)/t + rH/(2pq)
        = (2tZ - x) sqrt(Δ+(x)) (A_{p,q}F_{p,q} + A_{q,p}F_{q,p}) / (2pqZ).
    """
    order = order or get_default_law_order()
    p, q, r = params.p, params.q, params.r
    work = order + LAW_PADDING
    z = _z(params, work)
    _, delta_plus, _ = canonical_factorization(KernelParams(rho=params.rho, order=work))
    polys = law_polynomials(params, work + 8)
    combo = a_series(p, q, r, z) * polys["F_pq"] + a_series(q, p, r, z) * polys["F_qp"]
    rhs = (z.shift_t(1).scale(2) - X) * sqrt(delta_plus) * invert(z) * combo
    numerator = (rhs.scale(1 / (2 * p * q)) - polys["H"].scale(r / (2 * p * q))).shift_t(1)
    result = divide_exact(numerator, polys["p_side"] * polys["q_side"])
    _assert_polynomial_in_x(result, "S(x,0)")
    return result.truncate(order)


def boundary_values_T(params: ChainParams, order: int = None) -> Tuple[TSeries, TSeries, TSeries]:
    """T(t/p), T(t/q) and T(W) = rtW^2 for T(x) = xS(x,0)."""
    order = order or get_default_law_order()
    p, q, r = params.p, params.q, params.r
    work = order + LAW_PADDING
    inverse = invert(_one_minus_t3(work))

    def at(first: Fraction, second: Fraction) -> TSeries:
        radicand = _poly({(0, 0): (1 - first) ** 2, (3, 0): -4 * second * r}, work)
        value = (sqrt(radicand) + (second - r)) * inverse
        return value.shift_t(3).scale((first - second) / (2 * first**2 * second))

    w = w_series(KernelParams(rho=params.rho, order=work))
    t_w = (w * w).shift_t(1).scale(r)
    return at(p, q).truncate(order), at(q, p).truncate(order), t_w.truncate(order)


# ============================================================================
# B, C+ and C-
# ============================================================================
def b_series(params: ChainParams, precision: int) -> TSeries:
    """B(x) = sqrt(Δ(x)) (1 - 2t x̄ - pqr t x^2) / (pqr t), known below t^(precision-1)."""
    rho = params.rho
    root = sqrt(discriminant(KernelParams(rho=rho, order=precision)))
    factor = _poly({(0, 0): 1, (1, -1): -2, (1, 2): -rho}, precision + 8)
    return (root * factor).shift_t(-1).scale(1 / rho)


def b_from_roots(params: ChainParams, precision: int) -> TSeries:
    """B(x) = (Y0 - Y1)(2t - x + pqr t x^3) with Y1 = (Y0 + Y1) - Y0."""
    kernel = KernelParams(rho=params.rho, order=precision)
    y0 = compute_Y0(kernel)
    e1, _ = symmetric_functions(kernel, precision)
    factor = _poly({(1, 0): 2, (0, 1): -1, (1, 3): params.rho}, precision + 8)
    return (y0.scale(2) - e1) * factor


def b_lagrange(params: ChainParams, precision: int) -> TSeries:
    """
    B(x) = (1 - x̄t)(1 - 2x̄t)/(pqr t) - xt - x^2
           + 2 sum_{n>=2} t^n sum_{k<=n/2} x^(3k-n+2) (pqr)^k (3k-n+1)(3k-n)(n-2)! / (k!(k+1)!(n-2k)!).
    """
    rho = params.rho
    terms: Dict[Tuple[int, int], Fraction] = {
        (-1, 0): 1 / rho,
        (0, -1): -3 / rho,
        (1, -2): 2 / rho,
        (1, 1): Fraction(-1),
        (0, 2): Fraction(-1),
    }
    for n in range(2, precision):
        for k in range(n // 2 + 1):
            e = 3 * k - n + 2
            weight = (e - 1) * (e - 2) * factorial(n - 2)
            if weight:
                value = 2 * rho**k * Fraction(weight, factorial(k) * factorial(k + 1) * factorial(n - 2 * k))
                terms[(n, e)] = terms.get((n, e), Fraction(0)) + value
    return TSeries.from_terms(terms, precision)


def c_plus_lagrange(params: ChainParams, precision: int) -> TSeries:
    """C+(x): the terms of the Lagrange expansion with x-exponent at least 3."""
    rho = params.rho
    terms: Dict[Tuple[int, int], Fraction] = {}
    for n in range(2, precision):
        for k in range((n + 1) // 3, n // 2 + 1):
            e = 3 * k - n + 2
            weight = (e - 1) * (e - 2) * factorial(n - 2)
            if weight:
                terms[(n, e)] = rho**k * Fraction(weight, factorial(k) * factorial(k + 1) * factorial(n - 2 * k))
    return TSeries.from_terms(terms, precision)


def x3_coefficient_closed(params: ChainParams, precision: int) -> TSeries:
    """[x^3]B = 4 sum_k t^(3k+2) (pqr)^(k+1) (3k)! / (k!(k+1)!(k+2)!)."""
    rho = params.rho
    terms = {}
    k = 0
    while 3 * k + 2 < precision:
        terms[(3 * k + 2, 0)] = 4 * rho ** (k + 1) * Fraction(
            factorial(3 * k), factorial(k) * factorial(k + 1) * factorial(k + 2)
        )
        k += 1
    return TSeries.from_terms(terms, precision)


def c_minus_at(params: ChainParams, c: Fraction, c_plus: TSeries) -> TSeries:
    """
    C-(c/t) as a Laurent series in t, through B(t/c): the expansion of C- in x̄
    cannot take x̄ = c/t, but Δ(t/c) = (1-c)^2 - 4pqr t^3/c can.
    """
    rho = params.rho
    pq = params.p * params.q
    precision = c_plus.precision
    radicand = _poly({(0, 0): (1 - c) ** 2, (3, 0): -4 * rho / c}, precision + 1)
    b_at = (sqrt(radicand) * _poly({(0, 0): 1 - 2 * c, (3, 0): -rho / c**2}, precision + 8)).shift_t(-1).scale(1 / rho)
    c_plus_at = substitute_monomial(c_plus, 1 / Fraction(c), 1, x_floor=3)
    value = (
        b_at
        - _poly({(-1, 0): (1 - 2 * c) / pq}, precision + 8)
        + _poly({(2, 0): 1 / Fraction(c) + 1 / Fraction(c) ** 2}, precision + 8)
        - c_plus_at.scale(2)
    )
    return value.scale(Fraction(1, 2))


def b_decomposition(params: ChainParams, order: int = None) -> BCDecomposition:
    """
    B(x) = (1 - 2x̄t)/(pqt) + 2C-(x̄) - xt - x^2 + 2C+(x).

    Raises:
        ArithmeticError: if C+ has a term below x^3 or disagrees with its Lagrange expansion
    """
    order = order or get_default_law_order()
    pq = params.p * params.q
    work = order + LAW_PADDING
    big = work + 8
    b = b_series(params, work)
    c_plus = (x_part(b, "positive") + _poly({(1, 1): 1, (0, 2): 1}, big)).scale(Fraction(1, 2))
    exp_range = c_plus.x_exponent_range()
    if exp_range and exp_range[0] < 3:
        raise ArithmeticError(f"C+ carries x^{exp_range[0]}; every term must be a multiple of x^3")
    mismatch = first_difference(c_plus, c_plus_lagrange(params, c_plus.precision))
    if mismatch is not None:
        n, e = mismatch
        raise ArithmeticError(f"C+ from B and from the Lagrange expansion differ at x^{e} t^{n}")
    c_minus = (x_part(b, "nonpositive") - _poly({(-1, 0): 1 / pq, (0, -1): -2 / pq}, big)).scale(
        Fraction(1, 2)
    )
    return BCDecomposition(
        B=b,
        Cplus=c_plus,
        Cminus=c_minus,
        Cminus_at_p_over_t=c_minus_at(params, params.p, c_plus),
        Cminus_at_q_over_t=c_minus_at(params, params.q, c_plus),
    )


# ============================================================================
# D(x,0)
# ============================================================================
def d_x0_closed(params: ChainParams, order: int = None, bc: Optional[BCDecomposition] = None) -> TSeries:
    """
    D(x,0) from
    (t-(1-p)x+t^2 qr x^2)(t-(1-q)x+t^2 pr x^2) D(x,0)/(rxt) + x(p-q)(t^2(1-r)r x^2 - x/2 + t)
        = rx(p-q)t^2 C+(x) - t/(1-t^3) (p C-(p/t) F_{p,q}(x) - q C-(q/t) F_{q,p}(x)).
    Zero when p = q.
    """
    order = order or get_default_law_order()
    p, q, r = params.p, params.q, params.r
    if p == q:
        return TSeries.zero(order)
    work = order + LAW_PADDING
    big = work + 8
    bc = bc or b_decomposition(params, order)
    polys = law_polynomials(params, big)
    t_factor = invert(_one_minus_t3(big)).shift_t(1)
    mixed = bc.Cminus_at_p_over_t.scale(p) * polys["F_pq"] - bc.Cminus_at_q_over_t.scale(q) * polys["F_qp"]
    rhs = bc.Cplus.shift_x(1).shift_t(2).scale(r * (p - q)) - t_factor * mixed
    extra = _poly({(2, 3): (p - q) * (1 - r) * r, (0, 2): -(p - q) / 2, (1, 1): p - q}, big)
    numerator = (rhs - extra).shift_x(1).shift_t(1).scale(r)
    result = divide_exact(numerator, polys["p_side"] * polys["q_side"])
    _assert_polynomial_in_x(result, "D(x,0)")
    return result.truncate(order)


def e_coefficients_closed(
    params: ChainParams, order: int = None, bc: Optional[BCDecomposition] = None
) -> Tuple[TSeries, TSeries]:
    """
    E2 = t^2 r (qC-(q/t) - pC-(p/t)) / (1-t^3) and
    E4 = r^2 (q(1-q-pt^3)C-(q/t) - p(1-p-qt^3)C-(p/t)) / (1-t^3) - r(p-q)(2r+1)/(2t).
    """
    order = order or get_default_law_order()
    p, q, r = params.p, params.q, params.r
    big = order + LAW_PADDING + 8
    bc = bc or b_decomposition(params, order)
    at_p, at_q = bc.Cminus_at_p_over_t, bc.Cminus_at_q_over_t
    inverse = invert(_one_minus_t3(big))
    e2 = ((at_q.scale(q) - at_p.scale(p)) * inverse).shift_t(2).scale(r)
    weighted_q = at_q * _poly({(0, 0): q * (1 - q), (3, 0): -p * q}, big)
    weighted_p = at_p * _poly({(0, 0): p * (1 - p), (3, 0): -p * q}, big)
    e4 = ((weighted_q - weighted_p) * inverse).scale(r * r) - TSeries.monomial(
        r * (p - q) * (2 * r + 1) / 2, -1, 0, big
    )
    return e2.truncate(order), e4.truncate(order)


# ============================================================================
# Ergodicity
# ============================================================================
def ergodicity_observe(params: ChainParams, horizon: int = ERGODICITY_HORIZON) -> Report:
    """
    Trend of p_{0,0}(3n) for 3n <= horizon: towards 3 p00 when r < min(p, q),
    towards 0 otherwise. Observation only; a divergent trend is expected there.
    """
    report = Report(command="ergodicity", params=params.as_strings())
    trace = origin_trace(params, horizon)
    off_phase = float(max(np.abs(trace[1::3]).max(initial=0.0), np.abs(trace[2::3]).max(initial=0.0)))
    report.add(flag_check("p00(3n+1) = p00(3n+2) = 0", off_phase == 0.0, f"max {off_phase:.1e}"))
    samples = trace[0::3]
    last = len(samples) - 1
    if params.ergodic:
        target = 3 * float(p00_closed(params))
        gaps = np.abs(samples - target)
        tail = gaps[-5:]
        report.add(
            flag_check(
                "|p00(3n) - 3 p00| decreasing over the last 5 samples",
                bool(np.all(np.diff(tail) <= 1e-15)),
                ", ".join(f"{g:.2e}" for g in tail),
            )
        )
        report.add(
            flag_check(
                f"|p00({3 * last}) - 3 p00| < {ERGODICITY_TOL:.0e}",
                gaps[-1] < ERGODICITY_TOL,
                f"gap {gaps[-1]:.3e}",
                float(gaps[-1]),
            )
        )
        report.data.update({"regime": "ergodic", "target": target, "final_gap": float(gaps[-1])})
    else:
        report.add(
            flag_check(
                f"p00({3 * last}) < {ERGODICITY_TOL:.0e} (expected-divergent: r >= min(p, q))",
                samples[-1] < ERGODICITY_TOL,
                f"p00 = {samples[-1]:.3e}",
                float(samples[-1]),
            )
        )
        report.data.update({"regime": "non-ergodic", "target": 0.0, "final_gap": float(samples[-1])})
    report.data["p00_3n_tail"] = [float(v) for v in samples[-10:]]
    logger.info(f"{'✅' if report.passed else '⚠️'} ergodicity trend ({report.data['regime']}) for {params.as_strings()}")
    return report


# ============================================================================
# Full Verification
# ============================================================================
def verify_sd_equations(params: ChainParams, sd: SDPair) -> Report:
    """The S and D equations with G(x,y) = rxyt(t - qx)(t - py), and the symmetry of S and D."""
    p, q, r = params.p, params.q, params.r
    order = sd.S.order
    big = order + 4
    report = Report(command="sd-equations", params=params.as_strings())
    kernel_t = _bpoly({(1, 1, 1): 1, (1, 0, 2): -1, (0, 1, 2): -1, (2, 2, 2): -params.rho}, big)
    x_side = _bpoly({(1, 0, 2): 1, (1, 1, 1): -(p + q), (1, 2, 0): p * q}, big)
    y_side = _bpoly({(0, 1, 2): 1, (1, 1, 1): -(p + q), (2, 1, 0): p * q}, big)
    g = _bpoly({(1, 1, 3): r, (1, 2, 2): -r * p, (2, 1, 2): -r * q, (2, 2, 1): r * p * q}, big)

    def lhs(f: BSeries) -> BSeries:
        return kernel_t * f + x_side * f.restrict_y0() + y_side * f.restrict_x0()

    report.add(bseries_check("tK S + boundary terms = G(x,y) + G(y,x)", lhs(sd.S), g + g.swap(), order))
    report.add(bseries_check("tK D + boundary terms = G(x,y) - G(y,x)", lhs(sd.D), g - g.swap(), order))
    report.add(bseries_check("S(x,y) = S(y,x)", sd.S, sd.S.swap(), order))
    report.add(bseries_check("D(x,y) = -D(y,x)", sd.D, -sd.D.swap(), order))
    return report


def verify_law(params: ChainParams, order: int = None, horizon: int = ERGODICITY_HORIZON) -> Report:
    """Oracle against every closed form for one parameter triple."""
    order = order or get_default_law_order()
    p, q, r = params.p, params.q, params.r
    report = Report(command="verify-law", params={**params.as_strings(), "order": str(order)})
    logger.info(f"🔧 law checks for {params.as_strings()} to t^{order}")

    table = law_dp(params, order - 1)
    report.add(
        flag_check(
            "every row sums to 1",
            all(table.row_total(n) == 1 for n in range(table.n_max + 1)),
        )
    )
    report.add(
        flag_check(
            "p_(i,j)(n) = 0 unless n + i + j = 0 mod 3",
            all((n + i + j) % 3 == 0 for n in range(table.n_max + 1) for (i, j) in table.slice(n)),
        )
    )
    if order > 3:
        report.add(flag_check("p_(1,1)(1) = 1", table.probability(1, 1, 1) == 1))
        expected = p * params.q_second + q * params.p_prime
        report.add(
            flag_check(
                "p_(0,0)(3) = p q'' + q p'",
                table.probability(0, 0, 3) == expected,
                f"{format_rat(table.probability(0, 0, 3))} vs {format_rat(expected)}",
            )
        )
    report.merge(verify_functional_equation(table), "oracle: ")

    sd = sd_from_oracle(table)
    report.merge(verify_sd_equations(params, sd), "oracle: ")
    p00_oracle = p00_from_table(table)
    report.add(series_check("[x^0 y^0] S = 2t^2 P00", sd.Sx0.x_coefficient(0), p00_oracle.shift_t(2).scale(2), order))
    report.add(zero_check("E0 = 0", sd.E.x_coefficient(0), order))
    report.add(zero_check("E1 = 0", sd.E.x_coefficient(1), order))
    e2_oracle, e3_oracle, e4_oracle = (sd.E.x_coefficient(k) for k in (2, 3, 4))
    report.add(
        series_check(
            "t E3 = r E2 + r(q - p)t",
            e3_oracle.shift_t(1),
            e2_oracle.scale(r) + TSeries.monomial(r * (q - p), 1, 0, order + 1),
            order,
        )
    )
    t1_oracle, t2_oracle = sd.T.x_coefficient(1), sd.T.x_coefficient(2)
    report.add(
        series_check(
            "t T2 = -r t^2 + (2r - 1) T1 / 2",
            t2_oracle.shift_t(1),
            t1_oracle.scale((2 * r - 1) / 2) - TSeries.monomial(r, 2, 0, order + 1),
            order,
        )
    )

    # Origin
    p00_general = p00_closed_general(params, order)
    report.add(series_check("P00 closed = oracle", p00_general, p00_oracle, order))
    z = _z(params, order + LAW_PADDING)
    for first, second, label in ((p, q, "p"), (q, p, "q")):
        lhs, rhs = a_numerator_identity(first, second, r, z)
        report.add(series_check(f"A numerator factorization in {label}", lhs, rhs, order))

    # S(x,0)
    s_closed = s_x0_closed(params, order)
    report.add(series_check("S(x,0) closed = oracle", s_closed, sd.Sx0, order))
    w = w_series(KernelParams(rho=params.rho, order=order + LAW_PADDING))
    t_tp, t_tq, t_w = boundary_values_T(params, order)
    report.add(series_check("T(W) = r t W^2 (closed S)", compose(s_closed.shift_x(1), w), t_w, order))
    report.add(series_check("T(W) = r t W^2 (oracle S)", compose(sd.T, w), t_w, order))
    t_at_p = substitute_monomial(sd.T, 1 / p, 1, x_floor=1)
    t_at_q = substitute_monomial(sd.T, 1 / q, 1, x_floor=1)
    report.add(series_check("T(t/p) closed = oracle", t_tp, t_at_p, order))
    report.add(series_check("T(t/q) closed = oracle", t_tq, t_at_q, order))
    e_at_p = substitute_monomial(sd.E, 1 / p, 1, x_floor=1)
    e_at_q = substitute_monomial(sd.E, 1 / q, 1, x_floor=1)
    report.add(series_check("E(t/p) = T(t/p)", e_at_p, t_tp, order))
    report.add(series_check("E(t/q) = -T(t/q)", e_at_q, -t_tq, order))

    # B, C+ and C-
    bc = b_decomposition(params, order)
    b = bc.B
    report.add(series_check("[x]B = -t", b.x_coefficient(1), TSeries.monomial(-1, 1, 0, b.precision), b.precision))
    report.add(series_check("[x^2]B = -1", b.x_coefficient(2), TSeries.constant(-1, b.precision), b.precision))
    report.add(series_check("[x^3]B Lagrange coefficient", b.x_coefficient(3), x3_coefficient_closed(params, b.precision), b.precision))
    report.add(series_check("B radical route = Lagrange expansion", b, b_lagrange(params, b.precision), b.precision))
    report.add(series_check("B = (Y0 - Y1)(2t - x + pqr t x^3)", b, b_from_roots(params, order + LAW_PADDING), b.precision))
    pq = p * q
    reassembled = (
        _poly({(-1, 0): 1 / pq, (0, -1): -2 / pq}, b.precision + 8)
        + bc.Cminus.scale(2)
        - _poly({(1, 1): 1, (0, 2): 1}, b.precision + 8)
        + bc.Cplus.scale(2)
    )
    report.add(series_check("B = (1 - 2x̄t)/(pqt) + 2C- - xt - x^2 + 2C+", reassembled, b, b.precision))
    report.add(series_check("C+ = Lagrange expansion", bc.Cplus, c_plus_lagrange(params, bc.Cplus.precision), bc.Cplus.precision))

    # D(x,0)
    if p == q:
        report.add(flag_check("D = 0 for p = q", sd.D.is_zero()))
        report.add(zero_check("D(x,0) closed = 0", d_x0_closed(params, order), order))
    else:
        report.add(series_check("D(x,0) closed = oracle", d_x0_closed(params, order, bc), sd.Dx0, order))
    e2_closed, e4_closed = e_coefficients_closed(params, order, bc)
    report.add(series_check("E2 closed = oracle", e2_closed, e2_oracle, order))
    report.add(series_check("E4 closed = oracle", e4_closed, e4_oracle, order))

    # Symmetric case
    if p == q:
        p00_sym = p00_symmetric(params, order)
        q_px0 = q_px0_symmetric(params, order)
        report.add(series_check("P00 symmetric form = oracle", p00_sym, p00_oracle, order))
        report.add(series_check("P00 symmetric form = general form", p00_sym, p00_general, order))
        report.add(series_check("Q(px,0) at x = 0 is P00", q_px0.x_coefficient(0), p00_sym, order))
        q_oracle = q_from_table(table).scale_vars(p, q).row(0)
        report.add(series_check("Q(px,0) symmetric form = oracle", q_px0, q_oracle, order))
        doubled = (q_px0 * _poly({(1, 0): 1, (0, 1): -p}, order + 8)).shift_t(1).scale(2)
        report.add(series_check("S(x,0) = 2t(t - px)Q(px,0)", s_closed, doubled, order))

    report.merge(ergodicity_observe(params, horizon), "ergodicity: ")
    report.data.update(
        {
            "P00": [format_rat(p00_general.coefficient_at(n, 0)) for n in range(order)],
            "ergodic": params.ergodic,
        }
    )
    logger.info(f"{'✅' if report.passed else '⚠️'} law checks for {params.as_strings()}")
    return report
