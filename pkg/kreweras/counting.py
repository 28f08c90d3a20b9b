"""
Closed-form generating functions of Kreweras walks and their verification
against the brute-force oracle.
"""

import logging
from fractions import Fraction
from typing import Dict, List, Tuple

from kreweras.kernel import compute_Y0, discriminant, symmetric_functions, w_series, z_series
from kreweras.schemas import (
    CheckResult,
    CountingBundle,
    KernelParams,
    Report,
    bseries_check,
    flag_check,
    series_check,
    zero_check,
)
from kreweras.series import (
    BSeries,
    CancellationError,
    TSeries,
    complete_homogeneous,
    compose,
    diagonal,
    invert,
    sqrt,
    symmetric_power_sums,
)
from kreweras.walks import (
    axis_count,
    build_walk_table,
    catalan,
    kreweras_count,
    square_lattice_count,
    square_lattice_oracle,
    walk_table_to_bseries,
)

logger = logging.getLogger("Kreweras.counting")

# Extra t-coefficients carried through the 1/(2t^2) cancellation in Q(x,0).
CLOSED_FORM_PADDING = 3


# ============================================================================
# Internal Helpers
# ============================================================================
def _counting_kernel(order: int) -> KernelParams:
    return KernelParams(rho=1, order=order)


def _assert_power_series(series: TSeries, what: str) -> None:
    if series.is_zero():
        return
    if series.valuation < 0:
        raise CancellationError(f"{what}: t^{series.valuation} term survived the cancellation")
    exp_range = series.x_exponent_range()
    if exp_range and exp_range[0] < 0:
        raise CancellationError(f"{what}: x^{exp_range[0]} term survived the cancellation")


def _kernel_bseries(order: int) -> BSeries:
    """xy - t(x + y + x^2 y^2)."""
    return BSeries.from_terms({(1, 1, 0): 1, (1, 0, 1): -1, (0, 1, 1): -1, (2, 2, 1): -1}, order)


# ============================================================================
# Complete Generating Function
# ============================================================================
def q_full_by_recurrence(order: int) -> BSeries:
    """
    Q(x,y;t) layer by layer from
    Q_n = xy Q_{n-1} + x̄(Q_{n-1} - Q_{n-1}(0,y)) + ȳ(Q_{n-1} - Q_{n-1}(x,0)).
    """
    layers: List[Dict[Tuple[int, int], Fraction]] = [{(0, 0): Fraction(1)}]
    for _ in range(1, order):
        prev = layers[-1]
        layer: Dict[Tuple[int, int], Fraction] = {}
        for (i, j), c in prev.items():
            layer[(i + 1, j + 1)] = layer.get((i + 1, j + 1), 0) + c
            if i > 0:
                layer[(i - 1, j)] = layer.get((i - 1, j), 0) + c
            if j > 0:
                layer[(i, j - 1)] = layer.get((i, j - 1), 0) + c
        layers.append(layer)
    return BSeries(layers)


def q_full_from_closed(order: int) -> BSeries:
    """
    Q(x,y;t) rebuilt from the closed Q(x,0) through the functional equation:
    Q_n = (xy + x̄ + ȳ)Q_{n-1} - ȳ A_{n-1}(x) - x̄ A_{n-1}(y), with A = Q(x,0).
    """
    boundary = q_x0_closed(order)
    layers: List[Dict[Tuple[int, int], Fraction]] = [{(0, 0): Fraction(1)}]
    for n in range(1, order):
        prev = layers[-1]
        axis = boundary.coefficient(n - 1)
        layer: Dict[Tuple[int, int], Fraction] = {}

        def bump(key: Tuple[int, int], value: Fraction) -> None:
            total = layer.get(key, 0) + value
            if total:
                layer[key] = total
            else:
                layer.pop(key, None)

        for (i, j), c in prev.items():
            bump((i + 1, j + 1), c)
            bump((i - 1, j), c)
            bump((i, j - 1), c)
        for e, c in axis.terms.items():
            bump((e, -1), -c)
            bump((-1, e), -c)
        layers.append(layer)
    return BSeries(layers)


# ============================================================================
# Closed Forms
# ============================================================================
def q_x0_closed(order: int) -> TSeries:
    """Q(x,0;t) = (1/(tx)) (1/(2t) - x̄ - (1/W - x̄) sqrt(1 - xW^2))."""
    padded = order + CLOSED_FORM_PADDING
    w = w_series(_counting_kernel(padded))
    root = sqrt(1 - (w * w).shift_x(1))
    x_bar = TSeries.monomial(1, 0, -1, padded)
    half_over_t = TSeries.monomial(Fraction(1, 2), -1, 0, padded)
    inner = half_over_t - x_bar - (invert(w) - x_bar) * root
    result = inner.shift_t(-1).shift_x(-1)
    _assert_power_series(result, "Q(x,0)")
    if result.precision < order:
        raise ValueError(f"Q(x,0) known to t^{result.precision} only; order {order} requested")
    return result.truncate(order)


def axis_gf_closed(i: int, order: int) -> TSeries:
    """[x^i] Q(x,0;t) = W^(2i+1) / (2 * 4^i t) * (C_i - C_(i+1) W^3 / 4)."""
    if i < 0:
        raise ValueError(f"i must be non-negative, got {i}")
    padded = order + CLOSED_FORM_PADDING
    w = w_series(_counting_kernel(padded))
    bracket = catalan(i) - (w * w * w).scale(Fraction(catalan(i + 1), 4))
    result = (w ** (2 * i + 1) * bracket).shift_t(-1).scale(Fraction(1, 2 * 4**i))
    _assert_power_series(result, f"[x^{i}]Q(x,0)")
    return result.truncate(order)


def q_diag_closed(order: int) -> TSeries:
    """Q_d from t Q_d = (W - x̄) / sqrt(1 - xW(1 + W^3/4) + x^2 W^2/4) + x̄."""
    padded = order + CLOSED_FORM_PADDING
    w = w_series(_counting_kernel(padded))
    quarter = Fraction(1, 4)
    radicand = 1 - (w * (1 + (w * w * w).scale(quarter))).shift_x(1) + (w * w).shift_x(2).scale(quarter)
    x_bar = TSeries.monomial(1, 0, -1, padded)
    t_qd = (w - x_bar) * invert(sqrt(radicand)) + x_bar
    result = t_qd.shift_t(-1)
    _assert_power_series(result, "Q_d")
    if result.precision < order:
        raise ValueError(f"Q_d known to t^{result.precision} only; order {order} requested")
    return result.truncate(order)


def counting_bundle(order: int) -> CountingBundle:
    return CountingBundle(
        Qfull=q_full_by_recurrence(order),
        Qx0=q_x0_closed(order),
        Qdiag=q_diag_closed(order),
        W=w_series(_counting_kernel(order)),
    )


# ============================================================================
# Verification
# ============================================================================
def verify_q_xy_closed(order: int) -> Report:
    """
    xyt K(x,y) Q(x,y) + K(x,y) = y G(x) + x G(y) with G(x) = (x/(2Z) - t) sqrt(1 - xW^2),
    the closed Q(x,y) multiplied through by xyt and the kernel.
    """
    report = Report(command="q-xy-closed", params={"order": str(order)})
    kernel = _kernel_bseries(order + 2)
    q_full = q_full_by_recurrence(order)
    xyt = BSeries.from_terms({(1, 1, 1): 1}, order + 2)
    lhs = xyt * kernel * q_full + kernel

    params = _counting_kernel(order)
    z = z_series(params)
    w = w_series(params)
    root = sqrt(1 - (w * w).shift_x(1))
    t = TSeries.monomial(1, 1, 0, order + 1)
    g = (invert(z).scale(Fraction(1, 2)).shift_x(1) - t) * root
    g_x = BSeries.from_tseries(g, "x")
    g_y = BSeries.from_tseries(g, "y")
    y = BSeries.from_terms({(0, 1, 0): 1}, order + 2)
    x = BSeries.from_terms({(1, 0, 0): 1}, order + 2)
    rhs = y * g_x + x * g_y

    report.add(bseries_check("K Q xyt + K = y G(x) + x G(y)", lhs, rhs, order))
    report.add(bseries_check("left side symmetric in x, y", lhs, lhs.swap(), order))
    report.add(bseries_check("right side symmetric in x, y", rhs, rhs.swap(), order))
    return report


def verify_kernel_equation_R(order: int) -> Report:
    """
    R(x) = xtQ(x,0): R(x) + R(Y0) = xY0, and the second root through
    symmetric functions: the divided difference (R(Y0) - R(Y1))/(Y0 - Y1)
    satisfies (DD - x) sqrt(Δ) = 2txR + 2t - x, and R(Y0) + R(Y1) = x̄.
    """
    report = Report(command="kernel-equation-R", params={"order": str(order)})
    # [t^m]Q(x,0) has x-degree at most m/2; twice the order keeps the
    # divided-difference window past the requested one.
    work = 2 * order + 2
    r_series = q_x0_closed(work).shift_x(1).shift_t(1)
    params = _counting_kernel(work + 1)
    y0 = compute_Y0(params)
    x_y0 = y0.shift_x(1)
    report.add(zero_check("R(x) + R(Y0) - xY0 = 0", r_series + compose(r_series, y0) - x_y0, order))

    degree = r_series.x_exponent_range()[1]
    e1, e2 = symmetric_functions(params, precision=work + 2 * degree + 4)
    h = complete_homogeneous(e1, e2, degree)
    power = symmetric_power_sums(e1, e2, degree)
    divided = TSeries.zero(work + 2)
    both = TSeries.zero(work + 2)
    for k in range(1, degree + 1):
        r_k = r_series.x_coefficient(k)
        divided = divided + r_k * h[k - 1]
        both = both + r_k * power[k]
    divided = divided.truncate((work + 2) // 2)
    both = both.truncate(work // 2)

    root_delta = sqrt(discriminant(params))
    x = TSeries.monomial(1, 0, 1, work)
    lhs = (divided - x) * root_delta
    rhs = (r_series * 2).shift_t(1).shift_x(1) + TSeries.monomial(2, 1, 0, work) - x
    report.add(series_check("(DD - x) sqrt(Delta) = 2txR + 2t - x", lhs, rhs, order))
    report.add(series_check("R(Y0) + R(Y1) = 1/x", both, TSeries.monomial(1, 0, -1, work), order))
    return report


def verify_counting(order: int, max_i: int = 12) -> Report:
    """Closed forms against the walk oracle."""
    report = Report(command="verify-count", params={"order": str(order), "max_i": str(max_i)})
    table = build_walk_table(order)
    oracle = walk_table_to_bseries(table)
    logger.info(f"🔧 walk oracle ready up to n = {order}")

    report.add(
        flag_check(
            "a(3n) = 4^n C(3n,n)/((n+1)(2n+1))",
            all(table.count(0, 0, 3 * n) == kreweras_count(n) for n in range(order // 3 + 1)),
            f"n <= {order // 3}",
        )
    )
    report.add(
        flag_check(
            "a_{i,j}(n) = 0 unless n + i + j = 0 mod 3",
            all((n + i + j) % 3 == 0 for n in range(order + 1) for (i, j) in table.slice(n)),
        )
    )
    axis_pairs = [(i, n) for i in range(9) for n in range(order + 1) if 3 * n + 2 * i <= order]
    report.add(
        flag_check(
            "a_{i,0}(3n+2i) = axis formula",
            all(table.count(i, 0, 3 * n + 2 * i) == axis_count(i, n) for i, n in axis_pairs),
            f"{len(axis_pairs)} cells",
        )
    )
    report.add(
        flag_check(
            "a_{i,j}(n) = a_{j,i}(n)",
            all(table.count(i, j, n) == table.count(j, i, n) for n in range(order + 1) for (i, j) in table.slice(n)),
        )
    )

    qx0 = q_x0_closed(order)
    mismatch = None
    for n in range(order):
        for i in range(max_i + 1):
            if qx0.coefficient_at(n, i) != table.count(i, 0, n):
                mismatch = f"x^{i} t^{n}"
                break
        if mismatch:
            break
    report.add(
        CheckResult(
            name="Q(x,0) closed = oracle",
            passed=mismatch is None,
            detail=f"i <= {max_i}, n < {order}",
            first_mismatch=mismatch,
        )
    )
    integral = all(c.denominator == 1 and c >= 0 for _, _, c in qx0.terms())
    report.add(flag_check("Q(x,0) coefficients are non-negative integers", integral))

    upto = min(order, 7)
    for i in range(7):
        closed = axis_gf_closed(i, order)
        report.add(series_check(f"[x^{i}]Q(x,0) closed = Q(x,0) closed", closed, qx0.x_coefficient(i), order))
        expected = TSeries.from_terms(
            {(3 * n + 2 * i, 0): axis_count(i, n) for n in range(upto) if 3 * n + 2 * i < order},
            order,
        )
        window = min(order, 3 * upto + 2 * i)
        report.add(series_check(f"[x^{i}]Q(x,0) = axis counts", closed, expected, window))

    q_diag = q_diag_closed(order)
    report.add(series_check("Q_d closed = diagonal of oracle", q_diag, diagonal(oracle), order))

    rebuilt = q_full_from_closed(order)
    report.add(bseries_check("Q(x,y) rebuilt from closed Q(x,0) = oracle", rebuilt, oracle, order))
    report.add(
        flag_check(
            "[t^n]Q(1,1) = number of walks",
            all(rebuilt.total(n) == table.row_total(n) for n in range(order)),
        )
    )

    report.merge(verify_q_xy_closed(min(order, 12)))
    report.merge(verify_kernel_equation_R(min(order, 12)))
    report.add(
        flag_check(
            "square lattice formula = oracle",
            all(square_lattice_count(n) == square_lattice_oracle(n) for n in range(7)),
            "n <= 6",
        )
    )
    logger.info(f"{'✅' if report.passed else '⚠️'} counting checks at order {order}")
    return report
