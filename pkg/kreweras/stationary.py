"""
Stationary distribution of the reflected Kreweras chain.

Numeric oracle: power iteration of the transition operator on a truncated
grid (numpy). Closed forms: the root w of pqr*w^3 - w + 2, p_{0,0}, the axis
series Q(x,0) and Q(0,y), the Flatto-Hahn forms and the tail asymptotics,
evaluated in arbitrary precision (mpmath).
"""

import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import mpmath as mp
import numpy as np

from kreweras.config import DEFAULT_TOL, get_default_grid, get_default_precision
from kreweras.schemas import (
    ChainParams,
    Report,
    RootW,
    StationaryEstimate,
    flag_check,
    value_check,
)

logger = logging.getLogger("Kreweras.stationary")

MAX_SWEEPS = 100_000
CHECK_EVERY = 10
COMPARE_TOL = 1e-8
RICHARDSON_ORDER = 4


# ============================================================================
# Internal Helpers
# ============================================================================
def _bits(precision: Optional[int]) -> int:
    return precision or get_default_precision()


def _mpf(value: Fraction):
    return mp.mpf(value.numerator) / value.denominator


def _mp_params(params: ChainParams):
    return _mpf(params.p), _mpf(params.q), _mpf(params.r)


def _require_ergodic(params: ChainParams) -> None:
    if not params.ergodic:
        raise ValueError(
            f"Non-ergodic parameters {params.as_strings()}: the chain has a stationary "
            "distribution only when r < min(p, q)"
        )


def _nstr(value) -> str:
    return mp.nstr(value, 30)


# ============================================================================
# Root w
# ============================================================================
def solve_w(params: ChainParams, precision: int = None) -> RootW:
    """
    Smallest positive root of pqr*w^3 - w + 2, bracketed in [1/max(p,q), 1/sqrt(pq)]
    by bisection and polished by Newton's method.
    """
    bits = _bits(precision)
    with mp.workprec(bits):
        p, q, r = _mp_params(params)
        if params.p == params.q:
            return RootW(w=1 / p, precision=bits)
        rho = p * q * r

        def f(w):
            return rho * w**3 - w + 2

        low, high = 1 / max(p, q), 1 / mp.sqrt(p * q)
        if f(low) < 0 or f(high) > 0:
            raise ArithmeticError(
                f"Bracket failure for w at {params.as_strings()}: "
                f"f(1/M) = {mp.nstr(f(low), 8)}, f(1/sqrt(pq)) = {mp.nstr(f(high), 8)}"
            )
        a, b = low, high
        for _ in range(64):
            mid = (a + b) / 2
            if f(mid) > 0:
                a = mid
            else:
                b = mid
        w = mp.findroot(f, (a + b) / 2, solver="newton", df=lambda v: 3 * rho * v**2 - 1)
        if not low <= w <= high:
            raise ArithmeticError(f"Newton left the bracket: w = {mp.nstr(w, 20)}")
        logger.debug(f"w = {mp.nstr(w, 20)} for {params.as_strings()}")
        return RootW(w=w, precision=bits)


def _p00_formula(p, q, r, w):
    return w * (p - r) * (q - r) * abs(p - q) / (6 * p * q * (1 - r * w) * mp.sqrt(1 - p * q * w**2))


def p00_closed(params: ChainParams, precision: int = None):
    """Stationary probability of the origin."""
    _require_ergodic(params)
    bits = _bits(precision)
    with mp.workprec(bits):
        p, q, r = _mp_params(params)
        if params.p == params.q:
            base = 1 - r / p
            return base * mp.sqrt(base) / 3
        w = solve_w(params, bits).w
        return _p00_formula(p, q, r, w)


# ============================================================================
# Axis Series
# ============================================================================
def _cancellation_growth(params: ChainParams, bits: int) -> float:
    """Per-index loss of the division recurrence: its modes (q/p)^i, (r/p)^i over the coefficient decay."""
    if params.p == params.q:
        return 1.0
    if params.p < params.q:
        decay = float(params.r / params.p)
    else:
        with mp.workprec(bits):
            w = solve_w(params, bits).w
            decay = float(_mpf(params.q) * _mpf(params.r) * w**2)
    return max(1.0, float(params.q / params.p), float(params.r / params.p)) / decay


def qx0_coeffs(params: ChainParams, i_max: int, precision: int = None) -> List:
    """
    Taylor coefficients of Q(x,0) = sum_i [x^i] up to i_max.

    The radical is expanded binomially and the quadratic denominator
    (1 - qx/p)(1 - rx/p) is divided out by recurrence.
    """
    _require_ergodic(params)
    bits = _bits(precision)
    # The recurrence modes cancel exactly; the surviving coefficients are smaller by growth^i.
    growth = _cancellation_growth(params, bits)
    extra = int(math.ceil(i_max * math.log2(growth))) + 32
    with mp.workprec(bits + extra):
        p, q, r = _mp_params(params)
        q00 = p00_closed(params, bits + extra)
        if params.p == params.q:
            coeffs = [mp.mpf(1)]
            ratio = r / p
            for k in range(1, i_max + 1):
                coeffs.append(coeffs[-1] * mp.mpf(2 * k - 1) / (2 * k) * ratio)
            return [c * q00 for c in coeffs]

        w = solve_w(params, bits + extra).w
        a = q * r * w**2
        radical = [mp.mpf(1)]
        for k in range(1, i_max + 1):
            radical.append(radical[-1] * mp.mpf(2 * k - 3) / (2 * k) * a)
        linear = (q / p) * (1 - 1 / (q * w)) * mp.sqrt(1 - p * r * w**2)
        lin_coef, quad_coef = (q + r) / p, q * r / p**2
        coeffs: List = []
        for k in range(i_max + 1):
            numerator = radical[k]
            if k >= 1:
                numerator -= radical[k - 1] / (p * w)
            if k == 1:
                numerator -= linear
            value = numerator
            if k >= 1:
                value += lin_coef * coeffs[k - 1]
            if k >= 2:
                value -= quad_coef * coeffs[k - 2]
            coeffs.append(value)
        return [c * q00 for c in coeffs]


def q0y_coeffs(params: ChainParams, j_max: int, precision: int = None) -> List:
    """Taylor coefficients of Q(0,y): the x-axis series with p and q exchanged."""
    return qx0_coeffs(params.swapped(), j_max, precision)


def axis_probabilities(params: ChainParams, i_max: int, precision: int = None) -> Tuple[List, List]:
    """(p_{i,0})_{i<=i_max} and (p_{0,j})_{j<=i_max} from the closed axis series."""
    bits = _bits(precision)
    with mp.workprec(bits):
        x_axis = qx0_coeffs(params, i_max, bits)
        y_axis = q0y_coeffs(params, i_max, bits)
        r_prime, r_second = _mpf(params.r_prime), _mpf(params.r_second)
        p_i0 = [x_axis[0]] + [c / r_prime for c in x_axis[1:]]
        p_0j = [y_axis[0]] + [c / r_second for c in y_axis[1:]]
        return p_i0, p_0j


def q_x0_value(params: ChainParams, x, precision: int = None):
    """Closed Q(x,0) at a real point; the removable point x = p/q is approached from both sides."""
    _require_ergodic(params)
    bits = _bits(precision)
    with mp.workprec(bits):
        p, q, r = _mp_params(params)
        x = mp.mpf(x)
        q00 = p00_closed(params, bits)
        if params.p == params.q:
            return q00 / mp.sqrt(1 - r * x / p)
        w = solve_w(params, bits).w
        linear = (q / p) * (1 - 1 / (q * w)) * mp.sqrt(1 - p * r * w**2)

        def value(u):
            numerator = (1 - u / (p * w)) * mp.sqrt(1 - u * q * r * w**2) - u * linear
            return q00 * numerator / ((1 - q * u / p) * (1 - r * u / p))

        if abs(1 - q * x / p) < mp.mpf(2) ** (-bits // 3):
            delta = mp.mpf(2) ** (-bits // 4)
            return (value(x - delta) + value(x + delta)) / 2
        return value(x)


def q_0y_value(params: ChainParams, y, precision: int = None):
    return q_x0_value(params.swapped(), y, precision)


# ============================================================================
# Power Iteration Oracle
# ============================================================================
def transition_weights(params: ChainParams, size: int, dtype=np.longdouble):
    """Per-cell probabilities of the W, S and NE moves on a size x size grid."""

    def cast(value: Fraction):
        return dtype(value.numerator) / dtype(value.denominator)

    wp = np.full((size, size), cast(params.p), dtype=dtype)
    wq = np.full((size, size), cast(params.q), dtype=dtype)
    wr = np.full((size, size), cast(params.r), dtype=dtype)
    # x-axis
    wp[1:, 0] = cast(params.p_prime)
    wq[1:, 0] = 0
    wr[1:, 0] = cast(params.r_prime)
    # y-axis
    wp[0, 1:] = 0
    wq[0, 1:] = cast(params.q_second)
    wr[0, 1:] = cast(params.r_second)
    # origin
    wp[0, 0] = 0
    wq[0, 0] = 0
    wr[0, 0] = 1
    return wp, wq, wr


def transition_step(grid: np.ndarray, wp: np.ndarray, wq: np.ndarray, wr: np.ndarray) -> np.ndarray:
    """One step of the chain; NE moves off the grid are lost."""
    out = np.zeros_like(grid)
    out[:-1, :] += (grid * wp)[1:, :]
    out[:, :-1] += (grid * wq)[:, 1:]
    out[1:, 1:] += (grid * wr)[:-1, :-1]
    return out


def stationary_numeric(
    params: ChainParams,
    grid: int = None,
    tol: float = None,
    max_sweeps: int = MAX_SWEEPS,
    dtype=np.longdouble,
) -> StationaryEstimate:
    """
    Stationary distribution by power iteration of the cubed operator.

    The chain has period 3, so each sweep applies three steps and the
    estimate is the average of the three phases.
    """
    _require_ergodic(params)
    size = grid or get_default_grid()
    tol = DEFAULT_TOL if tol is None else tol
    if size < 50:
        raise ValueError(f"grid must be at least 50, got {size}")
    wp, wq, wr = transition_weights(params, size, dtype)
    current = np.zeros((size, size), dtype=dtype)
    current[0, 0] = 1
    residual = float("inf")
    logger.info(f"🔧 power iteration on a {size}x{size} grid for {params.as_strings()}")
    for sweep in range(1, max_sweeps + 1):
        first = transition_step(current, wp, wq, wr)
        second = transition_step(first, wp, wq, wr)
        third = transition_step(second, wp, wq, wr)
        if sweep % CHECK_EVERY == 0:
            average = (current + first + second) / 3
            average /= average.sum()
            following = transition_step(average, wp, wq, wr)
            residual = float(np.abs(following - average).sum())
            logger.debug(f"sweep {sweep}: residual {residual:.3e}")
            if residual < tol:
                mass = float(following.sum())
                logger.info(
                    f"✅ converged after {sweep} sweeps: residual {residual:.2e}, leaked {1 - mass:.2e}"
                )
                return StationaryEstimate(grid=average, residual=residual, mass=mass, iterations=sweep)
        current = third / third.sum()
    raise ArithmeticError(
        f"Power iteration did not converge in {max_sweeps} sweeps: residual {residual:.3e}"
    )


# ============================================================================
# Grid Reconstruction
# ============================================================================
def _cell_weights(params: ChainParams, i: int, j: int):
    """(W, S, NE) probabilities out of cell (i, j), as mpf."""
    if i == 0 and j == 0:
        return mp.mpf(0), mp.mpf(0), mp.mpf(1)
    if j == 0:
        return _mpf(params.p_prime), mp.mpf(0), _mpf(params.r_prime)
    if i == 0:
        return mp.mpf(0), _mpf(params.q_second), _mpf(params.r_second)
    return _mp_params(params)


def _q_weight(params: ChainParams, i: int, j: int):
    """Factor between p_{i,j} and the coefficient of Q(x,y)."""
    if i == 0 and j == 0:
        return mp.mpf(1)
    if j == 0:
        return _mpf(params.r_prime)
    if i == 0:
        return _mpf(params.r_second)
    return _mpf(params.r)


def reconstruct_grid(params: ChainParams, size: int = 20, precision: int = None) -> List[List]:
    """
    p_{i,j} for i, j <= size from the closed x-axis series, row by row through
    [x^i y^j] of Q(x,y)(1 - p x̄ - q ȳ - r xy) = q(1 - ȳ)Q(x,0) + p(1 - x̄)Q(0,y).
    """
    bits = _bits(precision)
    # Each row divides by q; 2 bits per row keeps the working error below the closed one.
    with mp.workprec(bits + 4 * size):
        p, q, r = _mp_params(params)
        width = 2 * size + 2
        rows = [qx0_coeffs(params, width, bits + 4 * size)]
        for j in range(size):
            prev = rows[-1]
            below = rows[-2] if j >= 1 else None
            row = []
            for i in range(len(prev) - 1):
                factor = 1 - (q if j == 0 else 0) - (p if i == 0 else 0)
                value = factor * prev[i] - p * prev[i + 1]
                if i >= 1 and j >= 1:
                    value -= r * below[i - 1]
                row.append(value / q)
            rows.append(row)
        return [
            [rows[j][i] / _q_weight(params, i, j) for j in range(size + 1)]
            for i in range(size + 1)
        ]


def stationarity_residual(params: ChainParams, grid: List[List], precision: int = None):
    """max |p_{k,l} - sum_{i,j} p_{i,j} T(i,j; k,l)| over cells whose inflow lies in the grid."""
    bits = _bits(precision)
    with mp.workprec(bits):
        size = len(grid) - 1
        worst = mp.mpf(0)
        for k in range(size):
            for l in range(size):
                inflow = _cell_weights(params, k + 1, l)[0] * grid[k + 1][l]
                inflow += _cell_weights(params, k, l + 1)[1] * grid[k][l + 1]
                if k >= 1 and l >= 1:
                    inflow += _cell_weights(params, k - 1, l - 1)[2] * grid[k - 1][l - 1]
                worst = max(worst, abs(grid[k][l] - inflow))
        return worst


# ============================================================================
# Closed-form Identities
# ============================================================================
def verify_balance_identities(
    params: ChainParams, estimate: Optional[StationaryEstimate] = None, precision: int = None
) -> Report:
    """Q(1,0) = (q - r)/(3q), the two routes to Q(1,1), normalization and (p - rx)Q(x,1) = pQ(0,1)."""
    _require_ergodic(params)
    bits = _bits(precision)
    report = Report(command="balance", params=params.as_strings())
    with mp.workprec(bits):
        p, q, r = _mp_params(params)
        q00 = p00_closed(params, bits)
        q10 = q_x0_value(params, 1, bits)
        q01 = q_0y_value(params, 1, bits)
        report.add(value_check("Q(1,0) = (q - r)/(3q)", q10, (q - r) / (3 * q), 1e-30))
        report.add(value_check("Q(0,1) = (p - r)/(3p)", q01, (p - r) / (3 * p), 1e-30))
        q11_from_y = p / (p - r) * q01
        q11_from_x = q / (q - r) * q10
        report.add(value_check("Q(1,1) = p/(p-r) Q(0,1) = q/(q-r) Q(1,0)", q11_from_y, q11_from_x, 1e-30))
        if params.p == params.q:
            report.add(value_check("Q(1,0) = Q(0,0)/sqrt(1 - r/p)", q10, q00 / mp.sqrt(1 - r / p), 1e-30))
        r_prime, r_second = _mpf(params.r_prime), _mpf(params.r_second)
        total = q00 + (q10 - q00) / r_prime + (q01 - q00) / r_second + (q11_from_x - q10 - q01 + q00) / r
        report.add(value_check("p00 + P1(1) + P2(1) + P(1,1) = 1 (closed)", total, 1, 1e-30))

    if estimate is not None:
        grid = estimate.grid
        size = grid.shape[0]
        pf, rf = float(params.p), float(params.r)
        weights = np.full((size, size), float(params.r))
        weights[1:, 0] = float(params.r_prime)
        weights[0, 1:] = float(params.r_second)
        weights[0, 0] = 1.0
        q_grid = np.asarray(grid, dtype=float) * weights
        column_sums = q_grid.sum(axis=1)  # [x^i] Q(x,1)
        q0_1 = column_sums[0]
        worst = 0.0
        for x in (0.0, 0.25, 0.5, 0.75, 1.0):
            q_x1 = float(np.polynomial.polynomial.polyval(x, column_sums))
            worst = max(worst, abs((pf - rf * x) * q_x1 - pf * q0_1))
        report.add(flag_check("(p - rx)Q(x,1) = pQ(0,1) (numeric)", worst <= COMPARE_TOL, f"worst {worst:.2e}", worst))
        q10_numeric = float(q_grid[:, 0].sum())
        report.add(value_check("Q(1,0) numeric = (q - r)/(3q)", q10_numeric, float((params.q - params.r) / (3 * params.q)), COMPARE_TOL))
        report.add(value_check("mass kept on the grid", estimate.mass, 1.0, 1e-6))
    return report


def flatto_hahn_forms(params: ChainParams, samples: int = 20, precision: int = None) -> Report:
    """Q(0,y) = Q00 Psi(y)/Psi(0) and Q(x,0) = Q00 Phi(x)/Phi(0), valid for p <= q."""
    if params.p > params.q:
        raise ValueError("The Flatto-Hahn forms hold only for p <= q")
    _require_ergodic(params)
    bits = _bits(precision)
    report = Report(command="flatto-hahn", params=params.as_strings())
    with mp.workprec(bits):
        p, q, r = _mp_params(params)
        w = solve_w(params, bits).w
        q00 = p00_closed(params, bits)
        root_pr = mp.sqrt(1 - p * r * w**2)
        root_qr = mp.sqrt(1 - q * r * w**2)
        root_pq = mp.sqrt(max(mp.mpf(0), 1 - p * q * w**2))

        def psi(y):
            s = mp.sqrt(1 - y * p * r * w**2)
            return (s + root_pr) / ((s + root_qr) * (s + root_pq))

        def phi(x):
            s = mp.sqrt(1 - x * q * r * w**2)
            return (s + root_qr) / ((s + root_pr) * (s - root_pq))

        worst_y = mp.mpf(0)
        worst_x = mp.mpf(0)
        for point in mp.linspace(0, 1, samples):
            worst_y = max(worst_y, abs(q00 * psi(point) / psi(0) - q_0y_value(params, point, bits)))
            worst_x = max(worst_x, abs(q00 * phi(point) / phi(0) - q_x0_value(params, point, bits)))
        report.add(value_check(f"Q(0,y) Psi-form ({samples} points)", worst_y, 0, 1e-12))
        report.add(value_check(f"Q(x,0) Phi-form ({samples} points)", worst_x, 0, 1e-12))
    return report


def asymmetry_witness(params: ChainParams, samples: int = 20, precision: int = None) -> Report:
    """
    Q(px,0)/(1-px) - Q(0,qx)/(1-qx) = 2 Q00 x (pw-1) sqrt(1-qrw^2) / (w(1-px)(1-qx)(1-rx)),
    which vanishes identically exactly when p = q.
    """
    _require_ergodic(params)
    bits = _bits(precision)
    report = Report(command="asymmetry", params=params.as_strings())
    with mp.workprec(bits):
        p, q, r = _mp_params(params)
        w = solve_w(params, bits).w
        q00 = p00_closed(params, bits)
        worst = mp.mpf(0)
        largest = mp.mpf(0)
        for x in mp.linspace(0, 1, samples):
            lhs = q_x0_value(params, p * x, bits) / (1 - p * x) - q_0y_value(params, q * x, bits) / (1 - q * x)
            rhs = 2 * q00 * x * (p * w - 1) * mp.sqrt(1 - q * r * w**2) / (
                w * (1 - p * x) * (1 - q * x) * (1 - r * x)
            )
            worst = max(worst, abs(lhs - rhs))
            largest = max(largest, abs(lhs))
        report.add(value_check("asymmetry closed form", worst, 0, 1e-25))
        if params.p == params.q:
            report.add(flag_check("difference vanishes for p = q", largest < 1e-25, f"max {mp.nstr(largest, 5)}"))
        else:
            report.add(flag_check("difference non-zero for p != q", largest > 1e-10, f"max {mp.nstr(largest, 5)}"))
        report.data["max_difference"] = _nstr(largest)
    return report


def discriminant_roots(params: ChainParams, precision: int = None) -> Tuple:
    """Real roots x0 < x1 < x2 of x^2 Δ(x) = (x - 1)^2 - 4pqr x^3."""
    bits = _bits(precision)
    with mp.workprec(bits):
        rho = _mpf(params.rho)
        roots = mp.polyroots([-4 * rho, 1, -2, 1], maxsteps=200, extraprec=bits)
        for root in roots:
            if abs(mp.im(root)) > mp.mpf(2) ** (-bits // 2):
                raise ArithmeticError(f"Discriminant root {root} is not real")
        return tuple(sorted(mp.re(root) for root in roots))


def _kernel_roots_at(rho, x):
    """(Y0(x), Y1(x)) = ((1 - x̄ ∓ sqrt Δ(x))/(2 rho x)) at a real point."""
    delta = (1 - 1 / x) ** 2 - 4 * rho * x
    root = mp.sqrt(delta)
    return (1 - 1 / x - root) / (2 * rho * x), (1 - 1 / x + root) / (2 * rho * x)


def verify_root_identities(params: ChainParams, precision: int = None) -> Report:
    """The root w: equation, bounds, the three-way identity, the sign chain and the discriminant roots."""
    _require_ergodic(params)
    bits = _bits(precision)
    report = Report(command="root-identities", params=params.as_strings())
    with mp.workprec(bits):
        p, q, r = _mp_params(params)
        rho = p * q * r
        w = solve_w(params, bits).w
        eps = mp.mpf(2) ** (8 - bits)
        big, small = max(p, q), min(p, q)
        symmetric = params.p == params.q

        report.add(value_check("pqr w^3 - w + 2 = 0", rho * w**3 - w + 2, 0, float(eps)))
        lower, upper = 1 / big, 1 / mp.sqrt(p * q)
        report.add(
            flag_check(
                "1/M <= w <= 1/sqrt(pq) < 1/r",
                lower - eps <= w <= upper + eps and upper < 1 / r,
            )
        )
        report.add(
            flag_check(
                "bounds are equalities iff p = q",
                (abs(w - lower) <= eps and abs(w - upper) <= eps) == symmetric,
            )
        )
        left = (p * w - 1) ** 2 * (1 - q * r * w**2)
        middle = (q * w - 1) ** 2 * (1 - p * r * w**2)
        right = (r * w - 1) ** 2 * (1 - p * q * w**2)
        report.add(value_check("(pw-1)^2(1-qrw^2) = (qw-1)^2(1-prw^2)", left, middle, 1e-25))
        report.add(value_check("(qw-1)^2(1-prw^2) = (rw-1)^2(1-pqw^2)", middle, right, 1e-25))

        def root_of(value):
            return mp.sqrt(max(mp.mpf(0), value))

        chain_a = (big * w - 1) * root_of(1 - small * r * w**2)
        chain_b = -(small * w - 1) * root_of(1 - big * r * w**2)
        chain_c = -(r * w - 1) * root_of(1 - p * q * w**2)
        report.add(
            flag_check(
                "0 <= (Mw-1)sqrt(1-mrw^2) = -(mw-1)sqrt(1-Mrw^2) = -(rw-1)sqrt(1-pqw^2)",
                chain_a >= -eps and abs(chain_a - chain_b) < 1e-25 and abs(chain_b - chain_c) < 1e-25,
            )
        )

        x0, x1, x2 = discriminant_roots(params, bits)
        report.add(
            flag_check(
                "0 < x0 < 1 < x1 < 1/M <= 1/m < 1/r <= x2",
                0 < x0 < 1 < x1 < 1 / big <= 1 / small + eps and 1 / small < 1 / r <= x2 + eps,
            )
        )
        report.add(value_check("x2 = 1/(pqr w^2)", x2, 1 / (rho * w**2), 1e-25))
        report.add(value_check("Delta0 = 4 pqr x2 = 4/w^2", 4 * rho * x2, 4 / w**2, 1e-25))

        y0_big, y1_big = _kernel_roots_at(rho, 1 / big)
        y0_small, y1_small = _kernel_roots_at(rho, 1 / small)
        y0_r, y1_r = _kernel_roots_at(rho, 1 / r)
        report.add(value_check("Y0(1/M) = 1/m", y0_big, 1 / small, 1e-25))
        report.add(value_check("Y0(1/m) = 1/M", y0_small, 1 / big, 1e-25))
        report.add(value_check("Y0(1/r) = 1/M", y0_r, 1 / big, 1e-25))
        report.add(value_check("Y1(1/M) = 1/r", y1_big, 1 / r, 1e-25))
        report.add(value_check("Y1(1/m) = 1/r", y1_small, 1 / r, 1e-25))
        report.add(value_check("Y1(1/r) = 1/m", y1_r, 1 / small, 1e-25))
        report.data["w"] = _nstr(w)
        report.data["discriminant_roots"] = [_nstr(x0), _nstr(x1), _nstr(x2)]
    return report


# ============================================================================
# Asymptotics
# ============================================================================
def _richardson(values: Dict[int, object], start: int, order: int = RICHARDSON_ORDER):
    """Limit of a_i = L + e_1/i + e_2/i^2 + ... from a_start .. a_{start+order}."""
    total = mp.mpf(0)
    for k in range(order + 1):
        i = start + k
        weight = mp.mpf(i) ** order / (math.factorial(k) * math.factorial(order - k))
        total += (-1) ** (k + order) * weight * values[i]
    return total


def _pole_free_tail(params: ChainParams, coeffs: List, beta) -> Tuple:
    """
    (rate, exponent) of the coefficients of (1 - qx/p)(1 - rx/p) Q(x,0), by
    Richardson extrapolation of d_{i+1}/d_i and i(d_{i+1}/(beta d_i) - 1).

    For p > q the removable poles of Q(x,0) at p/q and p/r lie inside the radius
    1/beta and their transient hides the i^(-3/2) law for i <= 80. The factor is
    non-zero at 1/beta, so the product has the same rate and exponent.
    """
    lin = _mpf((params.q + params.r) / params.p)
    quad = _mpf(params.q * params.r / params.p**2)
    i_max = len(coeffs) - 1
    d = {i: coeffs[i] - lin * coeffs[i - 1] + quad * coeffs[i - 2] for i in range(2, i_max + 1)}
    start = i_max - RICHARDSON_ORDER - 1
    ratios = {i: d[i + 1] / d[i] for i in range(start, i_max)}
    local = {i: i * (ratios[i] / beta - 1) for i in ratios}
    return _richardson(ratios, start), _richardson(local, start)


def asymptotics_check(params: ChainParams, i_max: int = 80, precision: int = None) -> Report:
    """
    Rate beta and exponent alpha of p_{i,0} ~ C beta^i i^alpha against the regime:
    p = q -> (r/p, -1/2), p < q -> (r/p, 0), p > q -> (qrw^2, -3/2).

    p <= q: least squares of log p_{i,0} = c + i log(beta) + alpha log(i) on
    i in [i_max/2, i_max]. p > q: see _pole_free_tail. The least-squares fit is
    reported for every regime.
    """
    _require_ergodic(params)
    if i_max < 40:
        raise ValueError(f"i_max must be at least 40, got {i_max}")
    bits = _bits(precision)
    report = Report(command="asymptotics", params=params.as_strings())
    with mp.workprec(bits):
        coeffs = qx0_coeffs(params, i_max, bits)
        r_prime = _mpf(params.r_prime)
        indices = np.arange(i_max // 2, i_max + 1)
        logs = np.array([float(mp.log(coeffs[i] / r_prime)) for i in indices])
        if params.p == params.q:
            regime, beta_expected, alpha_expected = "p = q", float(params.r / params.p), -0.5
        elif params.p < params.q:
            regime, beta_expected, alpha_expected = "p < q", float(params.r / params.p), 0.0
        else:
            w = solve_w(params, bits).w
            q, r = _mpf(params.q), _mpf(params.r)
            beta_exact = q * r * w**2
            regime, beta_expected, alpha_expected = "p > q", float(beta_exact), -1.5
            beta_tail, alpha_tail = _pole_free_tail(params, coeffs, beta_exact)

    design = np.column_stack([np.ones(len(indices)), indices.astype(float), np.log(indices.astype(float))])
    (intercept, log_beta, raw_alpha), *_ = np.linalg.lstsq(design, logs, rcond=None)
    raw_beta = float(np.exp(log_beta))
    if regime == "p > q":
        beta, alpha, method = float(beta_tail), float(alpha_tail), "pole-free ratio extrapolation"
    else:
        beta, alpha, method = raw_beta, float(raw_alpha), "least squares"
    beta_gap = abs(beta - beta_expected) / beta_expected
    alpha_gap = abs(alpha - alpha_expected)
    alpha_tol = 0.05 * max(1.0, abs(alpha_expected))
    report.add(flag_check(f"rate ({regime})", beta_gap <= 0.01, f"fitted {beta:.6f}, expected {beta_expected:.6f}", beta_gap))
    report.add(flag_check(f"exponent ({regime})", alpha_gap <= alpha_tol, f"fitted {alpha:.4f}, expected {alpha_expected}", alpha_gap))
    report.data.update(
        {
            "regime": regime,
            "method": method,
            "beta": beta,
            "alpha": alpha,
            "least_squares": {"beta": raw_beta, "alpha": float(raw_alpha), "constant": float(np.exp(intercept))},
            "beta_expected": beta_expected,
            "alpha_expected": alpha_expected,
            "i_range": [int(indices[0]), int(indices[-1])],
        }
    )
    logger.info(f"{'✅' if report.passed else '⚠️'} tail fit {regime} ({method}): beta {beta:.5f}, alpha {alpha:.3f}")
    return report


# ============================================================================
# Full Verification
# ============================================================================
def verify_stationary(
    params: ChainParams,
    grid: int = None,
    tol: float = None,
    precision: int = None,
    i_max: int = 20,
) -> Report:
    """Closed forms against the power-iteration oracle for one parameter triple."""
    _require_ergodic(params)
    bits = _bits(precision)
    report = Report(command="verify-stationary", params=params.as_strings())
    estimate = stationary_numeric(params, grid, tol)
    report.add(
        flag_check(
            "power iteration residual below tolerance",
            estimate.residual < (DEFAULT_TOL if tol is None else tol),
            f"{estimate.residual:.2e} after {estimate.iterations} sweeps",
            estimate.residual,
        )
    )
    numeric = np.asarray(estimate.grid, dtype=float)

    with mp.workprec(bits):
        p00 = p00_closed(params, bits)
        report.add(value_check("p00 closed = power iteration", float(p00), numeric[0, 0], COMPARE_TOL))
        if params.p == params.q:
            delta = Fraction(1, 10**20)
            nearby = ChainParams(p=params.p + delta, q=params.q - delta, r=params.r)
            p, q, r = _mp_params(nearby)
            general = _p00_formula(p, q, r, solve_w(nearby, bits).w)
            report.add(value_check("p = q branch = limit of the |p-q| formula", general, p00, 1e-15))

        p_i0, p_0j = axis_probabilities(params, i_max, bits)
        gap_x = max(abs(float(p_i0[i]) - numeric[i, 0]) for i in range(i_max + 1))
        gap_y = max(abs(float(p_0j[j]) - numeric[0, j]) for j in range(i_max + 1))
        report.add(flag_check(f"p_(i,0) closed = power iteration (i <= {i_max})", gap_x <= COMPARE_TOL, f"worst {gap_x:.2e}", gap_x))
        report.add(flag_check(f"p_(0,j) closed = power iteration (j <= {i_max})", gap_y <= COMPARE_TOL, f"worst {gap_y:.2e}", gap_y))

        rebuilt = reconstruct_grid(params, i_max, bits)
        residual = stationarity_residual(params, rebuilt, bits)
        report.add(value_check("stationarity of the rebuilt grid", residual, 0, COMPARE_TOL))
        column_gap = max(abs(rebuilt[0][j] - p_0j[j]) for j in range(i_max + 1))
        report.add(value_check("rebuilt column 0 = closed Q(0,y)", column_gap, 0, 1e-20))
        interior_gap = max(
            abs(float(rebuilt[i][j]) - numeric[i, j]) for i in range(i_max + 1) for j in range(i_max + 1)
        )
        report.add(flag_check("rebuilt grid = power iteration", interior_gap <= COMPARE_TOL, f"worst {interior_gap:.2e}", interior_gap))

    if params.p == params.q:
        asym = float(np.abs(numeric - numeric.T).max())
        report.add(flag_check("estimate symmetric for p = q", asym <= 1e-10, f"{asym:.2e}", asym))

    report.merge(verify_balance_identities(params, estimate, bits), "balance: ")
    report.merge(verify_root_identities(params, bits), "roots: ")
    if params.p <= params.q:
        report.merge(flatto_hahn_forms(params, 20, bits), "flatto-hahn: ")
    report.merge(asymmetry_witness(params, 20, bits), "asymmetry: ")

    with mp.workprec(bits):
        w = solve_w(params, bits).w
        report.data.update(
            {
                "w": _nstr(w),
                "p00": _nstr(p00),
                "pi0": [_nstr(value) for value in p_i0],
                "residual": estimate.residual,
                "mass": estimate.mass,
                "iterations": estimate.iterations,
            }
        )
    logger.info(f"{'✅' if report.passed else '⚠️'} stationary checks for {params.as_strings()}")
    return report
