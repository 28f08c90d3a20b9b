"""
Exact truncated series arithmetic over the rationals.

LPoly    Laurent polynomial in x
TSeries  Laurent series in t with LPoly coefficients, known modulo t^precision
BSeries  power series in t with polynomial coefficients in x and y
"""

import logging
import math
import re
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

logger = logging.getLogger("Kreweras.series")

Scalar = Union[int, Fraction]

X_PART_MODES = ("positive", "negative", "nonnegative", "nonpositive")

_PART_FILTERS: Dict[str, Callable[[int], bool]] = {
    "positive": lambda e: e > 0,
    "negative": lambda e: e < 0,
    "nonnegative": lambda e: e >= 0,
    "nonpositive": lambda e: e <= 0,
}

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


# ============================================================================
# Errors & Rationals
# ============================================================================
class CancellationError(ArithmeticError):
    """Terms that a closed form must cancel survived the expansion."""


class DivisionRemainderError(ArithmeticError):
    """An exact series division left a non-zero remainder."""


def parse_rat(value: Any) -> Fraction:
    """Parse an exact rational given as "a/b", an int or a Fraction. Floats are refused."""
    if isinstance(value, bool):
        raise ValueError(f"Invalid rational {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise ValueError(
            f"Floats are refused for exact parameters, got {value!r}; write it as 'a/b'"
        )
    text = str(value).strip()
    if not _RATIONAL.match(text):
        raise ValueError(f"Invalid rational {value!r}: expected 'a/b'")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ValueError(f"Invalid rational {value!r}: zero denominator")


def format_rat(value: Scalar) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def rational_sqrt(value: Scalar) -> Fraction:
    """Positive square root of a rational that is an exact square."""
    value = Fraction(value)
    if value <= 0:
        raise ValueError(f"{format_rat(value)} has no positive rational square root")
    num_root = math.isqrt(value.numerator)
    den_root = math.isqrt(value.denominator)
    if num_root * num_root != value.numerator or den_root * den_root != value.denominator:
        raise ValueError(
            f"Constant coefficient {format_rat(value)} is not the square of a rational"
        )
    return Fraction(num_root, den_root)


# ============================================================================
# Internal Helpers
# ============================================================================
def _add_into(acc: Dict, terms: Dict, factor: Scalar = 1) -> None:
    for key, coef in terms.items():
        value = acc.get(key, 0) + factor * coef
        if value:
            acc[key] = value
        else:
            acc.pop(key, None)


def _mul_into(acc: Dict[int, Fraction], left: Dict[int, Fraction], right: Dict[int, Fraction]) -> None:
    for e1, c1 in left.items():
        for e2, c2 in right.items():
            e = e1 + e2
            value = acc.get(e, 0) + c1 * c2
            if value:
                acc[e] = value
            else:
                acc.pop(e, None)


def _mul_into_2d(acc: Dict, left: Dict, right: Dict) -> None:
    for (i1, j1), c1 in left.items():
        for (i2, j2), c2 in right.items():
            key = (i1 + i2, j1 + j2)
            value = acc.get(key, 0) + c1 * c2
            if value:
                acc[key] = value
            else:
                acc.pop(key, None)


# ============================================================================
# Laurent polynomials in x
# ============================================================================
class LPoly:
    """Laurent polynomial in x: finite map exponent -> non-zero rational."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[int, Scalar]] = None):
        self.terms: Dict[int, Fraction] = {
            int(e): Fraction(c) for e, c in (terms or {}).items() if c
        }

    @classmethod
    def _from_clean(cls, terms: Dict[int, Fraction]) -> "LPoly":
        poly = object.__new__(cls)
        poly.terms = terms
        return poly

    @classmethod
    def constant(cls, value: Scalar) -> "LPoly":
        return cls({0: value})

    @classmethod
    def monomial(cls, value: Scalar, exponent: int) -> "LPoly":
        return cls({exponent: value})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(e == 0 for e in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get(0, Fraction(0))

    def coeff(self, exponent: int) -> Fraction:
        return self.terms.get(exponent, Fraction(0))

    def min_exp(self) -> Optional[int]:
        return min(self.terms) if self.terms else None

    def max_exp(self) -> Optional[int]:
        return max(self.terms) if self.terms else None

    def scale(self, factor: Scalar) -> "LPoly":
        factor = Fraction(factor)
        if not factor:
            return LPoly()
        return LPoly._from_clean({e: c * factor for e, c in self.terms.items()})

    def shift(self, k: int) -> "LPoly":
        """Multiply by x^k."""
        return LPoly._from_clean({e + k: c for e, c in self.terms.items()})

    def part(self, mode: str) -> "LPoly":
        keep = _PART_FILTERS.get(mode)
        if keep is None:
            raise ValueError(f"Unknown x-part mode {mode!r}; expected one of {X_PART_MODES}")
        return LPoly._from_clean({e: c for e, c in self.terms.items() if keep(e)})

    def evaluate(self, value: Scalar) -> Fraction:
        value = Fraction(value)
        return sum((c * value**e for e, c in self.terms.items()), Fraction(0))

    def exact_div(self, divisor: "LPoly") -> "LPoly":
        """Quotient of an exact Laurent division, lowest terms first."""
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero Laurent polynomial")
        if self.is_zero():
            return LPoly()
        d_low, d_high = divisor.min_exp(), divisor.max_exp()
        lead = divisor.terms[d_low]
        top = self.max_exp() - d_high
        remainder = dict(self.terms)
        quotient: Dict[int, Fraction] = {}
        while remainder:
            low = min(remainder)
            e = low - d_low
            if e > top:
                raise DivisionRemainderError(
                    f"{self} is not divisible by {divisor}: remainder {LPoly._from_clean(remainder)}"
                )
            c = remainder[low] / lead
            quotient[e] = c
            _add_into(remainder, divisor.shift(e).terms, -c)
        return LPoly._from_clean(quotient)

    def __add__(self, other: Any) -> "LPoly":
        other = _as_lpoly(other)
        if other is None:
            return NotImplemented
        acc = dict(self.terms)
        _add_into(acc, other.terms)
        return LPoly._from_clean(acc)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "LPoly":
        other = _as_lpoly(other)
        if other is None:
            return NotImplemented
        acc = dict(self.terms)
        _add_into(acc, other.terms, -1)
        return LPoly._from_clean(acc)

    def __rsub__(self, other: Any) -> "LPoly":
        other = _as_lpoly(other)
        if other is None:
            return NotImplemented
        return other - self

    def __neg__(self) -> "LPoly":
        return LPoly._from_clean({e: -c for e, c in self.terms.items()})

    def __mul__(self, other: Any) -> "LPoly":
        if isinstance(other, LPoly):
            acc: Dict[int, Fraction] = {}
            _mul_into(acc, self.terms, other.terms)
            return LPoly._from_clean(acc)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other: Any) -> bool:
        other = _as_lpoly(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms):
            c = self.terms[e]
            if e == 0:
                parts.append(str(c))
            elif e == 1:
                parts.append(f"{c}*x")
            else:
                parts.append(f"{c}*x^{e}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"LPoly({self})"

    def to_json(self) -> List[List[Any]]:
        return [[[e], format_rat(self.terms[e])] for e in sorted(self.terms)]


def _as_lpoly(value: Any) -> Optional[LPoly]:
    if isinstance(value, LPoly):
        return value
    if isinstance(value, (int, Fraction)):
        return LPoly.constant(value)
    return None


# ============================================================================
# Laurent series in t
# ============================================================================
class TSeries:
    """
    Laurent series in t with Laurent-polynomial coefficients in x.

    coeffs[k] is the coefficient of t^(valuation + k); the series is known
    modulo t^precision where precision = valuation + order. A zero series
    keeps its precision.
    """

    __slots__ = ("valuation", "coeffs")

    def __init__(self, coeffs: Sequence[Union[LPoly, Scalar]] = (), valuation: int = 0):
        layers = [c if isinstance(c, LPoly) else LPoly.constant(c) for c in coeffs]
        precision = valuation + len(layers)
        start = 0
        while start < len(layers) and layers[start].is_zero():
            start += 1
        if start == len(layers):
            base = min(0, precision)
            self.valuation = base
            self.coeffs = [LPoly() for _ in range(precision - base)]
        else:
            self.valuation = valuation + start
            self.coeffs = layers[start:]

    # ---------------------------------------------------------------- builders
    @classmethod
    def zero(cls, precision: int) -> "TSeries":
        return cls((), precision)

    @classmethod
    def from_layers(cls, layers: Dict[int, LPoly], precision: int) -> "TSeries":
        known = {n: p for n, p in layers.items() if n < precision and not p.is_zero()}
        if not known:
            return cls.zero(precision)
        low = min(known)
        return cls([known.get(n, LPoly()) for n in range(low, precision)], low)

    @classmethod
    def from_terms(cls, terms: Dict[Tuple[int, int], Scalar], precision: int) -> "TSeries":
        """Build from {(t_exponent, x_exponent): coefficient}."""
        layers: Dict[int, Dict[int, Fraction]] = {}
        for (n, e), c in terms.items():
            if c:
                bucket = layers.setdefault(n, {})
                _add_into(bucket, {e: Fraction(c)})
        return cls.from_layers({n: LPoly._from_clean(d) for n, d in layers.items()}, precision)

    @classmethod
    def constant(cls, value: Union[LPoly, Scalar], precision: int) -> "TSeries":
        poly = value if isinstance(value, LPoly) else LPoly.constant(value)
        return cls.from_layers({0: poly}, precision)

    @classmethod
    def monomial(cls, value: Scalar, t_exp: int, x_exp: int, precision: int) -> "TSeries":
        return cls.from_terms({(t_exp, x_exp): value}, precision)

    # ---------------------------------------------------------------- queries
    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def precision(self) -> int:
        return self.valuation + len(self.coeffs)

    @property
    def effective_valuation(self) -> int:
        """Valuation used for precision bookkeeping; a zero series counts as O(t^precision)."""
        return self.precision if self.is_zero() else self.valuation

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def coefficient(self, n: int) -> LPoly:
        if n >= self.precision:
            raise IndexError(f"t^{n} lies beyond the known precision t^{self.precision}")
        if n < self.valuation:
            return LPoly()
        return self.coeffs[n - self.valuation]

    def coefficient_at(self, n: int, e: int) -> Fraction:
        return self.coefficient(n).coeff(e)

    def _layer(self, n: int) -> LPoly:
        if n < self.valuation or n >= self.precision:
            return LPoly()
        return self.coeffs[n - self.valuation]

    def layers(self) -> Iterator[Tuple[int, LPoly]]:
        """Known non-zero coefficients as (t_exponent, LPoly)."""
        for k, poly in enumerate(self.coeffs):
            if poly.terms:
                yield self.valuation + k, poly

    def terms(self) -> Iterator[Tuple[int, int, Fraction]]:
        for n, poly in self.layers():
            for e in sorted(poly.terms):
                yield n, e, poly.terms[e]

    def x_exponent_range(self) -> Optional[Tuple[int, int]]:
        exps = [e for poly in self.coeffs for e in poly.terms]
        if not exps:
            return None
        return min(exps), max(exps)

    def x_coefficient(self, k: int) -> "TSeries":
        """[x^k] as a series in t with constant coefficients."""
        return TSeries.from_layers(
            {n: LPoly.constant(poly.coeff(k)) for n, poly in self.layers()}, self.precision
        )

    def agrees_with(self, other: "TSeries", upto: Optional[int] = None) -> bool:
        return first_difference(self, other, upto) is None

    # ---------------------------------------------------------------- transforms
    def truncate(self, precision: int) -> "TSeries":
        if precision >= self.precision:
            return self
        if precision <= self.valuation:
            return TSeries.zero(precision)
        return TSeries(self.coeffs[: precision - self.valuation], self.valuation)

    def _padded(self, precision: int) -> "TSeries":
        # Claims zeros up to t^precision; only for Newton steps that repair them.
        if precision <= self.precision:
            return self.truncate(precision)
        return TSeries(
            list(self.coeffs) + [LPoly() for _ in range(precision - self.precision)],
            self.valuation,
        )

    def shift_t(self, k: int) -> "TSeries":
        """Multiply by t^k."""
        return TSeries(self.coeffs, self.valuation + k)

    def shift_x(self, k: int) -> "TSeries":
        """Multiply by x^k."""
        return TSeries([c.shift(k) for c in self.coeffs], self.valuation)

    def scale(self, factor: Scalar) -> "TSeries":
        factor = Fraction(factor)
        if not factor:
            return TSeries.zero(self.precision)
        return TSeries([c.scale(factor) for c in self.coeffs], self.valuation)

    def mul_lpoly(self, poly: LPoly) -> "TSeries":
        if poly.is_zero():
            return TSeries.zero(self.precision)
        return TSeries([c * poly for c in self.coeffs], self.valuation)

    # ---------------------------------------------------------------- operators
    def __add__(self, other: Any) -> "TSeries":
        other = _coerce(other, self)
        if other is None:
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "TSeries":
        other = _coerce(other, self)
        if other is None:
            return NotImplemented
        return sub(self, other)

    def __rsub__(self, other: Any) -> "TSeries":
        other = _coerce(other, self)
        if other is None:
            return NotImplemented
        return sub(other, self)

    def __neg__(self) -> "TSeries":
        return neg(self)

    def __mul__(self, other: Any) -> "TSeries":
        if isinstance(other, TSeries):
            return mul(self, other)
        if isinstance(other, LPoly):
            return self.mul_lpoly(other)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "TSeries":
        if isinstance(other, TSeries):
            return mul(self, invert(other))
        if isinstance(other, (int, Fraction)):
            return self.scale(1 / Fraction(other))
        return NotImplemented

    def __pow__(self, exponent: int) -> "TSeries":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError(f"Only non-negative integer powers are supported, got {exponent!r}")
        result: Optional[TSeries] = None
        base = self
        while exponent:
            if exponent & 1:
                result = base if result is None else mul(result, base)
            exponent >>= 1
            if exponent:
                base = mul(base, base)
        return result if result is not None else TSeries.constant(1, self.order)

    def __repr__(self) -> str:
        parts = []
        for n, poly in self.layers():
            if len(parts) == 6:
                parts.append("...")
                break
            parts.append(f"({poly})*t^{n}")
        body = " + ".join(parts) if parts else "0"
        return f"TSeries({body} + O(t^{self.precision}))"

    # ---------------------------------------------------------------- json
    def to_json(self) -> Dict[str, Any]:
        return {"valuation": self.valuation, "coeffs": [c.to_json() for c in self.coeffs]}

    @classmethod
    def from_json(cls, document: Dict[str, Any]) -> "TSeries":
        layers = []
        for layer in document["coeffs"]:
            layers.append(LPoly({exps[0]: parse_rat(c) for exps, c in layer}))
        return cls(layers, int(document["valuation"]))


def _coerce(value: Any, like: TSeries) -> Optional[TSeries]:
    # Constants are exact; give them the precision of the series they meet.
    if isinstance(value, TSeries):
        return value
    if isinstance(value, (LPoly, int, Fraction)):
        return TSeries.constant(value, like.precision)
    return None


# ============================================================================
# Series Operations
# ============================================================================
def add(a: TSeries, b: TSeries) -> TSeries:
    precision = min(a.precision, b.precision)
    low = min(a.valuation, b.valuation)
    if low >= precision:
        return TSeries.zero(precision)
    return TSeries([a._layer(n) + b._layer(n) for n in range(low, precision)], low)


def neg(a: TSeries) -> TSeries:
    return TSeries([-c for c in a.coeffs], a.valuation)


def sub(a: TSeries, b: TSeries) -> TSeries:
    return add(a, neg(b))


def mul(a: TSeries, b: TSeries) -> TSeries:
    va, vb = a.effective_valuation, b.effective_valuation
    precision = min(a.precision + vb, b.precision + va)
    if a.is_zero() or b.is_zero():
        return TSeries.zero(precision)
    valuation = va + vb
    size = precision - valuation
    if size <= 0:
        return TSeries.zero(precision)
    acc: List[Dict[int, Fraction]] = [{} for _ in range(size)]
    for i, left in enumerate(a.coeffs[:size]):
        if not left.terms:
            continue
        for j in range(min(len(b.coeffs), size - i)):
            right = b.coeffs[j]
            if right.terms:
                _mul_into(acc[i + j], left.terms, right.terms)
    return TSeries([LPoly._from_clean(d) for d in acc], valuation)


def invert(a: TSeries) -> TSeries:
    """Multiplicative inverse; the leading coefficient must be a non-zero constant in x."""
    if a.is_zero():
        raise ValueError("Cannot invert a series that vanishes on its whole window")
    lead = a.coeffs[0]
    if not lead.is_constant():
        raise ValueError(
            f"Leading coefficient {lead} of t^{a.valuation} depends on x; no x-inversion is performed"
        )
    inv_lead = 1 / lead.constant_term()
    out: List[LPoly] = [LPoly.constant(inv_lead)]
    for k in range(1, a.order):
        acc: Dict[int, Fraction] = {}
        for j in range(1, k + 1):
            a_j = a.coeffs[j]
            if a_j.terms:
                _mul_into(acc, a_j.terms, out[k - j].terms)
        out.append(LPoly._from_clean(acc).scale(-inv_lead))
    return TSeries(out, -a.valuation)


def sqrt(a: TSeries) -> TSeries:
    """Square root with positive leading rational, by Newton iteration b <- (b + a/b)/2."""
    if a.is_zero():
        raise ValueError("Cannot take the square root of a series that vanishes on its window")
    v = a.valuation
    if v % 2:
        raise ValueError(f"t-valuation {v} is odd; square roots in sqrt(t) are not supported")
    lead = a.coeffs[0]
    if not lead.is_constant():
        raise ValueError(f"Leading coefficient {lead} depends on x; it must be a rational square")
    root = TSeries([LPoly.constant(rational_sqrt(lead.constant_term()))], v // 2)
    target_order = a.order
    known = 1
    half = Fraction(1, 2)
    while known < target_order:
        known = min(2 * known, target_order)
        window = a.truncate(v + known)
        root = root._padded(v // 2 + known)
        root = (root + mul(window, invert(root))).scale(half)
    return root.truncate(v // 2 + target_order)


def x_part(a: TSeries, mode: str) -> TSeries:
    """Keep, in every t-coefficient, exactly the x-exponents selected by mode."""
    if mode not in _PART_FILTERS:
        raise ValueError(f"Unknown x-part mode {mode!r}; expected one of {X_PART_MODES}")
    return TSeries([c.part(mode) for c in a.coeffs], a.valuation)


def substitute_monomial(
    a: TSeries,
    c: Scalar,
    k: int,
    x_floor: Optional[int] = None,
    x_ceil: Optional[int] = None,
) -> TSeries:
    """
    Substitute x := c * t^k, leaving a Laurent series in t alone.

    Args:
        a: series to substitute into
        c: non-zero rational factor
        k: power of t
        x_floor: lowest x-exponent the unknown tail of a can carry (k > 0);
                 defaults to the lowest exponent seen in the known part
        x_ceil: highest x-exponent of the unknown tail (k < 0); same default rule

    Returns:
        TSeries with constant coefficients; its precision accounts for how far
        the unknown tail can move down under the substitution.
    """
    c = Fraction(c)
    if not c:
        raise ValueError("x := 0 is not a monomial substitution")
    exp_range = a.x_exponent_range()
    if k > 0:
        floor = x_floor if x_floor is not None else (exp_range[0] if exp_range else 0)
        if exp_range and exp_range[0] < floor:
            raise ValueError(f"x-exponent {exp_range[0]} lies below the declared floor {floor}")
        precision = a.precision + k * floor
    elif k < 0:
        ceil = x_ceil if x_ceil is not None else (exp_range[1] if exp_range else 0)
        if exp_range and exp_range[1] > ceil:
            raise ValueError(f"x-exponent {exp_range[1]} lies above the declared ceiling {ceil}")
        precision = a.precision + k * ceil
    else:
        precision = a.precision

    acc: Dict[int, Fraction] = {}
    lowest: Optional[int] = None
    for n, poly in a.layers():
        for e, coef in poly.terms.items():
            m = n + k * e
            lowest = m if lowest is None else min(lowest, m)
            if m < precision:
                acc[m] = acc.get(m, 0) + coef * c**e
    if lowest is not None and lowest >= precision:
        raise ValueError(
            f"Substituting x := {format_rat(c)}*t^{k} exhausts the reliable window "
            f"(precision t^{precision}); raise the order by at least {lowest - precision + 1}"
        )
    return TSeries.from_terms({(m, 0): value for m, value in acc.items()}, precision)


def solve_valuation_fixed_point(
    update: Callable[[TSeries], TSeries],
    order: int,
    start: Optional[TSeries] = None,
    max_iterations: Optional[int] = None,
) -> TSeries:
    """
    Fixed point of a map that raises the t-valuation of errors at every step.

    The valuation of successive differences must strictly increase; the
    iteration stops once an update leaves the window t^0 ... t^(order-1) unchanged.
    """
    current = (start if start is not None else TSeries.zero(order)).truncate(order)
    limit = max_iterations if max_iterations is not None else 4 * order + 8
    gap: Optional[int] = None
    for step in range(limit):
        following = update(current).truncate(order)
        if following.precision < order:
            raise ValueError(
                f"Update lost precision: t^{following.precision} known, t^{order} required"
            )
        diff = sub(following, current)
        if diff.is_zero():
            logger.debug(f"fixed point settled after {step + 1} updates (order {order})")
            return following
        if gap is not None and diff.valuation <= gap:
            raise ValueError(
                f"Non-contracting update: difference valuation {diff.valuation} after {gap}"
            )
        gap = diff.valuation
        current = following
    raise ValueError(f"Fixed point not reached after {limit} updates")


def compose(a: TSeries, u: TSeries) -> TSeries:
    """Substitute x := u in a series whose coefficients are polynomials in x."""
    if u.effective_valuation < 1:
        raise ValueError("compose needs a substituted series with positive t-valuation")
    exp_range = a.x_exponent_range()
    if exp_range is None:
        return TSeries.zero(a.precision)
    if exp_range[0] < 0:
        raise ValueError("compose needs polynomial coefficients in x")
    result = a.x_coefficient(0)
    power: Optional[TSeries] = None
    for k in range(1, exp_range[1] + 1):
        power = u if power is None else mul(power, u).truncate(a.precision)
        result = add(result, mul(a.x_coefficient(k), power))
    return result


def divide_exact(a: TSeries, b: TSeries) -> TSeries:
    """
    Exact quotient a / b, solved layer by layer in t.

    The leading coefficient of b may be any non-zero Laurent polynomial; each
    layer must divide exactly or DivisionRemainderError is raised.
    """
    if b.is_zero():
        raise ZeroDivisionError("division by a series that vanishes on its window")
    vb = b.valuation
    if a.is_zero():
        return TSeries.zero(a.precision - vb)
    va = a.valuation
    size = min(a.order, b.order)
    lead = b.coeffs[0]
    quotient: List[LPoly] = []
    for k in range(size):
        acc = dict(a.coeffs[k].terms)
        for j in range(1, k + 1):
            b_j = b.coeffs[j]
            if b_j.terms and quotient[k - j].terms:
                neg_acc: Dict[int, Fraction] = {}
                _mul_into(neg_acc, b_j.terms, quotient[k - j].terms)
                _add_into(acc, neg_acc, -1)
        try:
            quotient.append(LPoly._from_clean(acc).exact_div(lead))
        except DivisionRemainderError as e:
            raise DivisionRemainderError(f"layer t^{va - vb + k}: {e}") from e
    return TSeries(quotient, va - vb)


def complete_homogeneous(e1: TSeries, e2: TSeries, count: int) -> List[TSeries]:
    """h_0 ... h_count of two roots with elementary symmetric functions e1, e2."""
    one = TSeries.constant(1, max(e1.precision, e2.precision))
    out = [one, e1]
    for _ in range(2, count + 1):
        out.append(sub(mul(e1, out[-1]), mul(e2, out[-2])))
    return out[: count + 1]


def symmetric_power_sums(e1: TSeries, e2: TSeries, count: int) -> List[TSeries]:
    """p_0 ... p_count (p_k = Y0^k + Y1^k) from e1, e2."""
    two = TSeries.constant(2, max(e1.precision, e2.precision))
    out = [two, e1]
    for _ in range(2, count + 1):
        out.append(sub(mul(e1, out[-1]), mul(e2, out[-2])))
    return out[: count + 1]


def first_difference(
    a: TSeries, b: TSeries, upto: Optional[int] = None
) -> Optional[Tuple[int, int]]:
    """First (t-exponent, x-exponent) where a and b differ below min(upto, common precision)."""
    limit = min(a.precision, b.precision)
    if upto is not None:
        limit = min(limit, upto)
    for n in range(min(a.valuation, b.valuation), limit):
        left, right = a._layer(n), b._layer(n)
        if left.terms != right.terms:
            return n, min((left - right).terms)
    return None


def diagonal(b: "BSeries") -> TSeries:
    """Sum over i, n of [x^i y^i t^n]b x^i t^n."""
    terms = {}
    for n, layer in enumerate(b.coeffs):
        for (i, j), c in layer.items():
            if i == j:
                terms[(n, i)] = c
    return TSeries.from_terms(terms, b.precision)


# ============================================================================
# Bivariate series
# ============================================================================
class BSeries:
    """Power series in t; layer n maps (i, j) to the coefficient of x^i y^j t^n."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[Dict[Tuple[int, int], Scalar]] = ()):
        self.coeffs: List[Dict[Tuple[int, int], Fraction]] = [
            {(int(i), int(j)): Fraction(c) for (i, j), c in layer.items() if c}
            for layer in coeffs
        ]

    @classmethod
    def _from_clean(cls, coeffs: List[Dict[Tuple[int, int], Fraction]]) -> "BSeries":
        series = object.__new__(cls)
        series.coeffs = coeffs
        return series

    @classmethod
    def zero(cls, order: int) -> "BSeries":
        return cls._from_clean([{} for _ in range(order)])

    @classmethod
    def from_terms(cls, terms: Dict[Tuple[int, int, int], Scalar], order: int) -> "BSeries":
        """Build from {(i, j, n): coefficient}; terms at t^order and beyond are dropped."""
        layers: List[Dict[Tuple[int, int], Fraction]] = [{} for _ in range(order)]
        for (i, j, n), c in terms.items():
            if 0 <= n < order and c:
                _add_into(layers[n], {(i, j): Fraction(c)})
        return cls._from_clean(layers)

    @classmethod
    def from_tseries(cls, series: TSeries, variable: str = "x") -> "BSeries":
        """Embed a power series in t with coefficients in x as a series in x (or in y)."""
        if series.effective_valuation < 0:
            raise ValueError("BSeries holds power series in t only")
        if variable not in ("x", "y"):
            raise ValueError(f"variable must be 'x' or 'y', got {variable!r}")
        layers: List[Dict[Tuple[int, int], Fraction]] = [{} for _ in range(max(series.precision, 0))]
        for n, poly in series.layers():
            for e, c in poly.terms.items():
                key = (e, 0) if variable == "x" else (0, e)
                layers[n][key] = c
        return cls._from_clean(layers)

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def precision(self) -> int:
        return len(self.coeffs)

    @property
    def valuation(self) -> int:
        for n, layer in enumerate(self.coeffs):
            if layer:
                return n
        return self.order

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def coefficient(self, i: int, j: int, n: int) -> Fraction:
        if n >= self.order:
            raise IndexError(f"t^{n} lies beyond the known order {self.order}")
        if n < 0:
            return Fraction(0)
        return self.coeffs[n].get((i, j), Fraction(0))

    def total(self, n: int) -> Fraction:
        """[t^n] of the series at x = y = 1."""
        return sum(self.coeffs[n].values(), Fraction(0))

    def truncate(self, order: int) -> "BSeries":
        return BSeries._from_clean(self.coeffs[:order])

    def shift_t(self, k: int) -> "BSeries":
        if k < 0:
            raise ValueError("BSeries holds power series in t only")
        return BSeries._from_clean([{} for _ in range(k)] + [dict(layer) for layer in self.coeffs])

    def scale(self, factor: Scalar) -> "BSeries":
        factor = Fraction(factor)
        if not factor:
            return BSeries.zero(self.order)
        return BSeries._from_clean(
            [{key: c * factor for key, c in layer.items()} for layer in self.coeffs]
        )

    def swap(self) -> "BSeries":
        """Exchange x and y."""
        return BSeries._from_clean(
            [{(j, i): c for (i, j), c in layer.items()} for layer in self.coeffs]
        )

    def scale_vars(self, a: Scalar, b: Scalar) -> "BSeries":
        """Substitute x := a*x, y := b*y."""
        a, b = Fraction(a), Fraction(b)
        return BSeries._from_clean(
            [
                {(i, j): c * a**i * b**j for (i, j), c in layer.items()}
                for layer in self.coeffs
            ]
        )

    def row(self, j: int) -> TSeries:
        """[y^j] as a TSeries in x."""
        return TSeries.from_terms(
            {(n, i): c for n, layer in enumerate(self.coeffs) for (i, jj), c in layer.items() if jj == j},
            self.order,
        )

    def column(self, i: int) -> TSeries:
        """[x^i] as a TSeries whose formal variable stands for y."""
        return TSeries.from_terms(
            {(n, j): c for n, layer in enumerate(self.coeffs) for (ii, j), c in layer.items() if ii == i},
            self.order,
        )

    def restrict_x0(self) -> "BSeries":
        """F(0, y): only the terms with no x."""
        return BSeries._from_clean(
            [{k: c for k, c in layer.items() if k[0] == 0} for layer in self.coeffs]
        )

    def restrict_y0(self) -> "BSeries":
        """F(x, 0): only the terms with no y."""
        return BSeries._from_clean(
            [{k: c for k, c in layer.items() if k[1] == 0} for layer in self.coeffs]
        )

    def __add__(self, other: Any) -> "BSeries":
        if not isinstance(other, BSeries):
            return NotImplemented
        order = min(self.order, other.order)
        layers = []
        for n in range(order):
            acc = dict(self.coeffs[n])
            _add_into(acc, other.coeffs[n])
            layers.append(acc)
        return BSeries._from_clean(layers)

    def __neg__(self) -> "BSeries":
        return self.scale(-1)

    def __sub__(self, other: Any) -> "BSeries":
        if not isinstance(other, BSeries):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: Any) -> "BSeries":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, BSeries):
            return NotImplemented
        va, vb = self.valuation, other.valuation
        order = min(self.order + vb, other.order + va)
        acc: List[Dict[Tuple[int, int], Fraction]] = [{} for _ in range(order)]
        for n1 in range(va, min(self.order, order)):
            left = self.coeffs[n1]
            if not left:
                continue
            for n2 in range(vb, min(other.order, order - n1)):
                right = other.coeffs[n2]
                if right:
                    _mul_into_2d(acc[n1 + n2], left, right)
        return BSeries._from_clean(acc)

    __rmul__ = __mul__

    def first_difference(
        self, other: "BSeries", upto: Optional[int] = None
    ) -> Optional[Tuple[int, int, int]]:
        """First (i, j, n) where the two series differ below min(upto, common order)."""
        limit = min(self.order, other.order)
        if upto is not None:
            limit = min(limit, upto)
        for n in range(limit):
            left, right = self.coeffs[n], other.coeffs[n]
            if left != right:
                keys = sorted(set(left) | set(right))
                for key in keys:
                    if left.get(key, 0) != right.get(key, 0):
                        return key[0], key[1], n
        return None

    def __repr__(self) -> str:
        count = sum(len(layer) for layer in self.coeffs)
        return f"BSeries({count} terms + O(t^{self.order}))"

    def to_json(self) -> Dict[str, Any]:
        return {
            "valuation": 0,
            "coeffs": [
                [[[i, j], format_rat(layer[(i, j)])] for (i, j) in sorted(layer)]
                for layer in self.coeffs
            ],
        }

    @classmethod
    def from_json(cls, document: Dict[str, Any]) -> "BSeries":
        shift = int(document.get("valuation", 0))
        layers: List[Dict[Tuple[int, int], Fraction]] = [{} for _ in range(shift)]
        for layer in document["coeffs"]:
            layers.append({(exps[0], exps[1]): parse_rat(c) for exps, c in layer})
        return cls._from_clean(layers)
