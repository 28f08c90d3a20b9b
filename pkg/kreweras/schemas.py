"""
Pydantic schemas for parameters, run configuration, computed bundles and verification reports.
"""

import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    computed_field,
    field_serializer,
    field_validator,
    model_validator,
)

from kreweras.config import DEFAULT_MAX_I, DEFAULT_TAIL_I, DEFAULT_TOL, get_default_order
from kreweras.series import BSeries, TSeries, first_difference, format_rat, parse_rat

logger = logging.getLogger("Kreweras.schemas")

COMMANDS = (
    "count",
    "verify-count",
    "verify-kernel",
    "stationary",
    "verify-stationary",
    "law",
    "verify-law",
    "asymptotics",
    "report",
)
PROBABILISTIC_COMMANDS = {"stationary", "verify-stationary", "law", "verify-law", "asymptotics"}


# ============================================================================
# Parameters
# ============================================================================


class KernelParams(BaseModel):
    """Kernel xy - t(x + y + rho*x^2*y^2) truncated at a fixed order."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    rho: Fraction = Field(
        Fraction(1), description="Kernel weight: 1 for walk counting, pqr for the chain law"
    )
    order: int = Field(
        default_factory=get_default_order, ge=1, description="Number of retained t-coefficients"
    )

    @field_validator("rho", mode="before")
    @classmethod
    def _parse_rho(cls, value: Any) -> Fraction:
        rho = parse_rat(value)
        if rho <= 0:
            raise ValueError(f"rho must be positive, got {format_rat(rho)}")
        return rho

    @field_serializer("rho")
    def _dump_rho(self, value: Fraction) -> str:
        return format_rat(value)


class ChainParams(BaseModel):
    """Step probabilities of the reflected Kreweras chain (West p, South q, North-East r)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p: Fraction = Field(..., description="Probability of a West step")
    q: Fraction = Field(..., description="Probability of a South step")
    r: Fraction = Field(..., description="Probability of a North-East step")

    @field_validator("p", "q", "r", mode="before")
    @classmethod
    def _parse(cls, value: Any) -> Fraction:
        value = parse_rat(value)
        if value <= 0:
            raise ValueError(f"step probabilities must be positive, got {format_rat(value)}")
        return value

    @model_validator(mode="after")
    def _stochastic(self) -> "ChainParams":
        total = self.p + self.q + self.r
        if total != 1:
            raise ValueError(f"p + q + r must equal 1, got {format_rat(total)}")
        return self

    @field_serializer("p", "q", "r")
    def _dump(self, value: Fraction) -> str:
        return format_rat(value)

    @property
    def rho(self) -> Fraction:
        return self.p * self.q * self.r

    @property
    def p_prime(self) -> Fraction:
        return self.p / (self.p + self.r)

    @property
    def r_prime(self) -> Fraction:
        return self.r / (self.p + self.r)

    @property
    def q_second(self) -> Fraction:
        return self.q / (self.q + self.r)

    @property
    def r_second(self) -> Fraction:
        return self.r / (self.q + self.r)

    @property
    def ergodic(self) -> bool:
        return self.r < min(self.p, self.q)

    def swapped(self) -> "ChainParams":
        """The chain seen after exchanging the two axes."""
        return ChainParams(p=self.q, q=self.p, r=self.r)

    def as_strings(self) -> Dict[str, str]:
        return {"p": format_rat(self.p), "q": format_rat(self.q), "r": format_rat(self.r)}


class RunConfig(BaseModel):
    """One CLI invocation."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    command: Literal[COMMANDS] = Field(..., description="Subcommand to run")
    order: Optional[int] = Field(None, ge=1, description="Truncation order (t-coefficients)")
    law_order: Optional[int] = Field(None, ge=1, description="Truncation order of the law groups in report")
    max_i: int = Field(DEFAULT_MAX_I, ge=0, description="Largest x-exponent in count tables")
    i_max: int = Field(DEFAULT_TAIL_I, ge=40, description="Coefficients used by the tail fit")
    grid: Optional[int] = Field(None, ge=50, description="Power-iteration grid side")
    precision: Optional[int] = Field(None, ge=64, description="mpmath working precision in bits")
    tol: float = Field(DEFAULT_TOL, gt=0, description="Power-iteration residual tolerance")
    p: Optional[Fraction] = Field(None, description="West step probability, 'a/b'")
    q: Optional[Fraction] = Field(None, description="South step probability, 'a/b'")
    r: Optional[Fraction] = Field(None, description="North-East step probability, 'a/b'")
    rho: Fraction = Field(Fraction(1), description="Kernel weight for verify-kernel, 'a/b'")
    output_format: Literal["json", "csv", "text"] = Field("json", description="Output format")
    output: Optional[Path] = Field(None, description="Write output here instead of stdout")
    jobs: int = Field(1, ge=1, description="Worker processes for the report groups")
    quiet: bool = Field(False, description="Only log warnings")

    @field_validator("p", "q", "r", "rho", mode="before")
    @classmethod
    def _parse(cls, value: Any) -> Optional[Fraction]:
        if value is None:
            return None
        return parse_rat(value)

    @model_validator(mode="after")
    def _check_probabilities(self) -> "RunConfig":
        if self.command not in PROBABILISTIC_COMMANDS:
            return self
        missing = [name for name in ("p", "q", "r") if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.command} needs --{' --'.join(missing)}")
        self.chain()
        return self

    def chain(self) -> Optional[ChainParams]:
        if self.p is None or self.q is None or self.r is None:
            return None
        return ChainParams(p=self.p, q=self.q, r=self.r)


# ============================================================================
# Reports
# ============================================================================


class CheckResult(BaseModel):
    """Outcome of one identity or comparison."""

    name: str = Field(..., description="What was checked")
    passed: bool
    detail: str = Field("", description="Short human-readable outcome")
    first_mismatch: Optional[str] = Field(
        None, description="First offending monomial, e.g. 'x^2 y^0 t^7'"
    )
    value: Optional[float] = Field(None, description="Residual or gap when numeric")


class Report(BaseModel):
    """Versioned verification report."""

    schema_version: int = Field(1, serialization_alias="schema")
    command: str
    params: Dict[str, str] = Field(default_factory=dict)
    checks: List[CheckResult] = Field(default_factory=list)
    data: Dict[str, Any] = Field(default_factory=dict)

    @computed_field
    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        if check.passed:
            logger.debug(f"✅ {check.name}: {check.detail}")
        else:
            logger.warning(f"⚠️ {check.name}: {check.detail} {check.first_mismatch or ''}")
        return check

    def merge(self, other: "Report", prefix: str = "") -> None:
        for check in other.checks:
            self.add(check.model_copy(update={"name": f"{prefix}{check.name}"}))

    def to_document(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


def series_check(name: str, actual: TSeries, expected: TSeries, upto: int) -> CheckResult:
    """Exact equality of two series below t^upto."""
    known = min(actual.precision, expected.precision)
    if known < upto:
        return CheckResult(
            name=name, passed=False, detail=f"only t^{known} known, t^{upto} requested"
        )
    diff = first_difference(actual, expected, upto)
    if diff is None:
        return CheckResult(name=name, passed=True, detail=f"equal below t^{upto}")
    n, e = diff
    return CheckResult(
        name=name,
        passed=False,
        detail=f"{actual.coefficient_at(n, e)} != {expected.coefficient_at(n, e)}",
        first_mismatch=f"x^{e} t^{n}",
    )


def zero_check(name: str, series: TSeries, upto: int) -> CheckResult:
    return series_check(name, series, TSeries.zero(upto), upto)


def bseries_check(name: str, actual: BSeries, expected: BSeries, upto: int) -> CheckResult:
    known = min(actual.order, expected.order)
    if known < upto:
        return CheckResult(
            name=name, passed=False, detail=f"only t^{known} known, t^{upto} requested"
        )
    diff = actual.first_difference(expected, upto)
    if diff is None:
        return CheckResult(name=name, passed=True, detail=f"equal below t^{upto}")
    i, j, n = diff
    return CheckResult(
        name=name,
        passed=False,
        detail=f"{actual.coefficient(i, j, n)} != {expected.coefficient(i, j, n)}",
        first_mismatch=f"x^{i} y^{j} t^{n}",
    )


def value_check(name: str, actual: Any, expected: Any, tol: float) -> CheckResult:
    """|actual - expected| <= tol for floats or mpmath numbers."""
    gap = float(abs(actual - expected))
    return CheckResult(
        name=name,
        passed=gap <= tol,
        detail=f"gap {gap:.3e} (tol {tol:.0e})",
        value=gap,
    )


def flag_check(name: str, passed: bool, detail: str = "", value: Optional[float] = None) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail, value=value)


# ============================================================================
# Computed Bundles
# ============================================================================


class KernelData(BaseModel):
    """Root, symmetric functions and canonical factorization of one kernel."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    params: KernelParams
    Y0: TSeries = Field(..., description="Power-series root of the kernel in y")
    e1: TSeries = Field(..., description="Y0 + Y1")
    e2: TSeries = Field(..., description="Y0 * Y1")
    Delta: TSeries = Field(..., description="Discriminant in y")
    Z: TSeries
    W: TSeries
    X2: TSeries = Field(..., description="Laurent root 1/(4 rho t^2 Z^2)")
    Delta0: TSeries
    DeltaPlus: TSeries
    DeltaMinus: TSeries


class CountingBundle(BaseModel):
    """Walk-counting series."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    Qfull: BSeries = Field(..., description="Complete generating function Q(x,y;t)")
    Qx0: TSeries = Field(..., description="Walks ending on the x-axis")
    Qdiag: TSeries = Field(..., description="Walks ending on the diagonal")
    W: TSeries


class SDPair(BaseModel):
    """Symmetric and antisymmetric combinations of the chain law series."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    S: BSeries
    D: BSeries
    Sx0: TSeries
    Dx0: TSeries
    T: TSeries = Field(..., description="x * S(x,0)")
    E: TSeries = Field(..., description="x * D(x,0)")


class BCDecomposition(BaseModel):
    """B(x) and its split into C+ (x^3 and up) and C- (in 1/x)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    B: TSeries
    Cplus: TSeries
    Cminus: TSeries
    Cminus_at_p_over_t: TSeries
    Cminus_at_q_over_t: TSeries


class RootW(BaseModel):
    """Smallest positive root of pqr*w^3 - w + 2."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    w: Any = Field(..., description="mpmath mpf value")
    precision: int = Field(..., description="Working precision in bits")


class StationaryEstimate(BaseModel):
    """Power-iteration estimate of the stationary distribution on a truncated grid."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    grid: Any = Field(..., description="numpy array, grid[i, j] = p_{i,j}")
    residual: float = Field(..., description="L1 norm of T(pi) - pi")
    mass: float = Field(..., description="Mass kept on the grid by one more step")
    iterations: int
