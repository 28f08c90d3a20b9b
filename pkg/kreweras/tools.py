"""
Tool functions behind the command line: each takes plain arguments,
runs one computation or verification group and returns a JSON report.
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional

import mpmath as mp

from kreweras.config import (
    DEFAULT_MAX_I,
    DEFAULT_TAIL_I,
    get_default_law_order,
    get_default_order,
    get_default_precision,
)
from kreweras.counting import q_x0_closed, verify_counting
from kreweras.kernel import verify_kernel as _verify_kernel
from kreweras.law import (
    d_x0_closed,
    law_dp,
    p00_closed_general,
    p00_from_table,
    s_x0_closed,
    verify_law as _verify_law,
)
from kreweras.schemas import (
    ChainParams,
    CheckResult,
    KernelParams,
    Report,
    flag_check,
    series_check,
)
from kreweras.series import format_rat
from kreweras.stationary import (
    asymptotics_check,
    axis_probabilities,
    p00_closed,
    solve_w,
    verify_stationary as _verify_stationary,
)
from kreweras.walks import build_walk_table, kreweras_count

logger = logging.getLogger("Kreweras.tools")

# Parameter triples exercised by the summary report, one per tail regime.
REPORT_TRIPLES = (("1/3", "1/2", "1/6"), ("2/5", "2/5", "1/5"), ("1/2", "1/3", "1/6"))


# ============================================================================
# Internal Helpers
# ============================================================================
def _json(data: Any) -> str:
    """Convert to a deterministic JSON string"""
    return json.dumps(data, ensure_ascii=False, sort_keys=True)


def _document(report: Report) -> str:
    return _json(report.to_document())


def _chain(p: Any, q: Any, r: Any) -> ChainParams:
    return ChainParams(p=p, q=q, r=r)


def _table(columns: List[str], rows: List[List[Any]]) -> Dict[str, Any]:
    return {"columns": columns, "rows": rows}


# ============================================================================
# TOOL FUNCTIONS
# ============================================================================
def count(order: int = None, max_i: int = DEFAULT_MAX_I) -> str:
    """Walk counts from the oracle next to the closed Q(x,0)."""
    order = order or get_default_order()
    table = build_walk_table(order)
    qx0 = q_x0_closed(order + 1)
    report = Report(command="count", params={"order": str(order), "max_i": str(max_i)})
    rows = [
        [n, i, j, value]
        for n in range(order + 1)
        for (i, j), value in sorted(table.slice(n).items())
        if i <= max_i and j <= max_i
    ]
    report.data.update(
        {
            "a_3n": {str(3 * n): kreweras_count(n) for n in range(order // 3 + 1)},
            "Qx0": qx0.to_json(),
            "walks": {str(n): table.row_total(n) for n in range(order + 1)},
            "table": _table(["n", "i", "j", "count"], rows),
        }
    )
    return _document(report)


def verify_count(order: int = None, max_i: int = DEFAULT_MAX_I) -> str:
    return _document(verify_counting(order or get_default_order(), max_i))


def verify_kernel(order: int = None, rho: str = "1") -> str:
    return _document(_verify_kernel(KernelParams(rho=rho, order=order or get_default_order())))


def stationary(p: str, q: str, r: str, precision: int = None, max_i: int = DEFAULT_MAX_I, i_max: int = DEFAULT_TAIL_I) -> str:
    """w, p00, the axis probabilities and the tail fit for one ergodic triple."""
    params = _chain(p, q, r)
    bits = precision or get_default_precision()
    report = Report(command="stationary", params=params.as_strings())
    report.merge(asymptotics_check(params, i_max, bits), "tail: ")
    with mp.workprec(bits):
        w = solve_w(params, bits).w
        p00 = p00_closed(params, bits)
        p_i0, p_0j = axis_probabilities(params, max_i, bits)
        report.data.update(
            {
                "w": mp.nstr(w, 30),
                "p00": mp.nstr(p00, 30),
                "table": _table(
                    ["i", "p_i0", "p_0i"],
                    [[i, mp.nstr(p_i0[i], 20), mp.nstr(p_0j[i], 20)] for i in range(max_i + 1)],
                ),
            }
        )
    return _document(report)


def verify_stationary(p: str, q: str, r: str, grid: int = None, tol: float = None, precision: int = None) -> str:
    return _document(_verify_stationary(_chain(p, q, r), grid, tol, precision))


def asymptotics(p: str, q: str, r: str, i_max: int = DEFAULT_TAIL_I, precision: int = None) -> str:
    return _document(asymptotics_check(_chain(p, q, r), i_max, precision))


def law(p: str, q: str, r: str, order: int = None) -> str:
    """Closed P00, S(x,0), D(x,0) next to the exact law p_{0,0}(n)."""
    params = _chain(p, q, r)
    order = order or get_default_law_order()
    table = law_dp(params, order - 1)
    p00 = p00_closed_general(params, order)
    oracle = p00_from_table(table)
    report = Report(command="law", params={**params.as_strings(), "order": str(order)})
    report.add(series_check("P00 closed = oracle", p00, oracle, order))
    report.data.update(
        {
            "ergodic": params.ergodic,
            "P00": p00.to_json(),
            "Sx0": s_x0_closed(params, order).to_json(),
            "Dx0": d_x0_closed(params, order).to_json(),
            "table": _table(
                ["n", "p00_closed", "p00_oracle"],
                [
                    [n, format_rat(p00.coefficient_at(n, 0)), format_rat(oracle.coefficient_at(n, 0))]
                    for n in range(order)
                ],
            ),
        }
    )
    return _document(report)


def verify_law(p: str, q: str, r: str, order: int = None) -> str:
    return _document(_verify_law(_chain(p, q, r), order))


def _report_groups(order: Optional[int], law_order: Optional[int], precision: Optional[int]) -> List[Dict[str, Any]]:
    groups: List[Dict[str, Any]] = [
        {"name": "verify_count", "args": {"order": order}},
        {"name": "verify_kernel", "args": {"order": order}},
    ]
    for p, q, r in REPORT_TRIPLES[:2]:
        groups.append({"name": "verify_stationary", "args": {"p": p, "q": q, "r": r, "precision": precision}})
    for p, q, r in REPORT_TRIPLES:
        groups.append({"name": "asymptotics", "args": {"p": p, "q": q, "r": r, "precision": precision}})
    for p, q, r in REPORT_TRIPLES[:2]:
        groups.append({"name": "verify_law", "args": {"p": p, "q": q, "r": r, "order": law_order}})
    return groups


def _run_group(group: Dict[str, Any]) -> Dict[str, Any]:
    return json.loads(execute_tool(group["name"], group["args"]))


def report(order: int = None, law_order: int = None, precision: int = None, jobs: int = 1) -> str:
    """Every verification group in one summary; groups run in a process pool when jobs > 1."""
    groups = _report_groups(order, law_order, precision)
    logger.info(f"🔧 running {len(groups)} report groups with {jobs} job(s)")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            documents = list(pool.map(_run_group, groups))
    else:
        documents = [_run_group(group) for group in groups]

    summary = Report(command="report", params={"jobs": str(jobs)})
    groups_data = []
    for group, document in zip(groups, documents):
        label = group["name"] + "".join(
            f" {key}={value}" for key, value in sorted(group["args"].items()) if value is not None
        )
        if "error" in document:
            summary.add(_error_check(label, document["error"]))
            groups_data.append({"group": label, "passed": False, "error": document["error"]})
            continue
        checks = document["checks"]
        for check in checks:
            summary.add(_check_from(label, check))
        passed = sum(1 for check in checks if check["passed"])
        groups_data.append({"group": label, "passed": document["passed"], "checks": len(checks), "checks_passed": passed})
    summary.data["groups"] = groups_data
    return _document(summary)


def _error_check(label: str, message: str) -> CheckResult:
    return flag_check(f"{label}: runs", False, message)


def _check_from(label: str, check: Dict[str, Any]) -> CheckResult:
    return CheckResult(
        name=f"{label}: {check['name']}",
        passed=check["passed"],
        detail=check.get("detail", ""),
        first_mismatch=check.get("first_mismatch"),
        value=check.get("value"),
    )


# ============================================================================
# TOOL REGISTRY & SCHEMAS
# ============================================================================
TOOL_REGISTRY = {
    "count": count,
    "verify_count": verify_count,
    "verify_kernel": verify_kernel,
    "stationary": stationary,
    "verify_stationary": verify_stationary,
    "asymptotics": asymptotics,
    "law": law,
    "verify_law": verify_law,
    "report": report,
}


def execute_tool(name: str, args: Dict[str, Any]) -> str:
    """Execute a tool by name with given arguments"""
    func = TOOL_REGISTRY.get(name)
    if not func:
        return _json({"error": f"Unknown tool: {name}"})
    try:
        return func(**args)
    except Exception as e:
        logger.error(f"⚠️ {name} failed: {e}")
        return _json({"error": str(e)})


tools_schema = {
    "count": {"order": "integer (optional)", "max_i": "integer (optional)"},
    "verify_count": {"order": "integer (optional)", "max_i": "integer (optional)"},
    "verify_kernel": {"order": "integer (optional)", "rho": "rational a/b (optional)"},
    "stationary": {
        "p": "rational a/b (required)",
        "q": "rational a/b (required)",
        "r": "rational a/b (required)",
        "precision": "integer bits (optional)",
        "max_i": "integer (optional)",
        "i_max": "integer (optional)",
    },
    "verify_stationary": {
        "p": "rational a/b (required)",
        "q": "rational a/b (required)",
        "r": "rational a/b (required)",
        "grid": "integer (optional)",
        "tol": "number (optional)",
        "precision": "integer bits (optional)",
    },
    "asymptotics": {
        "p": "rational a/b (required)",
        "q": "rational a/b (required)",
        "r": "rational a/b (required)",
        "i_max": "integer (optional)",
        "precision": "integer bits (optional)",
    },
    "law": {
        "p": "rational a/b (required)",
        "q": "rational a/b (required)",
        "r": "rational a/b (required)",
        "order": "integer (optional)",
    },
    "verify_law": {
        "p": "rational a/b (required)",
        "q": "rational a/b (required)",
        "r": "rational a/b (required)",
        "order": "integer (optional)",
    },
    "report": {
        "order": "integer (optional)",
        "law_order": "integer (optional)",
        "precision": "integer bits (optional)",
        "jobs": "integer (optional)",
    },
}
