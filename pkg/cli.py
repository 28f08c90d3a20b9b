"""
Command-line entry point for the Kreweras toolkit.

    python cli.py verify-count --order 18
    python cli.py stationary --p 1/3 --q 1/2 --r 1/6
    python cli.py verify-law --p 1/6 --q 1/3 --r 1/2 --order 15

Exit status: 0 when every check passed, 1 when a check failed, 2 on a usage
or computation error.
"""

import argparse
import csv
import io
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from kreweras.schemas import COMMANDS, RunConfig
from kreweras.series import format_rat
from kreweras.tools import execute_tool

logger = logging.getLogger("Kreweras.cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


# ============================================================================
# Argument Parsing
# ============================================================================
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kreweras",
        description="Exact verification of Kreweras walk generating functions and the reflected chain.",
    )
    parser.add_argument("command", choices=COMMANDS, help="What to run")
    parser.add_argument("--order", type=int, help="Truncation order in t (env KREWERAS_ORDER / KREWERAS_LAW_ORDER)")
    parser.add_argument("--law-order", type=int, dest="law_order", help="Law order for the report (env KREWERAS_LAW_ORDER)")
    parser.add_argument("--max-i", type=int, dest="max_i", help="Largest axis index in tables")
    parser.add_argument("--i-max", type=int, dest="i_max", help="Coefficients used by the tail fit")
    parser.add_argument("--p", help="West step probability as a/b")
    parser.add_argument("--q", help="South step probability as a/b")
    parser.add_argument("--r", help="North-East step probability as a/b")
    parser.add_argument("--rho", help="Kernel weight for verify-kernel as a/b")
    parser.add_argument("--grid", type=int, help="Power-iteration grid side (env KREWERAS_GRID)")
    parser.add_argument("--prec", type=int, dest="precision", help="mpmath precision in bits (env KREWERAS_PRECISION)")
    parser.add_argument("--tol", type=float, help="Power-iteration residual tolerance")
    parser.add_argument("--format", dest="output_format", choices=("json", "csv", "text"), default="json")
    parser.add_argument("--output", help="Write the report to this file")
    parser.add_argument("--jobs", type=int, help="Worker processes for the report groups")
    parser.add_argument("--quiet", action="store_true", help="Only log warnings")
    return parser


def parse_config(argv: Optional[List[str]] = None) -> RunConfig:
    """
    Parse arguments into a validated RunConfig.

    Raises:
        ValueError: on invalid rationals, non-stochastic triples or bad sizes
    """
    namespace = build_parser().parse_args(argv)
    fields = {key: value for key, value in vars(namespace).items() if value is not None}
    try:
        return RunConfig(**fields)
    except ValidationError as e:
        messages = "; ".join(
            f"{'.'.join(str(part) for part in error['loc']) or 'config'}: {error['msg']}" for error in e.errors()
        )
        raise ValueError(messages) from None


def tool_call(config: RunConfig) -> Tuple[str, Dict[str, Any]]:
    """Map a RunConfig onto a tool name and its arguments."""
    chain = {}
    if config.command in ("stationary", "verify-stationary", "law", "verify-law", "asymptotics"):
        chain = {"p": format_rat(config.p), "q": format_rat(config.q), "r": format_rat(config.r)}

    if config.command in ("count", "verify-count"):
        args = {"order": config.order, "max_i": config.max_i}
    elif config.command == "verify-kernel":
        args = {"order": config.order, "rho": format_rat(config.rho)}
    elif config.command == "stationary":
        args = {**chain, "precision": config.precision, "max_i": config.max_i, "i_max": config.i_max}
    elif config.command == "verify-stationary":
        args = {**chain, "grid": config.grid, "tol": config.tol, "precision": config.precision}
    elif config.command == "asymptotics":
        args = {**chain, "i_max": config.i_max, "precision": config.precision}
    elif config.command in ("law", "verify-law"):
        args = {**chain, "order": config.order}
    else:
        args = {"order": config.order, "law_order": config.law_order, "precision": config.precision, "jobs": config.jobs}
    return config.command.replace("-", "_"), args


# ============================================================================
# Rendering
# ============================================================================
def render(document: Dict[str, Any], output_format: str) -> str:
    if output_format == "json":
        return json.dumps(document, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
    if output_format == "csv":
        return _render_csv(document)
    return _render_text(document)


def _render_csv(document: Dict[str, Any]) -> str:
    stream = io.StringIO()
    writer = csv.writer(stream, lineterminator="\n")
    if "error" in document:
        writer.writerow(["error"])
        writer.writerow([document["error"]])
        return stream.getvalue()
    table = document.get("data", {}).get("table")
    if table:
        writer.writerow(table["columns"])
        writer.writerows(table["rows"])
    else:
        writer.writerow(["name", "passed", "detail", "first_mismatch"])
        for check in document.get("checks", []):
            writer.writerow([check["name"], check["passed"], check["detail"], check.get("first_mismatch") or ""])
    return stream.getvalue()


def _render_text(document: Dict[str, Any]) -> str:
    if "error" in document:
        return f"⚠️ error: {document['error']}\n"
    params = " ".join(f"{key}={value}" for key, value in sorted(document.get("params", {}).items()))
    lines = [f"{document['command']} {params}".rstrip()]
    for check in document.get("checks", []):
        mark = "✅" if check["passed"] else "⚠️"
        where = f" at {check['first_mismatch']}" if check.get("first_mismatch") else ""
        lines.append(f"  {mark} {check['name']}: {check['detail']}{where}")
    total = len(document.get("checks", []))
    passed = sum(1 for check in document.get("checks", []) if check["passed"])
    lines.append(f"{passed}/{total} checks passed")
    return "\n".join(lines) + "\n"


def exit_status(document: Dict[str, Any]) -> int:
    if "error" in document:
        return EXIT_USAGE
    return EXIT_OK if document.get("passed", False) else EXIT_FAILED


# ============================================================================
# Main
# ============================================================================
def run(config: RunConfig) -> int:
    """Execute one configured command, write its report and return the exit status."""
    name, args = tool_call(config)
    logger.info(f"🔧 Executing tool: {name}")
    document = json.loads(execute_tool(name, args))
    text = render(document, config.output_format)
    if config.output is not None:
        config.output.write_text(text, encoding="utf-8")
        logger.info(f"✅ report written to {config.output}")
    else:
        sys.stdout.write(text)
    status = exit_status(document)
    if status == EXIT_FAILED:
        logger.warning("⚠️ some checks failed")
    return status


def main(argv: Optional[List[str]] = None) -> int:
    try:
        config = parse_config(argv)
    except ValueError as e:
        sys.stderr.write(f"kreweras: error: {e}\n")
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if config.quiet else logging.INFO)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
