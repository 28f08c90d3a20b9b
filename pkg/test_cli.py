"""Tests for the command-line surface and the tool registry."""

import json

import pytest

from cli import EXIT_OK, EXIT_USAGE, main, parse_config, render, tool_call
from kreweras.config import get_default_law_order, get_default_order
from kreweras.tools import TOOL_REGISTRY, execute_tool, tools_schema


def test_verify_count_passes(capsys):
    assert main(["verify-count", "--order", "12", "--quiet"]) == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert document["schema"] == 1
    assert document["passed"] is True
    assert document["command"] == "verify-count"


def test_float_probability_is_a_usage_error(capsys):
    assert main(["law", "--p", "0.5", "--q", "1/4", "--r", "1/4"]) == EXIT_USAGE
    assert "kreweras: error" in capsys.readouterr().err


def test_non_stochastic_triple_is_a_usage_error(capsys):
    assert main(["law", "--p", "1/3", "--q", "1/3", "--r", "1/2"]) == EXIT_USAGE
    assert "p + q + r" in capsys.readouterr().err


def test_missing_probabilities_are_reported():
    with pytest.raises(ValueError, match="--q --r"):
        parse_config(["stationary", "--p", "1/3"])


def test_unknown_command_exits_through_argparse():
    with pytest.raises(SystemExit):
        main(["enumerate"])


def test_count_csv_table(capsys):
    assert main(["count", "--order", "3", "--format", "csv", "--quiet"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,i,j,count"
    assert "1,1,1,1" in lines
    assert "3,0,0,2" in lines


def test_output_is_deterministic(capsys):
    main(["count", "--order", "6", "--quiet"])
    first = capsys.readouterr().out
    main(["count", "--order", "6", "--quiet"])
    assert capsys.readouterr().out == first


def test_text_format_and_output_file(tmp_path):
    target = tmp_path / "kernel.txt"
    status = main(["verify-kernel", "--order", "8", "--rho", "1/36", "--format", "text", "--output", str(target), "--quiet"])
    assert status == EXIT_OK
    text = target.read_text(encoding="utf-8")
    assert text.startswith("verify-kernel")
    assert text.rstrip().endswith("checks passed")
    assert "✅" in text


def test_verify_law_for_non_ergodic_triple(capsys):
    status = main(["verify-law", "--p", "1/6", "--q", "1/3", "--r", "1/2", "--order", "9", "--quiet"])
    document = json.loads(capsys.readouterr().out)
    assert status == EXIT_OK, [c for c in document["checks"] if not c["passed"]]
    assert document["data"]["ergodic"] is False


def test_stationary_on_non_ergodic_triple_reports_error(capsys):
    status = main(["stationary", "--p", "1/6", "--q", "1/3", "--r", "1/2", "--quiet"])
    assert status == EXIT_USAGE
    assert "error" in json.loads(capsys.readouterr().out)


def test_tool_call_maps_flags():
    config = parse_config(["verify-stationary", "--p", "2/5", "--q", "2/5", "--r", "1/5", "--grid", "80"])
    name, args = tool_call(config)
    assert name == "verify_stationary"
    assert args["grid"] == 80
    assert args["p"] == "2/5"


def test_render_csv_falls_back_to_checks():
    document = {"command": "x", "checks": [{"name": "a", "passed": True, "detail": "ok", "first_mismatch": None}]}
    assert render(document, "csv").splitlines() == ["name,passed,detail,first_mismatch", "a,True,ok,"]


def test_execute_tool_unknown_name():
    assert json.loads(execute_tool("nope", {})) == {"error": "Unknown tool: nope"}


def test_execute_tool_catches_bad_arguments():
    result = json.loads(execute_tool("law", {"p": "1/2", "q": "1/2", "r": "1/2"}))
    assert "error" in result


def test_tools_schema_covers_registry():
    assert set(tools_schema) == set(TOOL_REGISTRY)


def test_environment_defaults(monkeypatch):
    monkeypatch.setenv("KREWERAS_ORDER", "30")
    monkeypatch.delenv("KREWERAS_LAW_ORDER", raising=False)
    assert get_default_order() == 30
    assert get_default_law_order() == 18
    monkeypatch.setenv("KREWERAS_ORDER", "-3")
    with pytest.raises(ValueError, match="KREWERAS_ORDER"):
        get_default_order()


def test_report_threads_law_order():
    name, args = tool_call(parse_config(["report", "--order", "10", "--law-order", "9"]))
    assert name == "report"
    assert args["law_order"] == 9
    assert args["order"] == 10
    assert tool_call(parse_config(["report"]))[1]["law_order"] is None
