from __future__ import annotations

import json
from pathlib import Path

import pytest

from thetastrat.cli import RunOptions, build_parser, main, run
from thetastrat.config import SCHEMA_VERSION, parse_run_config
from thetastrat.reports import STRATA_CSV_COLUMNS

VORTEX_TOML = """\
chi = [2]
degree = [-1]
gamma = 1
b = [[1]]
x = [{weight = [1]}]
v = [{weight = [1]}]

[group]
type = "GL1"
"""


def write_config(tmp_path: Path, text: str = VORTEX_TOML, name: str = "run.toml") -> Path:
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_strata_writes_the_report_and_csv(tmp_path):
    config = write_config(tmp_path)
    out = tmp_path / "reports" / "strata.json"
    table = tmp_path / "strata.csv"

    assert main(["strata", "--config", str(config), "--out", str(out), "--csv", str(table)]) == 0

    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["schema"] == SCHEMA_VERSION
    assert report["command"] == "strata"
    assert len(report["configHash"]) == 64
    assert report["result"]["count"] == 2
    assert {tuple(item["lambda"]) for item in report["result"]["strata"]} == {("0",), ("1",)}
    assert report["result"]["torusBoundHolds"] is True
    assert "timing" not in report
    lines = table.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(STRATA_CSV_COLUMNS)
    assert len(lines) == 3


def test_timing_is_opt_in(tmp_path, capsys):
    config = write_config(tmp_path)

    assert main(["hn-opt", "--config", str(config), "--timing"]) == 0

    report = json.loads(capsys.readouterr().out)
    assert report["timing"]["seconds"] >= 0
    assert report["result"]["certificateVerified"] is True


def test_index_reproduces_the_abelian_count(tmp_path, capsys):
    config = write_config(
        tmp_path,
        'level = [[3]]\ngenus = 2\nindexMode = "tw"\n\n[group]\ntype = "GL1"\n\n[truncation]\nt = 0\ns = 0\n',
    )

    assert main(["index", "--config", str(config)]) == 0

    result = json.loads(capsys.readouterr().out)["result"]
    assert result["value"] == 9
    assert result["hPrime"] == [["-3"]]


def test_check_without_a_configuration(capsys):
    assert main(["check", "verlinde", "--type", "A1", "--g", "1"]) == 0

    report = json.loads(capsys.readouterr().out)
    assert report["result"] == {"passed": True, "suites": ["verlinde"]}
    assert report["config"] is None
    cases = report["oracle"]["suites"][0]["cases"]
    assert [case["expected"] for case in cases] == [2, 3, 4]


def test_check_rejects_unsupported_types(capsys):
    assert main(["check", "verlinde", "--type", "B2"]) == 3
    assert "precondition error" in capsys.readouterr().err


def test_commands_other_than_check_need_a_configuration(capsys):
    assert main(["strata"]) == 2
    assert "needs --config" in capsys.readouterr().err


def test_missing_gamma_is_a_schema_error(tmp_path, capsys):
    config = write_config(tmp_path, VORTEX_TOML.replace("gamma = 1\n", ""))

    assert main(["strata", "--config", str(config)]) == 2
    assert "gamma" in capsys.readouterr().err


def test_invalid_configuration_exit_code(tmp_path, capsys):
    config = write_config(tmp_path, VORTEX_TOML.replace("gamma = 1", "gamma = 1.5"))

    assert main(["strata", "--config", str(config)]) == 2
    assert "floats are not exact" in capsys.readouterr().err


def test_cli_overrides_reach_the_configuration(tmp_path, capsys):
    config = write_config(tmp_path)

    assert main(["strata", "--config", str(config), "--threads", "2", "--precision", "96"]) == 0

    report = json.loads(capsys.readouterr().out)
    assert report["config"]["threads"] == 2
    assert report["config"]["precision"] == 96


def test_parser_knows_every_command():
    parser = build_parser()

    for command in ("strata", "hn-opt", "index", "ggw", "check", "serve"):
        assert parser.parse_args([command]).command == command
    with pytest.raises(SystemExit):
        parser.parse_args(["bogus"])


def test_run_returns_the_same_report_as_the_cli(tmp_path):
    config = parse_run_config({
        "group": {"type": "GL1"},
        "x": [{"weight": [1]}],
        "v": [{"weight": [1]}],
        "b": [[1]],
        "chi": [2],
        "degree": [-1],
        "gamma": 1,
    })

    report = run(config, "strata", RunOptions())

    assert report["result"]["count"] == 2
    assert report["configHash"] is not None
