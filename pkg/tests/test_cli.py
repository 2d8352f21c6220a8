from __future__ import annotations

import io
import json

import pandas as pd
import pytest

from src import __version__
from src.cli import run
from src.cli.harness import gate_passed, write_gate_stamp
from src.schemas.report_schema import GateReport
from src.tools.csv_tools import parse_eps_grid, read_csv


def _table(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text), comment="#")


def _stamp(passed: bool) -> None:
    write_gate_stamp(GateReport(ensemble="toy", t_max=2, passed=passed, tool_version=__version__))


def test_threshold_fig1(capsys):
    assert run(["threshold", "--ensemble", "fig1"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# subcommand: threshold")
    frame = _table(out)
    assert frame.loc[0, "threshold"] == pytest.approx(0.80, abs=0.01)
    assert frame.loc[0, "stability_bound"] > frame.loc[0, "threshold"]


def test_alpha_needs_trusted_gamma(capsys):
    assert run(["alpha", "--ensemble", "fig1", "--eps", "0.5", "--t", "0"]) == 2
    err = capsys.readouterr().err
    assert err.strip().splitlines()[-1].startswith("error[GAMMA_NOT_TRUSTED]:")


def test_alpha_at_zero_iterations(capsys):
    assert run(["alpha", "--ensemble", "fig1", "--eps", "0.5", "--t", "0", "--trust-gamma"]) == 0
    frame = _table(capsys.readouterr().out)
    assert list(frame.columns) == ["epsilon", "t", "beta", "gamma", "alpha"]
    row = frame.iloc[0]
    assert (row["beta"], row["gamma"], row["alpha"]) == (0.0, 0.0, 0.0)


def test_passing_stamp_unlocks_gamma(capsys):
    assert not gate_passed()
    _stamp(passed=False)
    assert run(["gamma", "--ensemble", "toy", "--eps", "0.6", "--t", "2"]) == 2
    _stamp(passed=True)
    assert gate_passed()
    assert run(["gamma", "--ensemble", "toy", "--eps", "0.6", "--t", "2"]) == 0
    frame = _table(capsys.readouterr().out)
    assert list(frame.columns) == ["epsilon", "t", "gamma", "sum_Fv", "sum_Fc", "sum_Fr"]


def test_de_rows_sorted_and_reproducible(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["de", "--ensemble", "toy", "--eps", "0.2:0.6:0.2", "--t", "3"]
    assert run(args + ["--out", str(first)]) == 0
    assert run(args + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()

    frame = read_csv(str(first))
    assert len(frame) == 3 * 4
    assert list(frame["epsilon"]) == sorted(frame["epsilon"])
    assert frame.loc[0, "P"] == 1.0


def test_beta_grid(capsys):
    assert run(["beta", "--ensemble", "toy", "--eps", "0.1:0.9:0.4", "--t", "2"]) == 0
    frame = _table(capsys.readouterr().out)
    assert list(frame.columns) == ["epsilon", "t", "E_KK", "sum_VV_term", "sum_CC_term", "beta"]
    assert list(frame["epsilon"]) == [0.1, 0.5, 0.9]


def test_simulate_columns(capsys):
    args = ["simulate", "--ensemble", "toy", "--n", "50,100", "--eps", "0.4", "--t", "3", "--trials", "40", "--seed", "3"]
    assert run(args) == 0
    frame = _table(capsys.readouterr().out)
    assert list(frame.columns) == [
        "epsilon", "n", "t", "trials", "pb_hat", "stderr", "pb_inf", "scaled_gap", "scaled_stderr", "seed",
    ]
    assert list(frame["n"]) == [50, 100]


def test_figure2_has_alpha_column(capsys):
    args = [
        "figure2", "--ensemble", "toy", "--n", "50", "--eps", "0.3:0.5:0.2",
        "--trials", "20", "--t", "4", "--trust-gamma",
    ]
    assert run(args) == 0
    frame = _table(capsys.readouterr().out)
    assert frame.columns[-1] == "alpha"
    assert len(frame) == 2


@pytest.mark.parametrize(
    "argv, code",
    [
        (["de", "--ensemble", "toy", "--eps", "1.5"], "EPSILON_OUT_OF_RANGE"),
        (["de", "--ensemble", "no_such_ensemble"], "MALFORMED_CONFIG"),
        (["simulate", "--ensemble", "regular_3_6", "--n", "5", "--trials", "2"], "UNREALIZABLE_BLOCKLENGTH"),
    ],
)
def test_input_errors_exit_two(argv, code, capsys):
    assert run(argv) == 2
    assert capsys.readouterr().err.strip().splitlines()[-1].startswith(f"error[{code}]:")


def test_unknown_flag_and_help(capsys):
    assert run(["threshold", "--ensemble", "fig1", "--bogus"]) == 2
    assert run(["beta", "--help"]) == 0
    assert "--eps" in capsys.readouterr().out
    assert run(["nonsense"]) == 2


def test_run_log_records_events(tmp_path):
    assert run(["threshold", "--ensemble", "toy", "--out", str(tmp_path / "t.csv")]) == 0
    events = [json.loads(line) for line in (tmp_path / "runs.jsonl").read_text().splitlines()]
    assert [e["type"] for e in events] == ["start", "finish"]
    assert events[0]["run_id"] == events[1]["run_id"]


def test_oracle_check_passes_and_trusts_gamma(tmp_path, capsys):
    out = tmp_path / "report.json"
    argv = [
        "oracle-check", "--ensemble", "toy2", "--t", "2", "--n", "8,16",
        "--trials", "4000", "--seed", "2024", "--workers", "0", "--out", str(out),
    ]
    assert run(argv) == 0
    report = GateReport.model_validate_json(out.read_text())
    assert report.passed
    names = [check.name for check in report.checks]
    assert names == ["mass_identity", "generating_function", "beta_equivalence", "gamma_gate"]
    by_name = {check.name: check for check in report.checks}
    assert all(check.passed for check in report.checks)
    assert by_name["beta_equivalence"].max_deviation < 1e-9
    assert by_name["gamma_gate"].cases == 4

    stamp = json.loads((tmp_path / "gate.json").read_text())
    assert stamp["passed"] is True
    assert gate_passed()
    assert run(["gamma", "--ensemble", "toy2", "--eps", "0.6", "--t", "2"]) == 0


def test_failed_oracle_check_exits_one_and_withholds_trust(tmp_path, capsys):
    out = tmp_path / "report.json"
    argv = ["oracle-check", "--ensemble", "toy", "--t", "1", "--n", "5", "--trials", "10", "--out", str(out)]
    assert run(argv) == 1
    report = GateReport.model_validate_json(out.read_text())
    assert not report.passed
    by_name = {check.name: check for check in report.checks}
    assert by_name["mass_identity"].passed
    assert not by_name["gamma_gate"].passed
    assert "need two" in by_name["gamma_gate"].failures[0]

    stamp = json.loads((tmp_path / "gate.json").read_text())
    assert stamp["passed"] is False
    assert not gate_passed()
    assert run(["gamma", "--ensemble", "toy", "--eps", "0.6", "--t", "1"]) == 2
    assert capsys.readouterr().err.strip().splitlines()[-1].startswith("error[GAMMA_NOT_TRUSTED]:")


@pytest.mark.parametrize(
    "text, expected",
    [
        ("0.5", [0.5]),
        ("0:0.99:0.005", None),
        ("0.1:0.3:0.1", [0.1, 0.2, 0.3]),
    ],
)
def test_eps_grid(text, expected):
    grid = parse_eps_grid(text)
    if expected is None:
        assert len(grid) == 199
        assert grid[-1] == 0.99
    else:
        assert grid == expected
