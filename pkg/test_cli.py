"""Test the command-line harness, configuration layering and exports."""
import csv
import io
import json

import pytest

from sparse_recovery.cli import main
from sparse_recovery.cli.commands import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, build_config
from sparse_recovery.cli.router import build_parser
from sparse_recovery.core.presets import load_preset, merge_layers
from sparse_recovery.core.schemas.experiment_models import (
    ExperimentConfig,
    OutputFormat,
    ResultRow,
    SolverKind,
    TrialOutcome,
)
from sparse_recovery.core.schemas.contracts import PenaltyKind
from sparse_recovery.core.schemas.guardrails import validate_config
from sparse_recovery.services.experiment_service import aggregate
from sparse_recovery.services.export_service import ExportService
from sparse_recovery.settings import get_settings

SMALL_SOLVE = ["solve", "--n", "60", "--trials", "2", "--seed", "3", "--max-iter", "20"]


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_solve_output_is_deterministic(capsys):
    assert main(SMALL_SOLVE) == EXIT_OK
    first = capsys.readouterr().out
    assert main(SMALL_SOLVE) == EXIT_OK
    second = capsys.readouterr().out
    assert first == second
    rows = _rows(first)
    assert [r["record"] for r in rows] == ["trial", "trial", "aggregate"]
    assert rows[-1]["trials"] == "2"
    assert list(rows[0]) == ResultRow.columns()


def test_se_fixed_point_rows(capsys):
    assert main(["se-fixed-point", "--penalty", "l1", "--max-iter", "300"]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 1
    row = rows[0]
    assert row["record"] == "se" and row["penalty"] == "l1" and row["solver"] == "se"
    assert 0.0 < float(row["mse_mean"]) < 0.4
    assert row["status"] == "ok"


def test_se_fixed_point_defaults_to_both_penalties(capsys):
    assert main(["se-fixed-point", "--max-iter", "5"]) == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert [r["penalty"] for r in rows] == ["logsum", "l1"]


def test_jsonl_format(capsys):
    assert main(["se-fixed-point", "--penalty", "l1", "--format", "jsonl"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 1
    record = json.loads(lines[0])
    assert record["record"] == "se"
    assert set(record) == set(ResultRow.columns())


def test_invalid_value_exits_with_usage_status():
    assert main(["solve", "--n", "0"]) == EXIT_USAGE
    assert main(["solve", "--lambda-min", "10", "--lambda-max", "1"]) == EXIT_USAGE


def test_missing_config_file_exits_with_usage_status(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE


def test_noise_free_sweep_rejected():
    assert main(["mse-sweep", "--sigma2", "0"]) == EXIT_USAGE
    assert main(["best-mse-grid", "--sigma2", "0"]) == EXIT_USAGE


def test_unknown_flag_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["solve", "--bogus"])
    assert info.value.code == 2


def test_solver_names_and_alias():
    parser = build_parser(lambda args: EXIT_OK)
    args = parser.parse_args(["solve", "--solver", "ADMMN", "--solver", "se"])
    assert args.solvers == ["admm", "se"]
    with pytest.raises(SystemExit):
        parser.parse_args(["solve", "--solver", "lasso"])


def test_config_file_with_flag_override(tmp_path):
    config_path = tmp_path / "experiment.json"
    config_path.write_text(json.dumps({"n": 40, "alpha": 0.5, "trials": 1, "solvers": ["admm"]}))
    out = tmp_path / "out" / "rows.csv"
    code = main(["solve", "--config", str(config_path), "--n", "30", "--max-iter", "10", "--out", str(out)])
    assert code == EXIT_OK
    rows = _rows(out.read_text())
    assert [r["record"] for r in rows] == ["trial", "aggregate"]
    assert rows[0]["solver"] == "admm"
    assert rows[0]["n"] == "30"
    assert float(rows[0]["alpha"]) == 0.5


def test_solve_trace_file(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    assert main(SMALL_SOLVE + ["--solver", "admm", "--trace", str(trace)]) == EXIT_OK
    capsys.readouterr()
    rows = _rows(trace.read_text())
    assert len(rows) == 20
    assert list(rows[0]) == ["iter", "mse", "primal_residual", "dual_residual", "rho_admm"]


def test_trace_needs_an_iterative_solver(tmp_path, capsys):
    code = main(["solve", "--solver", "se", "--penalty", "l1", "--trace", str(tmp_path / "t.csv")])
    capsys.readouterr()
    assert code == EXIT_RUNTIME


def test_phase_diagram_rows(capsys):
    code = main(["phase-diagram", "--n", "40", "--grid-size", "2", "--trials", "1", "--penalty", "l1", "--max-iter", "50"])
    assert code == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert [r["record"] for r in rows] == ["aggregate"] * 4 + ["boundary"] * 2
    assert all(r["sigma2"] == "0.0" for r in rows)
    boundary = [r for r in rows if r["record"] == "boundary"]
    assert [float(r["rho"]) for r in boundary] == [0.5, 1.0]
    assert all(r["status"] == "ok" for r in boundary)


def test_best_mse_grid_single_penalty(capsys):
    code = main(["best-mse-grid", "--grid-size", "1", "--penalty", "l1", "--lambda-points", "8"])
    assert code == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert [r["record"] for r in rows] == ["best"]
    assert float(rows[0]["alpha"]) == 1.5
    assert 1e-4 <= float(rows[0]["lambda_star"]) <= 1e2


def test_mse_sweep_se_only(capsys):
    code = main(["mse-sweep", "--solver", "se", "--penalty", "l1", "--lambda-points", "4"])
    assert code == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 4
    lambdas = [float(r["lambda_pen"]) for r in rows]
    assert lambdas == sorted(lambdas)
    assert lambdas[0] == pytest.approx(1e-4) and lambdas[-1] == pytest.approx(1e2)


def test_merge_layers_ignores_none():
    merged = merge_layers({"n": 10, "alpha": 0.5}, {"n": None, "rho": 0.2}, {"alpha": 0.7})
    assert merged == {"n": 10, "alpha": 0.7, "rho": 0.2}


def test_published_presets_validate():
    for name in ("published_solve_v1.json", "published_phase_diagram_v1.json", "published_mse_sweep_v1.json",
                 "published_best_mse_grid_v1.json"):
        assert validate_config(load_preset(name), ExperimentConfig) is not None


def test_validate_config_rejects_bad_grids():
    assert validate_config({"alpha_grid": [0.5, 0.2]}, ExperimentConfig) is None
    assert validate_config({"jobs": 0}, ExperimentConfig) is None
    assert validate_config({"n": 10}, ExperimentConfig).n == 10


def test_aggregate_excludes_failed_trials():
    def outcome(trial, mse=None, diverged=False, error=""):
        return TrialOutcome(solver=SolverKind.AMP, penalty=PenaltyKind.L1, lambda_pen=0.1, trial=trial, seed=trial,
                            mse=mse, diverged=diverged, error=error)

    summary = aggregate([outcome(0, 1.0), outcome(1, 2.0), outcome(2, 3.0), outcome(3, 1e9, diverged=True),
                         outcome(4, error="singular")])
    assert summary["mse_mean"] == pytest.approx(2.0)
    assert summary["mse_stderr"] == pytest.approx(1.0 / 3 ** 0.5)
    assert summary["diverged"] == 2
    assert aggregate([outcome(0, 1.0)])["mse_stderr"] is None
    assert aggregate([outcome(0, diverged=True)])["status"] == "all_trials_failed"


def test_export_rows_to_file(tmp_path):
    rows = [ResultRow(record="se", penalty="l1", mse_mean=0.02), ResultRow(record="boundary", alpha=None)]
    path = tmp_path / "rows.csv"
    assert ExportService().write_rows(rows, str(path), OutputFormat.CSV) == 2
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == ResultRow.columns()
    parsed = _rows(path.read_text())
    assert parsed[0]["mse_mean"] == "0.02"
    assert parsed[1]["alpha"] == ""


def test_empty_trace_writes_nothing(tmp_path):
    path = tmp_path / "trace.csv"
    assert ExportService().write_trace([], str(path)) == 0
    assert not path.exists()


def test_zero_signal_noiseless_admm_row(capsys):
    code = main(["solve", "--solver", "admm", "--rho", "0", "--sigma2", "0", "--n", "30", "--trials", "1"])
    assert code == EXIT_OK
    rows = _rows(capsys.readouterr().out)
    assert float(rows[0]["mse_mean"]) == 0.0
    assert rows[0]["termination"] == "MseStop"


def test_best_mse_grid_uses_smaller_desk_sizes():
    parser = build_parser(lambda args: EXIT_OK)
    settings = get_settings()
    desk = build_config(parser.parse_args(["best-mse-grid"]))
    assert (desk.grid_size, desk.lambda_points) == (settings.desk_best_grid_size, settings.desk_best_lambda_points)
    sweep = build_config(parser.parse_args(["mse-sweep"]))
    assert sweep.lambda_points == settings.desk_lambda_points
    published = build_config(parser.parse_args(["best-mse-grid", "--paper-scale"]))
    assert (published.grid_size, published.lambda_points) == (50, 60)
