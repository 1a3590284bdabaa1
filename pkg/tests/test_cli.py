"""Command-line interface tests: simulate, fit, report, export."""

import json
import subprocess
import sys

import numpy as np
import pytest

from mccv.cli import main


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture
def exported_csv(tmp_path):
    """Small synthetic dataset written through the export subcommand."""
    path = tmp_path / "bench.csv"
    code = run_cli(
        "export", "--out", str(path), "--n", "80", "--p", "30",
        "--example", "Ex2", "--seed", "3",
    )
    assert code == 0
    return path


def test_simulate_structural(tmp_path, capsys):
    config = {
        "design": "independent",
        "n": 60,
        "p": 40,
        "methods": ["m-MCCV", "em-MCCV", "K-fold", "AIC", "BIC", "EBIC"],
        "reps": 2,
        "master_seed": 4,
        "grid_length": 30,
        "b": 8,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    out_dir = tmp_path / "out"
    code = run_cli("simulate", "--config", str(cfg_path), "--out", str(out_dir), "--jobs", "2")
    assert code == 0
    table = (out_dir / "results.csv").read_text().strip().splitlines()
    assert table[0].startswith("method,")
    assert len(table) == 7  # header + one row per method
    markdown = (out_dir / "results.md").read_text()
    for name in config["methods"]:
        assert f"| {name} |" in markdown


def test_simulate_bad_config(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"design": "independent", "n": 60, "p": 40,
                                    "methods": ["m-MCCV"], "reps": 0}))
    assert run_cli("simulate", "--config", str(cfg_path)) == 1
    assert "reps" in capsys.readouterr().err


def test_fit_runs_and_reports_truth_metrics(exported_csv, tmp_path):
    result_path = tmp_path / "result.json"
    code = run_cli(
        "fit", "--data", str(exported_csv), "--response", "y",
        "--method", "m-MCCV", "--b", "10", "--grid-length", "40",
        "--seed", "1", "--out", str(result_path),
        "--truth", str(exported_csv.with_suffix(".truth.json")),
    )
    assert code == 0
    report = json.loads(result_path.read_text())
    assert report["model_size"] == len(report["selected"])
    assert set(report["coefficients"]) == set(report["selected"])
    assert len(report["selection_proportions"]) == 30
    assert report["fn"] + report["fp"] >= 0
    assert len(report["criterion_curve"]) == 40


def test_fit_deterministic_bytes(exported_csv, tmp_path):
    out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (out_a, out_b):
        code = run_cli(
            "fit", "--data", str(exported_csv), "--response", "y",
            "--method", "m-MCCV", "--b", "6", "--grid-length", "30",
            "--seed", "9", "--out", str(out),
        )
        assert code == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_fit_missing_response_column(exported_csv, capsys):
    assert run_cli("fit", "--data", str(exported_csv), "--response", "zz") == 1
    assert "zz" in capsys.readouterr().err


def test_fit_non_numeric_cell_names_row(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    rows = ["y,a,b"] + [f"{i}.0,1.{i},2.{i}" for i in range(10)]
    rows[7] = "7.0,oops,2.7"  # data row 7
    path.write_text("\n".join(rows) + "\n")
    assert run_cli("fit", "--data", str(path), "--response", "y") == 1
    err = capsys.readouterr().err
    assert "row 7" in err and "oops" in err and "'a'" in err


def test_fit_ragged_row(tmp_path, capsys):
    path = tmp_path / "ragged.csv"
    path.write_text("y,a\n1.0,2.0\n3.0\n")
    assert run_cli("fit", "--data", str(path), "--response", "y") == 1
    assert "row 2" in capsys.readouterr().err


def test_report_sorting_filtering_and_bins(tmp_path):
    result = {
        "columns": ["a", "b", "c", "d"],
        "selection_proportions": [0.3, 0.5, 0.0, 1.0],
    }
    result_path = tmp_path / "r.json"
    result_path.write_text(json.dumps(result))
    props_path = tmp_path / "props.csv"
    code = run_cli("report", "--result", str(result_path), "--out", str(props_path))
    assert code == 0
    lines = props_path.read_text().strip().splitlines()
    assert lines[0] == "variable,proportion"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["d", "b", "a", "c"]
    bins = (tmp_path / "props_bins.csv").read_text().strip().splitlines()
    assert bins[0] == "bin_low,bin_high,count"
    assert len(bins) == 21
    assert bins[-1] == "0.95,1.00,1"

    filtered = tmp_path / "filtered.csv"
    code = run_cli(
        "report", "--result", str(result_path), "--out", str(filtered),
        "--min-proportion", "0.4",
    )
    assert code == 0
    lines = filtered.read_text().strip().splitlines()
    assert [ln.split(",")[0] for ln in lines[1:]] == ["d", "b"]


def test_report_single_spike_bin(tmp_path):
    result = {"columns": ["a", "b"], "selection_proportions": [0.0, 1.0]}
    result_path = tmp_path / "r.json"
    result_path.write_text(json.dumps(result))
    out = tmp_path / "props.csv"
    assert run_cli(
        "report", "--result", str(result_path), "--out", str(out),
        "--min-proportion", "0.4",
    ) == 0
    bins = (tmp_path / "props_bins.csv").read_text().strip().splitlines()[1:]
    counts = [int(line.split(",")[2]) for line in bins]
    assert sum(counts) == 1
    assert counts[-1] == 1


def test_report_unreadable_result(tmp_path, capsys):
    missing = tmp_path / "missing.json"
    assert run_cli("report", "--result", str(missing)) == 1
    assert "cannot read" in capsys.readouterr().err


def test_proportions_are_multiples_of_one_over_b(exported_csv, tmp_path):
    result_path = tmp_path / "result.json"
    code = run_cli(
        "fit", "--data", str(exported_csv), "--response", "y",
        "--method", "m-MCCV", "--b", "20", "--grid-length", "30",
        "--seed", "2", "--out", str(result_path),
    )
    assert code == 0
    props = json.loads(result_path.read_text())["selection_proportions"]
    scaled = np.asarray(props) * 20
    assert np.allclose(scaled, np.round(scaled))


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "mccv.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "simulate" in proc.stdout
