"""Tests for the command-line interface."""
import json

import pandas as pd
import pytest
from click.testing import CliRunner

from main import cli

SMALL_CONFIG = """
preset: setting1
seed: 3
max_pccs: 2
population:
  count: 5
"""


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(SMALL_CONFIG, encoding="utf-8")
    return path


def test_run_writes_artifacts(runner, config_file, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(cli, [
        "run", "--config", str(config_file), "--out", str(out),
        "--format", "csv", "--format", "json", "--long", "--charts", "--xlsx", "--report",
    ])
    assert result.exit_code == 0, result.output
    assert "Simulation completed" in result.output
    for name in ("trace.csv", "trace.json", "trace_long.csv", "run_summary.json", "prices.svg",
                 "error.svg", "trace.xlsx", "report.html", "manifest.json"):
        assert (out / name).exists(), name
    assert len(pd.read_csv(out / "trace.csv")) == 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 3
    assert manifest["formats"] == ["csv", "json"]


def test_run_overrides(runner, config_file, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(cli, ["run", "--config", str(config_file), "--seed", "9", "--pccs", "1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    summary = json.loads((out / "run_summary.json").read_text())
    assert (summary["seed"], summary["pccs"]) == (9, 1)


def test_run_same_seed_same_trace(runner, config_file, tmp_path):
    for name in ("a", "b"):
        result = runner.invoke(cli, ["run", "--config", str(config_file), "--out", str(tmp_path / name)])
        assert result.exit_code == 0, result.output
    assert (tmp_path / "a" / "trace.csv").read_text() == (tmp_path / "b" / "trace.csv").read_text()


def test_invalid_config_exit_code(runner, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"preset": "setting1", "mechanism": {"gamma": 1.5}}))
    result = runner.invoke(cli, ["run", "--config", str(path), "--out", str(tmp_path / "out")])
    assert result.exit_code == 3
    assert "mechanism.gamma" in result.output


def test_missing_source_exit_code(runner, tmp_path):
    result = runner.invoke(cli, ["run", "--out", str(tmp_path)])
    assert result.exit_code == 3


def test_unwritable_output_exit_code(runner, config_file, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    result = runner.invoke(cli, ["run", "--config", str(config_file), "--out", str(blocker / "out")])
    assert result.exit_code == 5


def test_usage_error(runner):
    result = runner.invoke(cli, ["run", "--preset", "setting9"])
    assert result.exit_code == 2


def test_sweep(runner, tmp_path):
    result = runner.invoke(cli, [
        "sweep", "--preset", "setting1", "--sigma-grid", "0.5,1.0", "--replicates", "2",
        "--pccs", "2", "--window", "2", "--out", str(tmp_path),
    ])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(tmp_path / "sweep.csv")
    assert len(frame) == 4
    assert sorted(frame["sigma"].unique().tolist()) == [0.5, 1.0]


def test_presets(runner):
    result = runner.invoke(cli, ["presets"])
    assert result.exit_code == 0
    assert "setting1" in result.output and "setting2" in result.output
    assert "[240.0, 432.0, 360.0]" in result.output
    assert "scenario4-probabilistic" in result.output
