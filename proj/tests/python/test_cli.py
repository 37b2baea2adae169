import json
import os
import pathlib
import shutil
import subprocess

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "tests" / "fixtures"
SCHEMA = ROOT / "schemas" / "report.v1.schema.json"
SERIES = {"rt_price", "da_price", "system_mw", "temp_f", "miner_mw"}


def cli_path():
    path = os.environ.get("MINERDR_CLI") or shutil.which("minerdr")
    if not path:
        pytest.skip("minerdr executable not found; set MINERDR_CLI")
    return path


def run(*args, check=True):
    proc = subprocess.run([cli_path(), *map(str, args)], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args} failed ({proc.returncode}): {proc.stderr}")
    return proc


def test_simulate_is_deterministic(tmp_path):
    for name in ("a", "b"):
        run("simulate", "--seed", 3, "--season", "non_summer", "--set", "days=15", "--out", tmp_path / name)
    a = (tmp_path / "a" / "synthetic.csv").read_bytes()
    assert a == (tmp_path / "b" / "synthetic.csv").read_bytes()
    assert a.startswith(b"timestamp")
    sim = json.loads((tmp_path / "a" / "simulation.json").read_text())
    assert sim["format"] == "minerdr.simulation.v1"


def test_simulate_requires_seed(tmp_path):
    proc = run("simulate", "--out", tmp_path, check=False)
    assert proc.returncode != 0
    assert json.loads(proc.stderr)["error"]["command"] == "simulate"


def test_battery_covers_every_series(tmp_path):
    run("test", "--set", f"panel={FIXTURES / 'synthetic_summer.csv'}", "--out", tmp_path)
    doc = json.loads((tmp_path / "test.json").read_text())
    assert {s["series"] for s in doc["series"]} == SERIES
    for s in doc["series"]:
        for name in ("jarque_bera", "adf", "breusch_pagan", "durbin_watson"):
            assert s[name]["name"] == name
            assert s[name]["decision_note"]
    assert doc["correlations"]
    assert doc["rsi"]


def test_short_panel_fit_fails_cleanly(tmp_path):
    out = tmp_path / "out"
    proc = run("fit", "--season", "non_summer", "--set", f"panel={FIXTURES / 'synthetic_10days.csv'}",
               "--out", out, check=False)
    assert proc.returncode == 1
    err = json.loads(proc.stderr)["error"]
    assert err["kind"] == "precondition"
    assert "fit_demand_model" in err["message"]
    assert not out.exists() or not any(out.iterdir())


def test_report_requires_artifacts(tmp_path):
    proc = run("report", "--out", tmp_path, check=False)
    assert proc.returncode == 1


def test_unknown_key_is_rejected(tmp_path):
    proc = run("simulate", "--seed", 1, "--set", "bogus=1", "--out", tmp_path, check=False)
    assert proc.returncode != 0
    assert "bogus" in json.loads(proc.stderr)["error"]["message"]


def test_report_with_fit_only(tmp_path):
    panel = FIXTURES / "synthetic_summer.csv"
    run("fit", "--season", "summer", "--set", f"panel={panel}", "--out", tmp_path)
    run("report", "--set", f"panel={panel}", "--out", tmp_path)
    doc = json.loads((tmp_path / "report.json").read_text())
    for key in ("stages", "sarima", "metrics", "season"):
        assert key in doc
    assert "fit" in doc["artifacts"]


def test_full_pipeline_report_matches_schema(tmp_path):
    jsonschema = pytest.importorskip("jsonschema")
    raw = FIXTURES / "synthetic_summer.csv"
    run("ingest", "--set", f"inputs={raw}", "--out", tmp_path)
    panel = tmp_path / "panel.csv"
    transform = tmp_path / "transform.json"
    run("transform", "--set", f"panel={panel}", "--out", tmp_path)
    run("fit", "--season", "summer", "--set", f"panel={panel}", "--set", f"transform={transform}", "--out", tmp_path)
    run("test", "--set", f"panel={panel}", "--set", f"transform={transform}", "--out", tmp_path)
    run("report", "--out", tmp_path)
    doc = json.loads((tmp_path / "report.json").read_text())
    jsonschema.validate(doc, json.loads(SCHEMA.read_text()))
    for plot in doc["plots"]:
        assert (tmp_path / plot["file"]).is_file()
    assert not list(tmp_path.glob(".partial-*"))
