import json
import os
import re
from datetime import date, timedelta

import pytest

from co2lstm.cli import main
from co2lstm.synthetic import bundled_fixture_path

FAST = ["--set", "regions=Northland", "--set", "sectors=Power, Industry", "--set", "layers=4",
        "--set", "epochs=2", "--set", "horizon=5"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def fixture_csv():
    return str(bundled_fixture_path())


@pytest.fixture
def five_point(tmp_path):
    d0 = date(2021, 3, 1)
    rows = [f"Testland,{(d0 + timedelta(days=k)).isoformat()},Power,{v}" for k, v in enumerate([2, 4, 30, 6, 8])]
    path = tmp_path / "five.csv"
    path.write_text("region,date,sector,value\n" + "\n".join(rows) + "\n")
    return str(path)


def test_unknown_subcommand(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and "usage" in err


def test_no_subcommand(capsys):
    assert run(capsys)[0] == 2


def test_clean_golden(capsys, tmp_path, five_point):
    out = tmp_path / "out"
    code, _, err = run(capsys, "clean", "--data", five_point, "-o", str(out),
                       "--set", "ma_window=3", "--set", "zscore_threshold=1.5", "--set", "sectors=Power")
    assert code == 0, err
    # mean 10, population sd sqrt(104): z(30) = 1.96 is the only flag; it takes the previous value 4
    cleaned = (out / "clean" / "testland__power.cleaned.csv").read_bytes()
    assert cleaned == (b"date,value\r\n2021-03-01,2.000000\r\n2021-03-02,4.000000\r\n2021-03-03,4.000000\r\n"
                       b"2021-03-04,6.000000\r\n2021-03-05,8.000000\r\n")
    smoothed = (out / "clean" / "testland__power.smoothed.csv").read_bytes()
    assert smoothed == b"date,value\r\n2021-03-03,3.333333\r\n2021-03-04,4.666667\r\n2021-03-05,6.000000\r\n"
    summary = json.loads((out / "clean" / "summary.json").read_text())
    assert summary["series"]["Testland / Power"]["flagged_dates"] == ["2021-03-03"]
    assert re.fullmatch(r"[0-9a-f]{64}", summary["config_hash"]) and summary["seed"] == 0


def test_ingest(capsys, tmp_path, fixture_csv):
    code, out, _ = run(capsys, "ingest", "--data", fixture_csv, "-o", str(tmp_path))
    assert code == 0
    report = json.loads(out)
    assert set(report["regions"]) == {"Northland", "Southland"}
    canonical = (tmp_path / "canonical.csv").read_bytes()
    assert b"2020-" not in canonical
    assert canonical.startswith(b"region,date,sector,value\r\n")


def test_pca_selects_top_three(capsys, tmp_path, fixture_csv):
    code, out, _ = run(capsys, "pca", "--data", fixture_csv, "-o", str(tmp_path))
    assert code == 0
    report = json.loads(out)
    north = report["regions"]["Northland"]
    assert north["selected"] == [0, 1, 2]
    assert len(north["ratios"]) == 5 and abs(sum(north["ratios"]) - 1) < 1e-10
    svg = (tmp_path / "pca" / "northland.svg").read_text()
    assert svg.startswith("<svg") and report["config_hash"] in svg


def test_train_evaluate_forecast(capsys, tmp_path, fixture_csv):
    args = ["--data", fixture_csv, "-o", str(tmp_path), *FAST]
    assert run(capsys, "train", *args)[0] == 0
    ck = json.loads((tmp_path / "train" / "northland__power.checkpoint.json").read_text())
    assert ck["format"] == "co2lstm-checkpoint" and ck["meta"]["seed"] == 0
    history = (tmp_path / "train" / "northland__industry.history.csv").read_text().splitlines()
    assert history[0] == "epoch,train_loss,val_loss" and len(history) == 3

    code, out, _ = run(capsys, "evaluate", *args)
    assert code == 0
    metrics = json.loads(out)["metrics"]["Northland / Power"]
    assert metrics["scaled"]["units"] == "scaled" and metrics["original"]["units"] == "original"
    assert metrics["config"]["train"]["epochs"] == 2

    assert run(capsys, "forecast", *args)[0] == 0
    lines = (tmp_path / "forecast" / "northland__power.forecast.csv").read_text().splitlines()
    assert lines[0] == "date,value,scaled" and len(lines) == 6
    assert lines[1].startswith("2023-03-01,")


def test_evaluate_without_checkpoint(capsys, tmp_path, fixture_csv):
    code, _, err = run(capsys, "evaluate", "--data", fixture_csv, "-o", str(tmp_path), *FAST)
    assert code == 1
    assert json.loads(err)["error"] == "bad_checkpoint"


def test_error_json_for_missing_data(capsys, tmp_path):
    code, _, err = run(capsys, "ingest", "--data", str(tmp_path / "missing.csv"), "-o", str(tmp_path))
    assert code == 1
    assert "error" in json.loads(err)


def test_error_json_for_bad_override(capsys, tmp_path, fixture_csv):
    code, _, err = run(capsys, "clean", "--data", fixture_csv, "-o", str(tmp_path),
                       "--set", "Atlantis / Power.epochs=3")
    assert code == 1
    assert json.loads(err)["error"] == "config_error"


def test_energy(capsys, tmp_path):
    example = os.path.join(os.path.dirname(__file__), "..", "configs", "energy_example.json")
    code, out, _ = run(capsys, "energy", example, "-o", str(tmp_path))
    assert code == 0
    assert "-3.31" in out and "-2.92" in out
    report = json.loads((tmp_path / "energy" / "energy.json").read_text())
    assert [r["binding_energy_ev_rounded"] for r in report["systems"]] == [-3.31, -2.92]


def test_parallel_training_matches_serial(capsys, tmp_path, fixture_csv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "train", "--data", fixture_csv, "-o", str(a), *FAST)[0] == 0
    assert run(capsys, "train", "--data", fixture_csv, "-o", str(b), *FAST, "--set", "jobs=2")[0] == 0
    for name in ("northland__power.checkpoint.json", "northland__industry.history.csv"):
        assert (a / "train" / name).read_bytes() == (b / "train" / name).read_bytes()
