import csv
import io
import json
import subprocess
import sys

import pytest

from feedbackq.cli import main

TABLE2 = ["--lambda", "0.4", "--mu", "0.7", "--q", "0.2", "--alpha", "0.05", "--v", "1", "--reward", "2"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_text(capsys):
    code, out, _ = run(capsys, "solve", "--case", "n", *TABLE2)
    assert code == 0
    assert "threshold       2.3698" in out and "interior" in out


def test_solve_json_shape(capsys):
    code, out, _ = run(capsys, "solve", "--case", "r", "--format", "json", *TABLE2)
    doc = json.loads(out)
    assert code == 0 and set(doc) == {"config", "results", "meta"}
    assert doc["results"][0]["threshold"] == pytest.approx(2.8366, abs=1e-4)
    assert doc["results"][0]["stationary_payoff"] == pytest.approx(0.0225, abs=1e-4)
    assert "runtime_s" in doc["meta"]


@pytest.mark.parametrize("argv,code", [
    (["solve", "--lambda", "-1", "--mu", "1", "--q", "0.5"], 2),
    (["solve", "--lambda", "1", "--mu", "1", "--q", "0.5", "--v", "0.1", "--x-max", "5"], 3),
    (["solve", "--case", "deadline", "--lambda", "1", "--mu", "2", "--q", "0.3"], 2),
    (["sojourn-cdf", "--lambda", "1", "--mu", "2", "--q", "0.3", "--x", "1", "--position", "5", "--times", "1"], 2),
])
def test_exit_codes(capsys, argv, code):
    got, _, err = run(capsys, *argv)
    assert got == code and err.startswith("error:")


def test_numerical_failure_exit_code(capsys, monkeypatch):
    from feedbackq import NumericalFailureError, reports

    def boom(*args, **kwargs):
        raise NumericalFailureError("forced")

    monkeypatch.setattr(reports, "solve", boom)
    code, _, err = run(capsys, "solve", *TABLE2)
    assert code == 4 and "forced" in err


def test_rerun_roundtrip(tmp_path, capsys):
    first = tmp_path / "first.json"
    assert main(["solve", "--case", "deadline", "--gamma", "0.85", "--xi", "10", "--lambda", "1", "--mu", "2",
                 "--q", "0.3", "--format", "json", "--out", str(first)]) == 0
    second = tmp_path / "second.json"
    assert main(["rerun", str(first), "--out", str(second)]) == 0
    a, b = json.loads(first.read_text()), json.loads(second.read_text())
    assert a["config"] == b["config"] and a["results"] == b["results"]
    assert a["results"][0]["threshold"] == pytest.approx(3.6, abs=0.05)


def test_sweep_csv_and_paradox(capsys):
    code, out, _ = run(capsys, "sweep", "--lambda", "1", "--mu", "0.5", "--q", "0.3", "--v", "0.5",
                       "--axis", "alpha=0.1,0.075,0.05,0.025")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 4
    assert [round(float(r["x_e"]), 2) for r in rows] == [1.0, 1.48, 2.22, 5.0]
    assert any(r["paradox"] == "alpha" for r in rows)


def test_sweep_parallel_matches_serial(capsys):
    argv = ["sweep", "--lambda", "1", "--mu", "2", "--q", "0.3", "--case", "deadline", "--gamma", "0.85",
            "--axis", "xi=8,9,10"]
    _, serial, _ = run(capsys, *argv)
    _, parallel, _ = run(capsys, *argv, "--jobs", "3")
    assert serial == parallel
    assert [round(float(r["x_e"]), 2) for r in csv.DictReader(io.StringIO(serial))] == [3.0, 3.04, 3.61]


def test_sweep_records_failed_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--lambda", "1", "--mu", "1", "--q", "0.5", "--x-max", "6",
                       "--axis", "alpha=0,0.2", "--v", "0.3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert rows[0]["error"].startswith("ThresholdUnboundedError") and rows[1]["error"] == ""


def test_sojourn_cdf_csv(capsys):
    code, out, _ = run(capsys, "sojourn-cdf", "--lambda", "1", "--mu", "2", "--q", "0.3", "--x", "3.6",
                       "--position", "4", "--times", "10")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and float(rows[0]["cdf"]) == pytest.approx(0.8503, abs=1e-4)


def test_reproduce_table2(capsys):
    code, out, _ = run(capsys, "reproduce", "table2")
    assert code == 0 and "fail" not in out and out.count("pass") == 20


def test_reproduce_fig1_csv(capsys):
    code, out, _ = run(capsys, "reproduce", "fig1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["x"] == "0.0"
    flat = {round(float(r["x"]), 2): r for r in rows}
    assert float(flat[0.0]["i=1"]) == float(flat[0.95]["i=1"]) == pytest.approx(0.75)
    assert flat[0.5]["i=3"] == ""


def test_simulate_json(capsys, tmp_path):
    dump = tmp_path / "w.txt"
    code, out, _ = run(capsys, "simulate", "--lambda", "1", "--mu", "0.5", "--q", "0.3", "--alpha", "0.05",
                       "--x", "0.5", "--replications", "20000", "--seed", "4", "--dump-samples", str(dump))
    res = json.loads(out)["results"][0]
    assert code == 0 and abs(res["estimate"] - 0.75) < 4 * res["std_error"]
    assert len(dump.read_text().split()) == 20000


def test_matrix_dump(capsys):
    code, out, _ = run(capsys, "matrix", "--lambda", "1", "--mu", "0.5", "--q", "0.3", "--alpha", "0.05",
                       "--x", "1.5")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "row,col,value" and lines[1].startswith("1,1,0.548387")


def test_show_config(capsys):
    code, out, _ = run(capsys, "--show-config")
    assert code == 0 and json.loads(out)["x_max"] == 64


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "feedbackq.cli", "--show-config"], capture_output=True, text=True)
    assert proc.returncode == 0 and "z_tol" in proc.stdout
