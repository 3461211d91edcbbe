import json
import re
import subprocess
import sys

import pytest

from rydhop.analysis import CSV_COLUMNS, read_records
from rydhop.cli import EXIT_CONFIG, EXIT_OK, main


def test_protocol_dump(capsys):
    assert main(["protocol", "dump", "--gate", "cnot", "--n-A", "2"]) == EXIT_OK
    recs = json.loads(capsys.readouterr().out)
    assert len(recs) == 13 and recs[0]["atom"] == "C"


def test_protocol_dump_nn(capsys):
    assert main(["protocol", "dump", "--nn", "1"]) == EXIT_OK
    assert len(json.loads(capsys.readouterr().out)) == 20


def test_simulate_prints_report(capsys):
    assert main(["simulate", "--gate", "cz", "--n-A", "1", "--gamma", "1e-3", "--splitting", "equal"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["record"]["gate"] == "cz"
    assert out["config"]["gamma0"] == pytest.approx(5e-4)
    r = out["report"]
    assert r["lower"] <= r["f_pro"] <= r["upper"]


def test_sweep_writes_csv_with_header(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gate": "cz", "sweep": {"n_A": [0, 1]}}))
    out = tmp_path / "out.csv"
    assert main(["sweep", "--config", str(cfg), "--output", str(out), "--workers", "1"]) == EXIT_OK
    assert out.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
    assert [r.n_A for r in read_records(out)] == [0, 1]
    assert main(["fit", str(out), "--gate", "cz", "--parameter", "alpha", "--n-A", "1"]) == EXIT_CONFIG


def test_sweep_to_stdout(capsys):
    assert main(["sweep", "--gate", "cz", "--n-A", "0", "--workers", "1"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS) and len(lines) == 2


def test_fit_alpha_from_csv(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    args = ["sweep", "--gate", "cz", "--n-A", "2", "--output", str(out), "--workers", "1"]
    for u in ("50", "100", "150", "200"):
        assert main(args + ["--u", u]) == EXIT_OK
    capsys.readouterr()
    assert main(["fit", str(out), "--gate", "cz", "--parameter", "alpha", "--n-A", "2"]) == EXIT_OK
    res = json.loads(capsys.readouterr().out)
    assert 1.2 <= res["value"] <= 2.2


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--solver", "mcwf"],
        ["simulate", "--n-traj", "5"],
        ["simulate", "--gamma", "1e-3"],
        ["simulate", "--n-A", "7"],
        ["simulate", "--config", "/nonexistent.json"],
        ["simulate", "--preset", "fig-gain"],
        ["fit", "/nonexistent.csv", "--gate", "cz"],
        ["fit", "x.csv", "--gate", "cz", "--parameter", "alpha"],
        ["protocol", "dump", "--gate", "cz", "--n-A", "2", "--variant", "sigmax"],
        ["frobnicate"],
        [],
    ],
)
def test_config_errors_exit_1(argv, capsys):
    assert main(argv) == EXIT_CONFIG


def test_bad_json_config(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    assert main(["simulate", "--config", str(cfg)]) == EXIT_CONFIG
    cfg.write_text(json.dumps({"gate": "cz", "typo": 1}))
    assert main(["simulate", "--config", str(cfg)]) == EXIT_CONFIG


def test_verify_single_criterion(tmp_path, capsys):
    report = tmp_path / "report.json"
    assert main(["verify", "--criteria", "8", "--report", str(report), "--workers", "1"]) == EXIT_OK
    data = json.loads(report.read_text())
    assert data["passed"] is True
    assert re.search(r"criterion +8 \[PASS\]", capsys.readouterr().out)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rydhop", "protocol", "dump", "--n-A", "0"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and len(json.loads(proc.stdout)) == 3
