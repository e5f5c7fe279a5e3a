import csv
import io
import json
import subprocess
import sys

import pytest

from kneser_ekr.cli import _grid, main
from kneser_ekr.experiments import ExperimentConfig


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_grid_parsing():
    assert _grid("0,0.5,1") == [0.0, 0.5, 1.0]
    assert _grid("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_hitting_json_schema(capsys):
    code, out, _ = run(capsys, "hitting", "--trials", "5", "--seed", "3")
    assert code == 0
    rec = json.loads(out)
    assert set(rec) == {"schema_version", "version", "command", "config", "results", "checks", "timings"}
    assert rec["command"] == "hitting" and rec["timings"] is None
    assert rec["config"]["seed"] == 3 and "workers" not in rec["config"]
    assert len(rec["results"]["trials"]) == 5
    s = rec["results"]["summary"]["alpha_equals_super"]
    assert s["ci95"][0] <= s["estimate"] <= s["ci95"][1]
    assert rec["checks"]["violations"] == 0


def test_timings_flag(capsys):
    _, out, _ = run(capsys, "hitting", "--trials", "2", "--timings")
    assert json.loads(out)["timings"]["wall"] >= 0


def test_env_override_and_flag_precedence(capsys, monkeypatch):
    monkeypatch.setenv("KNESER_EKR_TRIALS", "4")
    monkeypatch.setenv("KNESER_EKR_SEED", "11")
    _, out, _ = run(capsys, "hitting")
    rec = json.loads(out)
    assert rec["config"]["trials"] == 4 and rec["config"]["seed"] == 11
    _, out, _ = run(capsys, "hitting", "--trials", "2")
    rec = json.loads(out)
    assert rec["config"]["trials"] == 2 and rec["config"]["seed"] == 11


def test_csv_output(capsys, tmp_path):
    path = tmp_path / "h.csv"
    code, out, _ = run(capsys, "hitting", "--trials", "3", "--format", "csv", "--out", str(path))
    assert code == 0 and out == ""
    rows = list(csv.reader(io.StringIO(path.read_text())))
    assert rows[0][:3] == ["trial", "seed", "tau_super"] and len(rows) == 4


def test_exact_command(capsys):
    code, out, _ = run(capsys, "exact", "--p-grid", "0,0.5,1", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][0] == "p" and len(rows) == 4
    assert [float(v) for v in rows[3][1:]] == [1.0] * 4


def test_exact_refuses_large_instances(capsys):
    code, out, err = run(capsys, "exact", "--n", "7", "--k", "3")
    assert code == 2 and out == "" and "exact enumeration" in err


def test_invalid_params_exit_code(capsys):
    code, _, err = run(capsys, "hitting", "--n", "4", "--k", "2")
    assert code == 2 and "2k+1" in err


def test_sweep_command(capsys):
    code, out, _ = run(capsys, "sweep", "--trials", "200", "--p-grid", "0,0.5,0.75,1")
    rec = json.loads(out)
    assert code == 0
    pts = rec["results"]["points"]
    assert [pt["p"] for pt in pts] == [0.0, 0.5, 0.75, 1.0]
    assert pts[0]["ekr"]["estimate"] == 0 and pts[-1]["ekr"]["estimate"] == 1
    assert "exact" in pts[1]["ekr"]
    assert rec["checks"]["monotonicity_failures"] == 0


def test_certificate_command(capsys):
    code, out, _ = run(capsys, "certificate", "--n", "9", "--k", "4", "--trials", "5")
    rec = json.loads(out)
    assert code == 0
    assert rec["results"]["success_rate"]["trials"] == 5
    assert all(r["valid"] for r in rec["results"]["families"] if r["success"])


def test_verify_and_fault_injection(capsys, caplog):
    code, out, _ = run(capsys, "verify", "--trials", "50")
    rec = json.loads(out)
    assert code == 0 and rec["checks"]["violations"] == 0
    assert rec["results"]["suites"]["observations_K(5,2)_exhaustive"]["checked"] == 205
    code, out, _ = run(capsys, "verify", "--trials", "20", "--inject-fault")
    rec = json.loads(out)
    assert code == 1 and rec["checks"]["violations"] >= 1
    suite = rec["results"]["suites"]["observations_K(5,2)_exhaustive"]
    assert suite["witnesses"][0]["failed"] == ["abar_b_identity"]
    assert "violation" in caplog.text


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(p_grid=[1.5])
    with pytest.raises(ValueError):
        ExperimentConfig(format="xml")


def test_module_entry_point_and_worker_independence(tmp_path):
    outs = []
    for w in (1, 3):
        path = tmp_path / f"w{w}.json"
        r = subprocess.run([sys.executable, "-m", "kneser_ekr", "hitting", "--trials", "12", "--seed", "5",
                            "--workers", str(w), "--out", str(path)], capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
