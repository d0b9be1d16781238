import json
import subprocess
import sys

import numpy as np
import pytest

from ccadiabatic.cli import main
from ccadiabatic.hamiltonians import write_matrix
from ccadiabatic.paths import path_from_json, validate


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_paths_report(capsys):
    code, out = run(capsys, "paths", "--path", "lae", "--dual", "partial", "--delta", "0.2")
    assert code == 0
    assert "join s=0.8" in out and out.strip().endswith("valid")


def test_paths_json_roundtrip(capsys):
    code, out = run(capsys, "paths", "--path", "smoothstep", "--dual", "bc", "--m", "1", "--reverse",
                    "--format", "json")
    assert code == 0
    assert validate(path_from_json(out)).ok


def test_paths_csv(capsys):
    code, out = run(capsys, "paths", "--path", "linear", "--format", "csv", "--points", "5")
    assert out.splitlines() == ["s,f,fdot", "0.0,0.0,1.0", "0.25,0.25,1.0", "0.5,0.5,1.0", "0.75,0.75,1.0",
                                "1.0,1.0,1.0"]


def test_track_csv(capsys):
    code, out = run(capsys, "track", "--family", "sin_bridge", "--points", "65", "--levels", "1,2")
    lines = out.splitlines()
    assert lines[0] == "s,E_0,E_1,E_2,E_3,gamma_0_1,gamma_0_2"
    assert len(lines) == 66


def test_track_file_family(capsys, tmp_path):
    write_matrix(tmp_path / "a.txt", np.diag([0.0, 1.0]))
    write_matrix(tmp_path / "b.txt", np.array([[1.0, 0.5], [0.5, 0.0]]))
    code, out = run(capsys, "track", "--family", "custom_table", "--H0", str(tmp_path / "a.txt"),
                    "--H1", str(tmp_path / "b.txt"), "--points", "64")
    assert code == 0 and out.startswith("s,E_0,E_1,gamma_0_1")


@pytest.mark.parametrize("scheme", ["partial", "complete", "symmetric_all"])
def test_scheme_json(capsys, scheme):
    code, out = run(capsys, "scheme", "--path", "lae", "--scheme", scheme, "--T", "80")
    rec = json.loads(out)
    assert code == 0
    assert sum(b["weight"] for b in rec["plan"]["branches"]) == pytest.approx(1.0, abs=1e-12)


def test_querycost_csv(capsys):
    code, out = run(capsys, "querycost", "--Lam", "2.0", "--n", "6", "--n_H", "10", "--Gamma", "1",
                    "--maxT", "100", "--eps", "0.6", "--csv")
    rows = dict(line.split(",", 1) for line in out.splitlines()[1:])
    assert code == 0 and rows["C"] == "98"


def test_querycost_estimates_lambda(capsys):
    code, out = run(capsys, "querycost", "--path", "lae", "--maxT", "1")
    assert "Lam" in out and "5.6482" in out


def test_accept_subset(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out = run(capsys, "accept", "--only", "6,9", "--json", str(report))
    assert code == 0
    assert "[PASS] criterion 6" in out and "[PASS] criterion 9" in out
    assert [r["criterion"] for r in json.loads(report.read_text())] == [6, 9]


def test_sweep_command(capsys, tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[family]\nkind = search\nN = 3\n[path]\nkind = linear\n"
                   "[sweep]\nT_min = 10\nT_max = 40\npoints = 4\nphase_samples = 1\n")
    code, out = run(capsys, "sweep", str(cfg), "--csv", str(tmp_path / "o.csv"))
    assert code == 0
    assert out == (tmp_path / "o.csv").read_text()
    assert out.startswith("T,cost,p_success,diabatic_error_amplitude,diabatic_error_probability,predicted_1")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ccadiabatic", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("sweep", "paths", "track", "scheme", "querycost", "accept"):
        assert cmd in proc.stdout


def test_bad_input_reports_error(capsys):
    code = main(["track", "--family", "sin_bridge", "--points", "5"])
    assert code == 2
    assert "grid_points" in capsys.readouterr().err
