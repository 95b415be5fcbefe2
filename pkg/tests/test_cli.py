import json
import subprocess
import sys

import numpy as np
import pytest

from leakage_control.cli import CSV_HEADER, main, metadata_path, verify_checksum
from leakage_control.oracles import example1_leakage

EXAMPLE1 = """
[system]
dim = 12
omega = 0.05

[state]
amplitudes = 1

[bath]
kind = trivial

[grid]
t_max = 4 * pi / 0.05
n_steps = 2000

[output]
path = ground.csv
"""

FIG1 = """
[system]
omega = 0.01 / 1.5
[state]
amplitudes = 1, 1
[bath]
kind = thermal
ell = 1000
omega_d = 0.01
temperature = 300
[control]
tau = pi / (10 * 0.01 / 1.5)
delta = pi / (20 * 0.01 / 1.5)
phi0 = pi
[grid]
t_max = 700
n_steps = 700
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1)


def test_run_csv(tmp_path, capsys):
    cfg = write(tmp_path, "ground.ini", EXAMPLE1)
    assert main(["run", cfg]) == 0
    out = tmp_path / "ground.csv"
    raw = out.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 2002
    first = lines[1].split(",")
    assert all("e" in f and len(f.split("e")[0].replace("-", "").replace(".", "")) == 12 for f in first)
    data = read_csv(out)
    ref = example1_leakage("ground", 0.05, data[:, 0])
    assert np.max(np.abs(data[:, 2] - ref)) / np.max(ref) < 1e-4
    np.testing.assert_allclose(data[:, 3], np.exp(-data[:, 2]), rtol=1e-8)  # L carries 12 digits up to ~1600
    meta = json.loads(metadata_path(out).read_text())
    assert meta["grid"]["n_steps"] == 2000 and meta["workers"] == 1
    assert "[bath]" in meta["config"] and meta["engine_version"]
    assert verify_checksum(out)


def test_rerun_same_checksum_and_tamper(tmp_path):
    cfg = write(tmp_path, "fig.ini", FIG1)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", cfg, "--out", str(a)]) == 0
    assert main(["run", cfg, "--out", str(b)]) == 0
    sha = [json.loads(metadata_path(p).read_text())["sha256"] for p in (a, b)]
    assert sha[0] == sha[1]
    text = a.read_bytes()
    a.write_bytes(text.replace(b"e-", b"e+", 1))
    assert not verify_checksum(a)


def test_workers_byte_identical(tmp_path):
    cfg = write(tmp_path, "fig.ini", FIG1)
    one, eight = tmp_path / "w1.csv", tmp_path / "w8.csv"
    assert main(["--workers", "1", "run", cfg, "--out", str(one)]) == 0
    assert main(["run", cfg, "--workers", "8", "--out", str(eight)]) == 0
    assert one.read_bytes() == eight.read_bytes()


def test_json_format(tmp_path):
    cfg = write(tmp_path, "fig.ini", FIG1)
    out = tmp_path / "r.json"
    assert main(["--format", "json", "run", cfg, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["columns"] == list(CSV_HEADER) and len(doc["rows"]) == 701


def test_config_errors_exit_2(tmp_path, capsys):
    bad = write(tmp_path, "bad.ini", FIG1.replace("n_steps = 700", "n_steps = 0"))
    assert main(["run", bad]) == 2
    assert "grid.n_steps" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.ini")]) == 2
    wide = write(tmp_path, "wide.ini", FIG1.replace("delta = pi / (20", "delta = pi / (2"))
    assert main(["run", wide]) == 2
    with pytest.raises(SystemExit) as info:
        main(["fig1", "E"])
    assert info.value.code == 2


@pytest.mark.parametrize("panel,count", [("A", 5), ("B", 3), ("C", 3), ("D", 4)])
def test_fig1_files(tmp_path, capsys, panel, count):
    assert main(["fig1", panel, "--out", str(tmp_path)]) == 0
    files = sorted(p for p in tmp_path.iterdir() if p.suffix == ".csv")
    assert len(files) == count
    assert "property: holds" in capsys.readouterr().out
    for f in files:
        assert verify_checksum(f)


def test_oracle_pure_leakage(capsys):
    assert main(["oracle", "pure_leakage", "--lam", "0.1"]) == 0
    assert capsys.readouterr().out.rstrip().endswith("PASS")


def test_oracle_outside_validity_still_passes(capsys):
    assert main(["oracle", "pure_leakage", "--lam", "0.5", "--kind", "superposition"]) == 0
    out = capsys.readouterr().out
    assert "outside validity window" in out and out.rstrip().endswith("PASS")


def test_oracle_spin(capsys):
    assert main(["oracle", "spin_bath_rwa", "--lam", "0.05", "--omega", "1.0", "--epsilon", "1.5"]) == 0
    assert capsys.readouterr().out.rstrip().endswith("PASS")
    assert main(["oracle", "spin_bath_rwa", "--omega", "1.0", "--epsilon", "1.0"]) == 2


def test_oracle_tolerance_failure(capsys):
    # far too coarse a grid for 1e-3 relative accuracy
    assert main(["oracle", "pure_leakage", "--n-steps", "8"]) == 1
    assert capsys.readouterr().out.rstrip().endswith("FAIL")


def test_optimize_command(tmp_path, capsys):
    cfg = write(tmp_path, "fig.ini", FIG1)
    prefix = tmp_path / "opt"
    assert main(["optimize", cfg, "--budget", "1", "--horizon", "300", "--out", str(prefix)]) == 0
    report = json.loads((tmp_path / "opt.optimize.json").read_text())
    assert report["evaluations"] == 1
    w = 0.01 / 1.5
    assert report["best"]["tau"] == pytest.approx((np.pi / (20 * w) + np.pi / (5 * w)) / 2)
    assert verify_checksum(tmp_path / "opt_best.csv")


def test_optimize_zero_coupling(tmp_path):
    cfg = write(tmp_path, "dead.ini", FIG1.replace("[state]", "coupling = 0\n[state]"))
    prefix = tmp_path / "dead"
    assert main(["optimize", cfg, "--budget", "5", "--horizon", "200", "--out", str(prefix)]) == 0
    assert json.loads((tmp_path / "dead.optimize.json").read_text())["L_per_lambda2"] == 0.0


def test_sweep_command(tmp_path, capsys):
    cfg = write(tmp_path, "fig.ini", FIG1)
    out = tmp_path / "sweep.csv"
    assert main(["sweep", cfg, "--param", "phi0", "--values", "pi/10,pi/5,pi/2", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows.shape == (3, 2) and rows[0, 1] > rows[1, 1] > rows[2, 1]
    assert main(["sweep", cfg, "--param", "phi0", "--values", "pi/x"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "leakage_control", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()
