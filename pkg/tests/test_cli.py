import json
import os
import time

import pytest

from gaugeelastic.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from gaugeelastic.io import read_csv

SIM = """\
simulate:
  variant: willis_temporal
  seed: 4
  grid: {dim: 1, n: 64, length: 6.283185307179586, n_steps: 60}
  material: {C: "1 + 0.3*sin(x)", rho: 1.0}
  prestate: {u0: ["0.05*sin(x - 0.3*t)"]}
  solver: {record_every: 20, monitors: [energy, conservation_temporal]}
  initial: {u: ["exp(-4*(x-3)**2)"], noise: 1.0e-6}
  output: {snapshots: true}
"""

HOM = """\
homogenize:
  laminate:
    phases:
      - {C: 1.0, rho: 1.0, fraction: 0.3}
      - {C: 4.0, rho: 2.0, fraction: 0.45}
      - {C: 2.0, rho: 0.5, fraction: 0.25}
  sweep: {omega_start: 0.05, omega_stop: 2.0, n_omega: 50}
"""


def _write(tmp_path, text, name="c.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_simulate_is_deterministic(tmp_path):
    cfg = _write(tmp_path, SIM)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", cfg, "--out", str(a)]) == EXIT_OK
    assert main(["simulate", "--config", cfg, "--out", str(b)]) == EXIT_OK
    names = sorted(os.listdir(a))
    assert "monitor_energy.csv" in names and "snapshot_000060.csv" in names
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes(), n
    cols, data = read_csv(str(a / "monitor_energy.csv"))
    assert cols == ["step", "time", "value"] and data.shape == (3, 3)


def test_homogenize_sweep_within_budget(tmp_path):
    cfg = _write(tmp_path, HOM)
    t0 = time.perf_counter()
    assert main(["homogenize", "--config", cfg, "--out", str(tmp_path / "h")]) == EXIT_OK
    assert time.perf_counter() - t0 < 30.0
    cols, data = read_csv(str(tmp_path / "h" / "effective_operators.csv"))
    assert cols[:3] == ["omega", "q", "Re_Ceff"] and data.shape == (50, 11)
    cols, data = read_csv(str(tmp_path / "h" / "dispersion.csv"))
    assert cols == ["omega", "q", "v_phase", "gap"]
    side = json.loads((tmp_path / "h" / "dispersion.csv.json").read_text())
    assert len(side["config_sha256"]) == 64


def test_config_error_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "simulate:\n  solver: {clf: 0.5}\n")
    out = tmp_path / "o"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == EXIT_CONFIG
    assert "did you mean 'cfl'" in capsys.readouterr().err
    rec = json.loads((out / "failure.json").read_text())
    assert rec["kind"] == "config"


def test_runtime_error_exit_code(tmp_path):
    text = SIM.replace("n_steps: 60", "n_steps: 60, dt: 1.0")
    out = tmp_path / "o"
    assert main(["simulate", "--config", _write(tmp_path, text), "--out", str(out)]) == EXIT_RUNTIME
    assert json.loads((out / "failure.json").read_text())["error"] == "CFLError"


def test_verify_writes_reports(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--suite", "limits", "--out", str(out)]) == EXIT_OK
    rep = json.loads((out / "verify_report.json").read_text())
    assert rep["summary"] == {"failed": 0, "passed": 2}
    assert (out / "verify_report.txt").read_text().endswith("2/2 checks passed\n")


def test_verify_unknown_suite(tmp_path):
    assert main(["verify", "--suite", "nope", "--out", str(tmp_path)]) == EXIT_RUNTIME


def test_exit_codes_are_distinct():
    assert len({EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_RUNTIME}) == 4


def test_help_lists_commands(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    out = capsys.readouterr().out
    for cmd in ("simulate", "homogenize", "verify"):
        assert cmd in out
