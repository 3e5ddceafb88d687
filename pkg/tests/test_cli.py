import subprocess
import sys
from pathlib import Path

import numpy as np

GOOD = """
[medium]
delta_bar = 10
[pulse_a]
shape = sech
area = 2pi
[pulse_b]
shape = sech
area = 0.005pi
[grid]
t_min = -12
t_max = 24
z_max = 4
dz = 0.1
[run]
stations = 2
"""


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "twopulse.cli", *args],
                          capture_output=True, text=True)


def run_pkg(*args):
    return subprocess.run([sys.executable, "-m", "twopulse", *args],
                          capture_output=True, text=True)


def _write(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_help_lists_subcommands():
    cp = run_pkg("--help")
    assert cp.returncode == 0, cp.stderr
    for sub in ("simulate", "analytic", "adiabatic", "verify", "areas"):
        assert sub in cp.stdout


def test_simulate_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    cp = run_cli("simulate", "--config", _write(tmp_path, GOOD), "--out", str(out), "--quiet")
    assert cp.returncode == 0, cp.stderr
    assert (out / "snapshots.csv").exists() and (out / "report.txt").exists()
    assert cp.stderr == ""


def test_stations_flag(tmp_path):
    out = tmp_path / "out"
    cp = run_cli("analytic", "--config", _write(tmp_path, GOOD), "--out", str(out),
                 "--stations", "5", "--quiet")
    assert cp.returncode == 0, cp.stderr
    assert len(list(out.glob("plot_*.svg"))) == 5


def test_adiabatic_subcommand(tmp_path):
    out = tmp_path / "out"
    cp = run_cli("adiabatic", "--config", _write(tmp_path, GOOD), "--out", str(out))
    assert cp.returncode == 0, cp.stderr
    assert "manley_rowe_residual_max" in (out / "report.txt").read_text()


def test_config_error_exit_code(tmp_path):
    cp = run_cli("simulate", "--config", _write(tmp_path, "[medium]\nalpha2 = 1.2\nbogus = 1\n"))
    assert cp.returncode == 1
    assert "alpha2+beta2 must equal 1" in cp.stderr and "bogus" in cp.stderr


def test_adiabatic_on_doppler_line_is_config_error(tmp_path):
    doppler = GOOD.replace("delta_bar = 10", "delta_bar = 10\nt2_star = 0.3")
    cp = run_cli("adiabatic", "--config", _write(tmp_path, doppler))
    assert cp.returncode == 1


def test_numerical_failure_exit_code(tmp_path):
    cfg = _write(tmp_path, GOOD.replace("[grid]", "[grid]\ndt = 0.5"))
    cp = run_cli("simulate", "--config", cfg, "--out", str(tmp_path / "o"))
    assert cp.returncode == 2
    assert "reduce dt" in cp.stderr


def test_areas_prints_curves(tmp_path):
    cp = run_cli("areas", "--config", "fig2_inversion_100", "--quiet")
    assert cp.returncode == 0, cp.stderr
    rows = cp.stdout.strip().splitlines()
    assert rows[0] == "z_kappa,theta_a,theta_b,theta_total"
    data = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
    assert np.allclose(data[:, 3], 2 * np.pi, atol=1e-12)


def test_verify_passes_on_defaults():
    cp = run_cli("verify", "--quiet")
    assert cp.returncode == 0, cp.stdout
    lines = cp.stdout.strip().splitlines()
    assert lines[0] == "check,status,value,threshold,detail"
    assert all(",pass," in line for line in lines[1:])


def test_verify_coarse_grid_fails_with_hint(tmp_path):
    cfg = _write(tmp_path, "[grid]\ndt = 0.2\n")
    cp = run_cli("verify", "--config", cfg, "--quiet")
    assert cp.returncode == 3
    bad = [line for line in cp.stdout.splitlines() if ",fail," in line]
    assert any(line.startswith("solver_vs_oracle") and "reduce dt" in line for line in bad)


def test_unwritable_output_is_config_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cp = run_cli("simulate", "--config", _write(tmp_path, GOOD), "--out", str(blocker / "sub"))
    assert cp.returncode == 1


def test_console_script_installed():
    exe = Path(sys.executable).parent / "twopulse"
    cp = subprocess.run(["twopulse", "--help"] if not exe.exists() else [str(exe), "--help"],
                        capture_output=True, text=True)
    assert cp.returncode == 0
