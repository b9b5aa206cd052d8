import subprocess
import sys

import pytest

from optoscatter.cli import main

FIG3 = "g = 2\nkappa = 7\ngamma = 0.05\nchi = 0.1\nomega_drive = 1\npump = cavity\n"


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "fig3.cfg"
    path.write_text(FIG3)
    return str(path)


def kv(text):
    return dict(line.split(" = ", 1) for line in text.splitlines() if " = " in line and not line.startswith("#"))


def data_lines(text):
    return [ln for ln in text.splitlines() if ln and not ln.startswith("#")]


def test_rates(cfg, capsys):
    assert main(["rates", "--config", cfg, "--delta_cav", "0", "--delta_atom", "1"]) == 0
    out = kv(capsys.readouterr().out)
    assert float(out["gamma_cool"]) > 0
    assert float(out["r_plus"]) == pytest.approx(float(out["r_minus"]), rel=1e-12)


def test_rates_heating_sentinel(cfg, capsys):
    assert main(["rates", "--config", cfg, "--delta_cav", "0", "--delta_atom", "-1"]) == 0
    out = kv(capsys.readouterr().out)
    assert float(out["m_inf"]) == -1 and out["heating"] == "true"


def test_rates_thermal(cfg, capsys):
    assert main(["rates", "--config", cfg, "--delta_atom", "1", "--m_th", "2", "--gamma_th", "1e-6"]) == 0
    assert "m_inf_prime" in kv(capsys.readouterr().out)


def test_sweep_shape(cfg, capsys):
    assert main(["sweep", "--config", cfg, "--delta-cav-axis", "-1", "1", "2",
                 "--delta-atom-axis", "0", "1", "2"]) == 0
    lines = data_lines(capsys.readouterr().out)
    assert len(lines) == 5 and lines[0].startswith("delta_cav,delta_atom")


def test_sweep_threads_byte_identical(cfg, tmp_path):
    outs = []
    for t in ("1", "3"):
        path = tmp_path / f"s{t}.csv"
        args = ["sweep", "--config", cfg, "--delta-cav-axis", "-4", "4", "101",
                "--delta-atom-axis", "-4", "4", "101", "--threads", t, "--out", str(path), "--seed", "9"]
        assert main(args) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_evolve(capsys):
    assert main(["evolve", "--a-plus", "0.3", "--a-minus", "1.0", "--m0", "5", "--samples", "5"]) == 0
    lines = data_lines(capsys.readouterr().out)
    assert lines[0].startswith("t,mean_m,p_0,p_1")
    assert float(lines[-1].split(",")[1]) == pytest.approx(0.3 / 0.7, rel=1e-4)


def test_evolve_from_params(cfg, capsys):
    assert main(["evolve", "--config", cfg, "--delta_atom", "1", "--m0", "2", "--samples", "3"]) == 0
    assert len(data_lines(capsys.readouterr().out)) == 4


def test_evolve_heating_needs_horizon(cfg, capsys):
    assert main(["evolve", "--config", cfg, "--delta_atom", "-1"]) == 1
    assert "t-final" in capsys.readouterr().err


def test_oracle(capsys):
    args = ["oracle", "--g", "0", "--kappa", "1", "--gamma", "0.5", "--chi", "0", "--omega_drive", "0",
            "--t-final", "2", "--dt", "0.01", "--samples", "3", "--n-cav-max", "1", "--n-mech-max", "1"]
    assert main(args) == 0
    text = capsys.readouterr().out
    summary = {k.lstrip("# "): v for k, v in kv(text.replace("# ", "")).items()}
    assert float(summary["ss_n_cav"]) == pytest.approx(0, abs=1e-12)
    assert data_lines(text)[0] == "t,n_cav,n_mech,p_excited"


def test_oracle_trace_drift_exit_code(capsys):
    args = ["oracle", "--g", "2", "--kappa", "500", "--gamma", "0.5", "--chi", "0", "--omega_drive", "0.1",
            "--t-final", "1", "--dt", "0.5", "--n-cav-max", "1", "--n-mech-max", "1", "--steady", "none"]
    assert main(args) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_resonances(cfg, capsys):
    assert main(["resonances", "--config", cfg, "--delta-cav-axis", "-4", "4", "9", "--target", "-1"]) == 0
    lines = data_lines(capsys.readouterr().out)
    assert lines[0] == "branch,target,delta_cav,delta_atom"
    assert len(lines) == 1 + 8


@pytest.mark.parametrize("argv, code", [
    (["rates", "--g", "-1", "--kappa", "1", "--gamma", "1", "--chi", "0", "--omega_drive", "1"], 1),
    (["rates", "--kappa", "1"], 1),
    (["rates", "--frobnicate"], 1),
    (["nope"], 1),
    (["sweep", "--config", "/nonexistent/p.cfg", "--delta-cav-axis", "0", "1", "2",
      "--delta-atom-axis", "0", "1", "2"], 3),
    (["sweep", "--g", "1", "--kappa", "1", "--gamma", "1", "--chi", "0", "--omega_drive", "1",
      "--delta-cav-axis", "1", "0", "2", "--delta-atom-axis", "0", "1", "2"], 1),
    (["rates", "--g", "2", "--kappa", "0", "--gamma", "0", "--chi", "0.1", "--omega_drive", "1",
      "--delta_cav", "4", "--delta_atom", "1"], 2),
])
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code
    captured = capsys.readouterr()
    assert captured.out == ""
    assert captured.err


def test_unwritable_output(cfg, capsys):
    assert main(["rates", "--config", cfg, "--out", "/nonexistent/dir/x.txt"]) == 3


def test_warning_goes_to_stderr(cfg, capsys):
    assert main(["rates", "--config", cfg, "--chi", "0.5"]) == 0
    captured = capsys.readouterr()
    assert "perturbative" in captured.err and "perturbative" not in captured.out


def test_console_entry_point(cfg):
    proc = subprocess.run([sys.executable, "-m", "optoscatter.cli", "rates", "--config", cfg],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "gamma_cool" in proc.stdout
