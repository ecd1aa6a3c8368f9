"""End-to-end CLI behavior through main(argv)."""

import json

import numpy as np
import pytest

from wavebox import io
from wavebox.cli import main


def test_dispersion_stdout(capsys):
    assert main(["dispersion", "--epsilon", "1.0", "--k-max", "2.0",
                 "--points", "5"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0] == "k,omega_rs,omega_gc_full,omega_gc_shallow"
    assert len(lines) == 6
    k, omega = (float(f) for f in lines[-1].split(",")[:2])
    assert omega == pytest.approx(k * k + 0.5)


def test_dispersion_output_dir(tmp_path):
    out = tmp_path / "disp"
    assert main(["dispersion", "--epsilon", "1.0", "--k-max", "2.0",
                 "--output", str(out)]) == 0
    assert (out / "dispersion.csv").is_file()
    assert (out / "dispersion.png").is_file()
    manifest = io.read_json(out / "manifest.json")
    assert manifest["kind"] == "dispersion"


def test_dispersion_hydro_and_warning(tmp_path, capsys):
    assert main(["dispersion", "--epsilon", "0.5", "--k-max", "3.0",
                 "--hydro", "sigma_over_rho=7e-5,g=9.81,H=1.0"]) == 0
    captured = capsys.readouterr()
    assert "validity range" in captured.err  # kH = 3 is far from shallow
    header, data = captured.out.strip().splitlines()[0], None
    assert "omega_gc_full" in header


def test_dispersion_usage_errors(capsys):
    assert main(["dispersion", "--epsilon", "1.0", "--k-max", "-2.0"]) == 2
    assert main(["dispersion", "--epsilon", "1.0", "--k-max", "2.0",
                 "--hydro", "g=1"]) == 2
    assert main(["dispersion", "--epsilon", "1.0", "--k-max", "2.0",
                 "--hydro", "nope=1,g=1,H=1"]) == 2


def test_simulate_run_directory(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--epsilon", "1.0", "--t-final", "15",
                 "--t-transient", "2", "--snapshots", "0,10",
                 "--output", str(out)]) == 0
    assert io.run_is_complete(out)
    assert (out / "trajectory.png").is_file()
    assert (out / "spatiotemporal.png").is_file()
    result = io.load_run(out)
    assert result.epsilon == 1.0
    assert len(result.field_snapshots) == 2


def test_simulate_no_figures(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--epsilon", "1.0", "--t-final", "10",
                 "--t-transient", "1", "--no-figures",
                 "--output", str(out)]) == 0
    assert io.run_is_complete(out)
    assert not (out / "trajectory.png").exists()


def test_simulate_requires_output(monkeypatch):
    monkeypatch.delenv("WAVEBOX_OUTPUT", raising=False)
    assert main(["simulate", "--epsilon", "1.0", "--t-final", "10",
                 "--t-transient", "1"]) == 2


def test_simulate_env_output(tmp_path, monkeypatch):
    out = tmp_path / "envrun"
    monkeypatch.setenv("WAVEBOX_OUTPUT", str(out))
    assert main(["simulate", "--epsilon", "1.0", "--t-final", "10",
                 "--t-transient", "1", "--no-figures"]) == 0
    assert io.run_is_complete(out)


def test_simulate_config_file(tmp_path):
    cfg = tmp_path / "params.cfg"
    cfg.write_text("epsilon = 1.2\nt_final = 10\nt_transient = 1\n")
    out = tmp_path / "cfgrun"
    assert main(["simulate", "--config", str(cfg), "--t-final", "12",
                 "--no-figures", "--output", str(out)]) == 0
    result = io.load_run(out)
    assert result.epsilon == 1.2
    assert result.params.t_final == 12.0  # flag overrides file


def test_simulate_bad_params(tmp_path):
    assert main(["simulate", "--epsilon", "-1.0", "--output",
                 str(tmp_path / "x")]) == 2


def test_sweep_and_analyze(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--eps-min", "0.8", "--eps-max", "1.2",
                 "--points", "3", "--t-final", "15", "--t-transient", "2",
                 "--no-figures", "--output", str(out)]) == 0
    assert (out / "sweep_manifest.json").is_file()
    assert (out / "kinetic_energy.csv").is_file()

    assert main(["analyze", str(out), "--no-figures"]) == 0
    analysis = out / "analysis"
    assert (analysis / "peaks.csv").is_file()
    assert (analysis / "energy_levels.csv").is_file()
    summary = json.loads((analysis / "summary.json").read_text())
    assert summary["kind"] == "sweep"
    assert summary["n_runs"] == 3


def test_analyze_single_run(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--epsilon", "1.0", "--t-final", "15",
                 "--t-transient", "2", "--no-figures",
                 "--output", str(out)]) == 0
    assert main(["analyze", str(out), "--output", str(tmp_path / "ana"),
                 "--no-figures"]) == 0
    summary = json.loads((tmp_path / "ana" / "summary.json").read_text())
    assert summary["kind"] == "run"
    assert summary["epsilon"] == 1.0
    header, data = io.read_csv(tmp_path / "ana" / "phase_space.csv")
    assert header == ["x_p", "v_p"]
    assert len(data) > 0


def test_analyze_rejects_random_directory(tmp_path):
    assert main(["analyze", str(tmp_path)]) == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
