"""End-to-end command line tests on small, fast configurations."""

import hashlib
import json
import math
import os

import numpy as np
import pytest

from zeemem.cli import main
from zeemem.runio import read_csv_columns, traces_from_columns

TINY_YAML = """
sequence:
  write_us: 1.0
  read_us: 1.0
  storage_times_us: [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
  fields:
    write:
      - rabi: 0.5
        polarization: x
      - rabi: 0.25
        polarization: y
    read:
      - rabi: 0.125
        polarization: y
  detect_polarization: x
environment:
  mean_gauss: [0.297223, 0.0, 0.0]
  sigma_gauss: 0.0
  n_samples: 1
"""

CLASSICAL_YAML = """
classical:
  environment:
    mean_gauss: [0.0, 0.0, 0.0]
    sigma_gauss: 0.05
    inhom_axis: x
    n_samples: 11
  gyro_rad_per_s_gauss: 2.0e+6
  mu0: y
  t_max_us: 10.0
  n_times: 101
  cases: [custom]
"""


def write_config(tmp_path, text, name="config.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def sha256(path):
    with open(path, "rb") as handle:
        return hashlib.sha256(handle.read()).hexdigest()


def run_simulate(tmp_path, extra=(), config_text=TINY_YAML, sub="run"):
    config = write_config(tmp_path, config_text)
    out = str(tmp_path / sub)
    code = main(["simulate", "--config", config, "--out", out, "--quiet", *extra])
    return code, out


def test_no_command_shows_help(capsys):
    assert main([]) == 2
    assert "simulate" in capsys.readouterr().out


def test_preset_list(capsys):
    assert main(["preset", "--list"]) == 0
    out = capsys.readouterr().out.split()
    assert "fig4" in out and "fig7" in out and "circular" in out


def test_simulate_outputs(tmp_path):
    code, out = run_simulate(tmp_path)
    assert code == 0
    for name in ("traces.csv", "peaks.csv", "manifest.json"):
        assert os.path.exists(os.path.join(out, name)), name

    header, columns = read_csv_columns(os.path.join(out, "traces.csv"))
    assert header == ("storage_time_us", "t_us", "amp_re", "amp_im", "intensity")
    traces = traces_from_columns(columns)
    assert len(traces) == 8
    lengths = {len(t.times) for t in traces}
    assert len(lengths) == 1
    for key, values in columns.items():
        assert np.all(np.isfinite(values)), key
    # reported intensity equals |amp|^2 row by row
    assert np.allclose(
        columns["intensity"], columns["amp_re"] ** 2 + columns["amp_im"] ** 2,
        rtol=1e-12, atol=1e-300,
    )
    # intensities are normalized to the first trace's maximum
    assert np.max(traces[0].intensity) == pytest.approx(1.0, rel=1e-12)

    _, peaks = read_csv_columns(os.path.join(out, "peaks.csv"))
    assert len(peaks["storage_time_us"]) == 8
    assert np.all(peaks["peak_intensity"] >= 0.0)

    with open(os.path.join(out, "manifest.json")) as handle:
        manifest = json.load(handle)
    assert manifest["tool"]["name"] == "zeemem"
    assert manifest["outputs"]["traces.csv"] == sha256(os.path.join(out, "traces.csv"))
    assert manifest["outputs"]["peaks.csv"] == sha256(os.path.join(out, "peaks.csv"))
    derived = manifest["derived"]
    assert derived["larmor_hz"] == pytest.approx(104e3, rel=1e-4)
    assert derived["larmor_period_s"] == pytest.approx(9.615e-6, rel=1e-3)


def test_simulate_deterministic(tmp_path):
    _, out_a = run_simulate(tmp_path, sub="a")
    _, out_b = run_simulate(tmp_path, sub="b")
    assert sha256(os.path.join(out_a, "traces.csv")) == sha256(
        os.path.join(out_b, "traces.csv")
    )
    assert sha256(os.path.join(out_a, "peaks.csv")) == sha256(
        os.path.join(out_b, "peaks.csv")
    )


def test_monte_carlo_seed_controls_output(tmp_path):
    text = TINY_YAML.replace("sigma_gauss: 0.0", "sigma_gauss: 0.05")
    base = ["--sampler", "mc", "--samples", "4"]
    _, out_a = run_simulate(tmp_path, base + ["--seed", "7"], text, sub="a")
    _, out_b = run_simulate(tmp_path, base + ["--seed", "7"], text, sub="b")
    _, out_c = run_simulate(tmp_path, base + ["--seed", "8"], text, sub="c")
    hash_a = sha256(os.path.join(out_a, "traces.csv"))
    assert hash_a == sha256(os.path.join(out_b, "traces.csv"))
    assert hash_a != sha256(os.path.join(out_c, "traces.csv"))


def test_overrides_recorded_in_manifest(tmp_path):
    extra = ["--samples", "3", "--sampler", "mc", "--seed", "11", "--sum", "incoherent"]
    code, out = run_simulate(
        tmp_path, extra, TINY_YAML.replace("sigma_gauss: 0.0", "sigma_gauss: 0.02")
    )
    assert code == 0
    with open(os.path.join(out, "manifest.json")) as handle:
        manifest = json.load(handle)
    env = manifest["config"]["environment"]
    assert env["n_samples"] == 3
    assert env["sampler"] == "monte_carlo"
    assert env["seed"] == 11
    assert manifest["seed"] == 11
    assert manifest["config"]["combine"] == "incoherent"


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "nope.yaml")]) == 2
    assert "error" in capsys.readouterr().err


def test_bad_config_exits_2(tmp_path, capsys):
    config = write_config(tmp_path, TINY_YAML + "\nbogus: 1\n")
    assert main(["simulate", "--config", config]) == 2
    assert "bogus" in capsys.readouterr().err


def test_classical_config_rejected_by_simulate(tmp_path, capsys):
    config = write_config(tmp_path, CLASSICAL_YAML)
    assert main(["simulate", "--config", config]) == 2
    capsys.readouterr()


def test_sweep_requires_sweep_list(tmp_path, capsys):
    config = write_config(tmp_path, TINY_YAML)
    assert main(["sweep", "--config", config, "--quiet"]) == 2
    assert "sweep_gauss" in capsys.readouterr().err


def test_sweep_outputs(tmp_path):
    text = TINY_YAML.replace(
        "  storage_times_us: [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]",
        "  storage_times_us: [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0,"
        " 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0]",
    ) + "sweep_gauss: [0.8, 1.2]\n"
    config = write_config(tmp_path, text)
    out = str(tmp_path / "swp")
    assert main(["sweep", "--config", config, "--out", out, "--quiet"]) == 0
    header, columns = read_csv_columns(os.path.join(out, "sweep.csv"))
    assert header == ("b_gauss", "freq_hz", "freq2_hz", "tau_us", "model")
    assert list(columns["b_gauss"]) == [0.8, 1.2]
    assert set(columns["model"]) <= {"exponential", "gaussian"}
    with open(os.path.join(out, "analysis.json")) as handle:
        payload = json.load(handle)
    assert payload["kind"] == "sweep"
    assert set(payload["line"]) == {"slope_hz_per_gauss", "intercept_hz", "r_squared"}


def test_classical_outputs(tmp_path):
    config = write_config(tmp_path, CLASSICAL_YAML)
    out = str(tmp_path / "cls")
    assert main(["classical", "--config", config, "--out", out, "--quiet"]) == 0
    header, columns = read_csv_columns(os.path.join(out, "classical.csv"))
    assert header == ("t_us", "Mx", "My", "Mz")
    assert len(columns["t_us"]) == 101
    assert columns["My"][0] == pytest.approx(1.0, abs=1e-12)
    magnitude = np.sqrt(columns["Mx"] ** 2 + columns["My"] ** 2 + columns["Mz"] ** 2)
    assert np.all(magnitude <= 1.0 + 1e-9)
    # zero mean field with a spread only dephases: |M|(t) = exp(-(gyro*sigma*t)^2/2)
    rate = 2.0e6 * 0.05
    assert magnitude[-1] == pytest.approx(math.exp(-((rate * 10e-6) ** 2) / 2.0), rel=1e-6)


def test_classical_named_cases(tmp_path):
    text = CLASSICAL_YAML.replace(
        "cases: [custom]", "cases: [none, z]\n  case_magnitude_gauss: 0.2"
    )
    config = write_config(tmp_path, text)
    out = str(tmp_path / "cls")
    assert main(["classical", "--config", config, "--out", out, "--quiet"]) == 0
    assert os.path.exists(os.path.join(out, "classical_none.csv"))
    assert os.path.exists(os.path.join(out, "classical_z.csv"))
    _, by_z = read_csv_columns(os.path.join(out, "classical_z.csv"))
    # a z mean field rotates the moment in the x-y plane
    assert np.max(np.abs(by_z["Mx"])) > 0.1
    assert np.max(np.abs(by_z["Mz"])) < 1e-9


def test_analyze_traces(tmp_path):
    _, out = run_simulate(tmp_path)
    ana = str(tmp_path / "ana")
    assert main(["analyze", os.path.join(out, "traces.csv"), "--out", ana, "--quiet"]) == 0
    assert os.path.exists(os.path.join(ana, "peaks.csv"))
    with open(os.path.join(ana, "analysis.json")) as handle:
        payload = json.load(handle)
    assert payload["kind"] == "traces"
    assert "envelope" in payload and "frequencies" in payload
    _, mine = read_csv_columns(os.path.join(ana, "peaks.csv"))
    _, orig = read_csv_columns(os.path.join(out, "peaks.csv"))
    assert np.allclose(mine["peak_intensity"], orig["peak_intensity"], rtol=1e-12)


def test_analyze_peaks(tmp_path):
    _, out = run_simulate(tmp_path)
    ana = str(tmp_path / "ana")
    assert main(["analyze", os.path.join(out, "peaks.csv"), "--out", ana, "--quiet"]) == 0
    with open(os.path.join(ana, "analysis.json")) as handle:
        payload = json.load(handle)
    assert payload["kind"] == "peaks"


def test_analyze_sweep_line(tmp_path):
    path = tmp_path / "sweep.csv"
    rows = ["b_gauss,freq_hz,freq2_hz,tau_us,model"]
    for b in (0.4, 0.8, 1.2):
        rows.append(f"{b},{349906.0 * b},0.0,10.0,gaussian")
    path.write_text("\n".join(rows) + "\n")
    ana = str(tmp_path / "ana")
    assert main(["analyze", str(path), "--out", ana, "--quiet"]) == 0
    with open(os.path.join(ana, "analysis.json")) as handle:
        payload = json.load(handle)
    assert payload["kind"] == "sweep"
    assert payload["line"]["slope_hz_per_gauss"] == pytest.approx(349906.0, rel=1e-9)
    assert payload["line"]["intercept_hz"] == pytest.approx(0.0, abs=1e-4)
    assert payload["line"]["r_squared"] == pytest.approx(1.0, abs=1e-12)


def test_analyze_classical(tmp_path):
    config = write_config(tmp_path, CLASSICAL_YAML)
    out = str(tmp_path / "cls")
    main(["classical", "--config", config, "--out", out, "--quiet"])
    ana = str(tmp_path / "ana")
    assert main(["analyze", os.path.join(out, "classical.csv"), "--out", ana, "--quiet"]) == 0
    with open(os.path.join(ana, "analysis.json")) as handle:
        payload = json.load(handle)
    assert payload["kind"] == "classical"
    # gaussian dephasing envelope with tau = sqrt(2)/(gyro * sigma)
    assert payload["envelope"]["model"] == "gaussian"
    expected_tau_us = math.sqrt(2.0) / (2.0e6 * 0.05) * 1e6
    assert payload["envelope"]["tau_us"] == pytest.approx(expected_tau_us, rel=0.05)


def test_analyze_unknown_header(tmp_path, capsys):
    path = tmp_path / "odd.csv"
    path.write_text("a,b\n1,2\n")
    assert main(["analyze", str(path)]) == 2
    assert "header" in capsys.readouterr().err


def test_analyze_missing_file(tmp_path, capsys):
    assert main(["analyze", str(tmp_path / "none.csv")]) == 2
    capsys.readouterr()


def test_preset_run_with_overrides(tmp_path):
    out = str(tmp_path / "fig4")
    code = main([
        "preset", "fig4", "--out", out, "--samples", "1", "--quiet",
    ])
    assert code == 0
    assert os.path.exists(os.path.join(out, "config.yaml"))
    assert os.path.exists(os.path.join(out, "traces.csv"))
    with open(os.path.join(out, "manifest.json")) as handle:
        manifest = json.load(handle)
    assert manifest["config"]["environment"]["n_samples"] == 1
    assert manifest["config"]["output_dir"] == out
