"""End-to-end smoke tests for the python bindings and the command-line tool."""

import json
import math
import os
import pathlib
import subprocess

import numpy as np
import pytest

import oamturb


CLI = os.environ.get("OAMTURB_CLI", "")

needs_cli = pytest.mark.skipif(
    not (CLI and pathlib.Path(CLI).exists()),
    reason="OAMTURB_CLI does not point at the built binary",
)


def run_cli(*args, **kwargs):
    return subprocess.run([CLI, *args], capture_output=True, text=True, **kwargs)


def test_version():
    assert oamturb.__version__ == "1.0.0"


def test_fried_parameter_closed_form():
    r0 = oamturb.fried_parameter(cn2=1e-15, wavelength_m=1.55e-6, path_m=6700.0)
    assert r0 == pytest.approx(0.09998, rel=1e-3)
    strength = oamturb.scintillation_strength(0.1, 1e-15, 1.55e-6, 6700.0)
    assert strength == pytest.approx(0.1 / r0, rel=1e-12)
    assert oamturb.fried_from_strength(0.1, strength) == pytest.approx(r0, rel=1e-12)


def test_decay_distance_reference_points():
    assert oamturb.decay_distance(1, 0.1, 1.55e-6, 1e-15) == pytest.approx(6690.85, abs=1.0)
    assert oamturb.decay_distance(7, 0.1, 1.55e-6, 1e-15) == pytest.approx(33863.3, abs=1.0)
    with pytest.raises(ValueError):
        oamturb.decay_distance(0, 0.1, 1.55e-6, 1e-15)


def test_kolmogorov_reference():
    assert oamturb.kolmogorov_structure(0.05, 0.05) == pytest.approx(6.88)


def test_lg_mode_is_unit_power():
    n, window = 256, 0.8
    mode = oamturb.lg_mode(l=2, p=0, waist_m=0.1, wavelength_m=1.55e-6,
                           grid_samples=n, window_m=window)
    assert mode.shape == (n, n)
    pitch = window / n
    power = float(np.sum(np.abs(mode) ** 2) * pitch**2)
    assert power == pytest.approx(1.0, abs=1e-9)


def test_phase_screens_are_deterministic():
    a1, a2 = oamturb.phase_screen_pair(64, 0.64, 0.05, seed=7)
    b1, _ = oamturb.phase_screen_pair(64, 0.64, 0.05, seed=7)
    c1, _ = oamturb.phase_screen_pair(64, 0.64, 0.05, seed=8)
    assert a1.shape == (64, 64)
    assert np.array_equal(a1, b1)
    assert not np.array_equal(a1, c1)
    assert not np.array_equal(a1, a2)
    with pytest.raises(ValueError):
        oamturb.phase_screen_pair(64, 0.64, 0.001, seed=1)  # below resolution floor


def test_structure_function_shape():
    screens = []
    for seed in range(10):
        t1, t2 = oamturb.phase_screen_pair(64, 0.64, 0.05, seed=seed)
        screens += [t1, t2]
    r, d = oamturb.structure_function(np.stack(screens), pitch_m=0.01)
    assert len(r) == len(d) > 4
    assert r[0] == pytest.approx(0.01)
    assert all(v > 0 for v in d)


def test_concurrence_oracles():
    bell = np.zeros((4, 4), dtype=complex)
    for i in (0, 3):
        for j in (0, 3):
            bell[i, j] = 0.5
    assert oamturb.concurrence(bell) == pytest.approx(1.0, abs=1e-7)

    werner = 0.6 * bell + 0.4 * np.eye(4) / 4.0
    assert oamturb.concurrence(werner) == pytest.approx(0.4, abs=1e-9)
    assert oamturb.concurrence(np.eye(4) / 4.0) == pytest.approx(0.0, abs=1e-12)

    repaired = oamturb.project_to_physical(1.1 * bell - 0.1 * np.eye(4) / 4.0)
    assert np.trace(repaired).real == pytest.approx(1.0, abs=1e-12)


def test_run_sweep_zero_turbulence():
    result = oamturb.run_sweep(scenario="two_photon", q_values=[1], strengths=[0.0],
                               ensemble=30, grid_samples=128, bootstrap=0)
    assert result["scenario"] == "two_photon"
    assert result["fit"] is None
    (point,) = result["points"]
    assert point["q"] == 1
    assert point["concurrence"] == pytest.approx(1.0, abs=1e-6)
    assert point["n_effective"] == 30
    crosstalk = np.asarray(point["crosstalk"])
    assert crosstalk.shape == (3, 3)
    assert crosstalk[2, 0] + crosstalk[0, 2] == pytest.approx(1.0, abs=1e-6)
    density = np.asarray(point["density"])
    assert density[1, 1].real == pytest.approx(0.5, abs=1e-6)


def test_crosstalk_matrix_zero_turbulence():
    p = oamturb.crosstalk_matrix(2, 0.0, ensemble=2, seed=1)
    assert p.shape == (5, 5)
    assert np.trace(np.fliplr(p)) == pytest.approx(1.0, abs=1e-4)


@needs_cli
def test_cli_decay_table():
    proc = run_cli("decay-table")
    assert proc.returncode == 0
    assert "6.7" in proc.stdout
    assert "L_dec" in proc.stdout


@needs_cli
def test_cli_sweep_roundtrip(tmp_path):
    config = {
        "scenario": "two_photon",
        "q_values": [1],
        "strengths": [0.0],
        "ensemble": 30,
        "grid_samples": 128,
        "bootstrap": 0,
    }
    config_path = tmp_path / "sweep.json"
    config_path.write_text(json.dumps(config))

    out_a = tmp_path / "a"
    proc = run_cli("sweep", "--config", str(config_path), "--out", str(out_a))
    assert proc.returncode == 0, proc.stderr

    csvs = list(out_a.glob("sweep-*.csv"))
    manifests = list(out_a.glob("sweep-*.manifest.json"))
    assert len(csvs) == 1 and len(manifests) == 1
    lines = csvs[0].read_text().splitlines()
    assert lines[0] == "scenario,q,strength,concurrence,stderr,N"
    scenario, q, strength, concurrence, stderr, n = lines[1].split(",")
    assert scenario == "two_photon"
    assert math.isclose(float(concurrence), 1.0, abs_tol=1e-6)
    assert n == "30"

    manifest = json.loads(manifests[0].read_text())
    assert manifest["command"] == "sweep"
    assert manifest["seed"] == 1
    assert csvs[0].name in manifest["artifacts"]
    assert manifest["config_hash"] in csvs[0].name

    # A different worker count must reproduce the same bytes under the same name.
    out_b = tmp_path / "b"
    proc = run_cli("sweep", "--config", str(config_path), "--workers", "3",
                   "--out", str(out_b))
    assert proc.returncode == 0, proc.stderr
    csvs_b = list(out_b.glob("sweep-*.csv"))
    assert csvs_b[0].name == csvs[0].name
    assert csvs_b[0].read_bytes() == csvs[0].read_bytes()


@needs_cli
def test_cli_rejects_unknown_keys(tmp_path):
    config_path = tmp_path / "bad.json"
    config_path.write_text('{\n "ensembel": 100\n}')
    proc = run_cli("sweep", "--config", str(config_path))
    assert proc.returncode == 2
    assert "ensembel" in proc.stderr
    assert ":2" in proc.stderr


@needs_cli
def test_cli_screens_and_resolution_exit_code(tmp_path):
    config_path = tmp_path / "screens.json"
    config_path.write_text(json.dumps({
        "count": 2, "grid_samples": 64, "window_m": 0.64, "fried_m": 0.05, "max_lag": 8,
    }))
    proc = run_cli("screens", "--config", str(config_path), "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    assert list(tmp_path.glob("screens-*.bin"))
    csv = list(tmp_path.glob("screens-*.csv"))[0].read_text().splitlines()
    assert csv[0] == "separation_m,measured,reference"

    config_path.write_text(json.dumps({
        "count": 2, "grid_samples": 64, "window_m": 0.64, "fried_m": 0.015,
    }))
    proc = run_cli("screens", "--config", str(config_path), "--out", str(tmp_path))
    assert proc.returncode == 3


@needs_cli
def test_cli_env_var_supplies_output_root(tmp_path):
    config_path = tmp_path / "crosstalk.json"
    config_path.write_text(json.dumps({
        "q_max": 1, "strengths": [0.0], "ensemble": 2, "grid_samples": 128,
    }))
    env = dict(os.environ, OAMTURB_OUT=str(tmp_path / "from_env"))
    proc = subprocess.run([CLI, "crosstalk", "--config", str(config_path)],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    bundles = list((tmp_path / "from_env").glob("crosstalk-*.json"))
    bundles = [b for b in bundles if ".manifest." not in b.name]
    assert len(bundles) == 1
    data = json.loads(bundles[0].read_text())
    matrix = np.asarray(data["matrices"][0]["probability"])
    assert matrix.shape == (3, 3)
    assert np.trace(np.fliplr(matrix)) == pytest.approx(1.0, abs=1e-4)
