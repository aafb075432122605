import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from pulsevqe.cli import main

from conftest import fixture_path

H2 = str(fixture_path("hamiltonians", "h2_sto3g_parity_r0.75.json"))
LIH = str(fixture_path("hamiltonians", "lih_sto3g_4q_r1.50.json"))
DEV2 = str(fixture_path("devices", "device_tableI_2transmon.json"))
GOLDEN = str(fixture_path("pulses", "h2_r0.75_t9_2seg.json"))


def read_csv(path):
    with open(path) as f:
        first = f.readline()
        assert first.startswith("# schema_version=")
        return list(csv.DictReader(f))


def test_exact_lih(capsys):
    assert main(["exact", "--hamiltonian", LIH]) == 0
    out = capsys.readouterr().out
    hf = float(out.split("HF  energy:")[1].split()[0])
    fci = float(out.split("FCI energy:")[1].split()[0])
    assert hf == pytest.approx(-7.8633576, abs=1e-6)
    assert fci == pytest.approx(-7.8810157, abs=1e-6)


def test_exact_identity_hamiltonian(tmp_path, capsys):
    doc = {"n_qubits": 1, "constant": 0.7, "terms": []}
    path = tmp_path / "ident.json"
    path.write_text(json.dumps(doc))
    assert main(["exact", "--hamiltonian", str(path)]) == 0
    out = capsys.readouterr().out
    hf = float(out.split("HF  energy:")[1].split()[0])
    fci = float(out.split("FCI energy:")[1].split()[0])
    assert hf == fci == pytest.approx(0.7)


def test_exact_missing_file(capsys):
    assert main(["exact", "--hamiltonian", "/nonexistent/x.json"]) == 2
    err = capsys.readouterr().err
    assert "/nonexistent/x.json" in err


def test_evolve_zero_pulse_trajectory(tmp_path, capsys):
    pulse = {
        "kind": "square",
        "total_time": 9.0,
        "pulses": [
            {"freq": 4.808, "amps": [0.0], "switch_times": []},
            {"freq": 4.8333, "amps": [0.0], "switch_times": []},
        ],
    }
    ppath = tmp_path / "zero.json"
    ppath.write_text(json.dumps(pulse))
    code = main([
        "evolve", "--hamiltonian", H2, "--device", DEV2, "--pulse", str(ppath),
        "--snapshots", "100", "--out", str(tmp_path),
    ])
    assert code == 0
    rows = read_csv(tmp_path / "trajectory.csv")
    assert len(rows) == int(np.floor(9.0 / (0.01 * 100))) + 1
    hf = -1.1161514489369575
    for row in rows:
        assert float(row["energy_hartree"]) == pytest.approx(hf, abs=1e-9)
        assert float(row["leakage"]) == pytest.approx(0.0, abs=1e-12)


def test_evolve_golden_pulse(tmp_path, capsys):
    code = main([
        "evolve", "--hamiltonian", H2, "--device", DEV2, "--pulse", GOLDEN,
        "--snapshots", "50", "--out", str(tmp_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    err_line = [l for l in out.splitlines() if "error vs FCI" in l][0]
    assert abs(float(err_line.split(":")[1].split()[0])) <= 1e-4
    rows = read_csv(tmp_path / "trajectory.csv")
    energies = np.array([float(r["energy_hartree"]) for r in rows])
    # trajectory rises above the reference energy before converging
    assert energies.max() > energies[0] + 1e-4
    assert abs(float(rows[-1]["energy_error_vs_fci"])) <= 1e-4


def test_optimize_seed_reproducible(tmp_path):
    args = [
        "optimize", "--hamiltonian", H2, "--device", DEV2,
        "--segments", "1", "--total-time", "9.0", "--dt", "0.02",
        "--starts", "2", "--max-iters", "15", "--seed", "5",
    ]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    rec1 = json.loads((out1 / "optimization.json").read_text())
    rec2 = json.loads((out2 / "optimization.json").read_text())
    assert rec1 == rec2
    assert rec1["schema_version"] == 1
    assert (out1 / "optimized_pulse.json").exists()
    assert (out1 / "trace.csv").exists()


def test_adapt_writes_segment_table(tmp_path):
    code = main([
        "adapt", "--hamiltonian", H2, "--device", DEV2,
        "--total-time", "9.0", "--dt", "0.02", "--max-segments", "2",
        "--target-error", "1e-12", "--n1-starts", "2", "--max-iters", "15",
        "--seed", "3", "--out", str(tmp_path),
    ])
    assert code == 0
    rows = read_csv(tmp_path / "adapt_segments.csv")
    assert [int(r["n_segments"]) for r in rows] == [1, 2]
    assert (tmp_path / "adapt_n1.json").exists()
    assert (tmp_path / "optimized_pulse.json").exists()


def test_noise_sigma_zero_exact(tmp_path, capsys):
    code = main([
        "noise", "--hamiltonian", H2, "--device", DEV2, "--pulse", GOLDEN,
        "--sigmas", "0", "--samples", "5", "--seed", "1", "--out", str(tmp_path),
    ])
    assert code == 0
    rows = read_csv(tmp_path / "noise.csv")
    assert len(rows) == 1
    # golden pulse error is at machine precision; sigma=0 reproduces it exactly
    assert abs(float(rows[0]["mean_error_hartree"])) < 1e-12
    assert float(rows[0]["stderr_hartree"]) == 0.0


def test_noise_monotone_tail(tmp_path):
    code = main([
        "noise", "--hamiltonian", H2, "--device", DEV2, "--pulse", GOLDEN,
        "--sigmas", "1e-3", "1e-2", "--samples", "20", "--seed", "2",
        "--out", str(tmp_path),
    ])
    assert code == 0
    rows = read_csv(tmp_path / "noise.csv")
    means = [float(r["mean_error_hartree"]) for r in rows]
    assert means[1] > means[0]


def random_pulse_file(tmp_path, seed=8, name="rand.json"):
    rng = np.random.default_rng(seed)
    pulse = {
        "kind": "square",
        "total_time": 9.0,
        "pulses": [
            {
                "freq": w + float(rng.uniform(-0.1, 0.1)),
                "amps": [float(a) for a in rng.uniform(-0.02, 0.02, 2)],
                "switch_times": [float(rng.uniform(1.0, 8.0))],
            }
            for w in (4.808, 4.8333)
        ],
    }
    path = tmp_path / name
    path.write_text(json.dumps(pulse))
    return str(path)


def test_gradcheck_pass_and_fail_codes(tmp_path):
    rand = random_pulse_file(tmp_path)
    code = main([
        "gradcheck", "--hamiltonian", H2, "--device", DEV2, "--pulse", rand,
        "--out", str(tmp_path),
    ])
    assert code == 0
    assert (tmp_path / "gradcheck.csv").exists()
    # an absurdly tight threshold must fail with exit code 1
    code = main([
        "gradcheck", "--hamiltonian", H2, "--device", DEV2, "--pulse", rand,
        "--threshold", "1e-18", "--abs-floor", "1e-30",
    ])
    assert code == 1


def test_gradcheck_zero_amplitude_freq_entries(tmp_path, capsys):
    pulse = {
        "kind": "square",
        "total_time": 9.0,
        "pulses": [
            {"freq": 4.808, "amps": [0.0, 0.0], "switch_times": [4.5]},
            {"freq": 4.8333, "amps": [0.0, 0.0], "switch_times": [4.5]},
        ],
    }
    ppath = tmp_path / "zero2.json"
    ppath.write_text(json.dumps(pulse))
    code = main([
        "gradcheck", "--hamiltonian", H2, "--device", DEV2, "--pulse", str(ppath),
    ])
    assert code == 0
    out = capsys.readouterr().out
    for line in out.splitlines():
        if "freq" in line:
            assert "analytic= 0.000000e+00" in line


def test_console_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "pulsevqe.cli", "--help"],
        capture_output=True, text=True,
    )
    # argparse --help exits 0 via SystemExit
    assert result.returncode == 0
    assert "exact" in result.stdout and "gradcheck" in result.stdout


def test_scan_single_fixture(tmp_path):
    code = main([
        "scan", "--hamiltonian", H2, "--hamiltonians", H2, "--device", DEV2,
        "--segments", "2", "--durations", "9.0", "--starts", "2",
        "--max-iters", "25", "--dt", "0.02", "--seed", "1",
        "--target-error", "0.5", "--out", str(tmp_path),
    ])
    assert code == 0
    rows = read_csv(tmp_path / "scan.csv")
    assert len(rows) == 1
    assert set(rows[0].keys()) == {
        "r_angstrom", "e_hf", "e_ctrlvqe", "e_fci", "error", "leakage",
        "overlap", "pulse_T",
    }
    assert float(rows[0]["r_angstrom"]) == pytest.approx(0.75)
