import pathlib

import numpy as np
import pytest

from pulsevqe import load_device, load_hamiltonian, load_pulse_set

REPO = pathlib.Path(__file__).resolve().parents[1]
FIXTURES = REPO / "fixtures"


def fixture_path(*parts) -> pathlib.Path:
    return FIXTURES.joinpath(*parts)


@pytest.fixture(scope="session")
def h2_hamiltonian():
    return load_hamiltonian(fixture_path("hamiltonians", "h2_sto3g_parity_r0.75.json"))


@pytest.fixture(scope="session")
def lih_hamiltonian():
    return load_hamiltonian(fixture_path("hamiltonians", "lih_sto3g_4q_r1.50.json"))


@pytest.fixture(scope="session")
def device2():
    return load_device(fixture_path("devices", "device_tableI_2transmon.json"))


@pytest.fixture(scope="session")
def device4():
    return load_device(fixture_path("devices", "device_tableI.json"))


@pytest.fixture(scope="session")
def golden_pulse():
    return load_pulse_set(fixture_path("pulses", "h2_r0.75_t9_2seg.json"))


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)
