import glob
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pulsevqe.hamiltonians import (
    HamiltonianError,
    HamiltonianParseError,
    PauliTerm,
    QubitHamiltonian,
    apply_pauli_string,
    dense_pauli_sum,
    exact_ground,
    expectation,
    load_hamiltonian,
    overlap_with_ground,
    parse_hamiltonian,
    serialize_hamiltonian,
)

from conftest import FIXTURES, random_state


def test_identity_only_hamiltonian():
    ham = parse_hamiltonian({"n_qubits": 2, "constant": 0.7, "terms": []})
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert expectation(random_state(4, rng), ham) == pytest.approx(0.7, abs=1e-12)


def test_single_z_term_on_reference():
    ham = parse_hamiltonian(
        {
            "n_qubits": 2,
            "constant": 0.25,
            "terms": [{"pauli": "ZI", "coeff": -1.0}],
            "reference_state": "00",
        }
    )
    assert expectation(ham.reference_vector, ham) == pytest.approx(-1.0 + 0.25)


def test_z_on_zero_state():
    ham = QubitHamiltonian(1, 0.0, (PauliTerm("Z", 0.5),), "0")
    state = np.array([1.0, 0.0], dtype=complex)
    assert expectation(state, ham) == pytest.approx(0.5)


def test_bell_state_xx():
    ham = QubitHamiltonian(2, 0.0, (PauliTerm("XX", 1.0),), "00")
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    assert expectation(bell, ham) == pytest.approx(1.0)


def test_expectation_rejects_unnormalized():
    ham = QubitHamiltonian(1, 0.0, (PauliTerm("Z", 1.0),), "0")
    with pytest.raises(HamiltonianError, match="norm"):
        expectation(np.array([1.0, 1.0], dtype=complex), ham)


def test_expectation_rejects_dimension_mismatch():
    ham = QubitHamiltonian(2, 0.0, (PauliTerm("ZZ", 1.0),), "00")
    with pytest.raises(HamiltonianError, match="dimension"):
        expectation(np.array([1.0, 0.0], dtype=complex), ham)


def test_exact_ground_identity_only():
    ham = parse_hamiltonian({"n_qubits": 2, "constant": 0.7, "terms": []})
    energy, state = exact_ground(ham)
    assert energy == pytest.approx(0.7)
    assert np.linalg.norm(state) == pytest.approx(1.0)


def test_exact_ground_single_z():
    ham = QubitHamiltonian(1, 0.0, (PauliTerm("Z", 1.0),), "0")
    energy, state = exact_ground(ham)
    assert energy == pytest.approx(-1.0)
    assert abs(state[1]) == pytest.approx(1.0)
    # phase fixed: largest amplitude real positive
    assert state[1].real > 0 and abs(state[1].imag) < 1e-12


def test_exact_ground_matches_expectation():
    rng = np.random.default_rng(3)
    terms = tuple(
        PauliTerm(p, float(rng.normal()))
        for p in ("ZI", "IZ", "XX", "YY", "ZZ", "XY")
    )
    ham = QubitHamiltonian(2, 0.3, terms, "00")
    energy, state = exact_ground(ham)
    assert expectation(state, ham) == pytest.approx(energy, abs=1e-10)


def test_variational_bound_random_states():
    rng = np.random.default_rng(11)
    terms = tuple(
        PauliTerm(p, float(rng.normal())) for p in ("ZI", "IX", "XX", "YZ")
    )
    ham = QubitHamiltonian(2, -0.2, terms, "00")
    e0, _ = exact_ground(ham)
    for _ in range(100):
        assert expectation(random_state(4, rng), ham) >= e0 - 1e-10


def test_expectation_linear_in_terms():
    rng = np.random.default_rng(5)
    paulis = ["ZI", "IZ", "XX", "YY", "XY", "ZX"]
    terms = tuple(PauliTerm(p, float(rng.normal())) for p in paulis)
    ham = QubitHamiltonian(2, 0.4, terms, "00")
    for _ in range(10):
        state = random_state(4, rng)
        k = int(rng.integers(1, len(terms)))
        h1 = QubitHamiltonian(2, 0.4, terms[:k], "00")
        h2 = QubitHamiltonian(2, 0.4, terms[k:], "00")
        combined = expectation(state, h1) + expectation(state, h2) - 0.4
        assert expectation(state, ham) == pytest.approx(combined, abs=1e-10)


def test_overlap_ground_state_itself():
    ham = QubitHamiltonian(2, 0.0, (PauliTerm("ZZ", -1.0), PauliTerm("XI", 0.3)), "00")
    _, state = exact_ground(ham)
    assert overlap_with_ground(state, ham) == pytest.approx(1.0, abs=1e-10)


def test_overlap_orthogonal_state():
    ham = QubitHamiltonian(1, 0.0, (PauliTerm("Z", 1.0),), "0")
    state = np.array([1.0, 0.0], dtype=complex)  # excited state of Z
    assert overlap_with_ground(state, ham) == pytest.approx(0.0, abs=1e-12)


def test_overlap_degenerate_ground_space():
    # ZZ has a two-fold degenerate ground space {|01>, |10>}
    ham = QubitHamiltonian(2, 0.0, (PauliTerm("ZZ", 1.0),), "00")
    plus = np.zeros(4, dtype=complex)
    plus[1] = plus[2] = 1 / np.sqrt(2)
    assert overlap_with_ground(plus, ham) == pytest.approx(1.0, abs=1e-10)
    mixed = np.zeros(4, dtype=complex)
    mixed[0] = mixed[1] = 1 / np.sqrt(2)
    assert overlap_with_ground(mixed, ham) == pytest.approx(0.5, abs=1e-10)


def test_apply_pauli_matches_dense():
    rng = np.random.default_rng(7)
    for pauli in ("XYZ", "ZZI", "YYY", "IXI", "ZXY"):
        state = random_state(8, rng)
        dense = dense_pauli_sum((PauliTerm(pauli, 1.0),), 3)
        np.testing.assert_allclose(
            apply_pauli_string(pauli, state), dense @ state, atol=1e-12
        )


def test_sparse_path_matches_dense_path_large():
    # n_qubits = 7 exercises the signed-permutation path
    rng = np.random.default_rng(9)
    paulis = ["XIZIYIX", "ZZZZZZZ", "IIIXYII"]
    terms = tuple(PauliTerm(p, float(rng.normal())) for p in paulis)
    ham = QubitHamiltonian(7, 0.1, terms, "0" * 7)
    state = random_state(128, rng)
    dense = dense_pauli_sum(terms, 7)
    direct = float(np.real(np.vdot(state, dense @ state))) + 0.1
    assert expectation(state, ham) == pytest.approx(direct, abs=1e-10)


def test_parse_rejects_duplicates():
    with pytest.raises(HamiltonianParseError, match="duplicate"):
        parse_hamiltonian(
            {
                "n_qubits": 1,
                "constant": 0.0,
                "terms": [
                    {"pauli": "Z", "coeff": 1.0},
                    {"pauli": "Z", "coeff": 0.5},
                ],
            }
        )


def test_parse_rejects_length_mismatch():
    with pytest.raises(HamiltonianParseError, match="length"):
        parse_hamiltonian(
            {"n_qubits": 2, "constant": 0.0, "terms": [{"pauli": "Z", "coeff": 1.0}]}
        )


def test_parse_names_bad_json_position():
    with pytest.raises(HamiltonianParseError, match="line"):
        parse_hamiltonian("{\n  broken\n}")


def test_parse_rejects_missing_field():
    with pytest.raises(HamiltonianParseError, match="n_qubits"):
        parse_hamiltonian({"constant": 0.0, "terms": []})


def test_roundtrip_fixture_files():
    for path in sorted(glob.glob(str(FIXTURES / "hamiltonians" / "*.json"))):
        ham = load_hamiltonian(path)
        again = parse_hamiltonian(serialize_hamiltonian(ham))
        assert again == ham
        # a second round trip is byte-identical
        assert serialize_hamiltonian(again) == serialize_hamiltonian(ham)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(
        st.sampled_from(["II", "ZI", "IZ", "XX", "YY", "ZZ", "XY", "YX"]),
        min_size=0,
        max_size=6,
        unique=True,
    ),
    st.floats(-2, 2, allow_nan=False),
)
def test_roundtrip_random_hamiltonians(paulis, constant):
    terms = tuple(PauliTerm(p, 0.25 + i) for i, p in enumerate(paulis))
    ham = QubitHamiltonian(2, constant, terms, "01", metadata={"tag": 1})
    assert parse_hamiltonian(serialize_hamiltonian(ham)) == ham


def test_fixture_fci_metadata(h2_hamiltonian, lih_hamiltonian):
    for ham in (h2_hamiltonian, lih_hamiltonian):
        energy, _ = exact_ground(ham)
        assert energy == pytest.approx(ham.metadata["fci_energy"], abs=1e-8)
        hf = expectation(ham.reference_vector, ham)
        assert hf == pytest.approx(ham.metadata["hf_energy"], abs=1e-8)


def test_exact_ground_budget():
    ham = QubitHamiltonian(13, 0.0, (), "0" * 13)
    with pytest.raises(HamiltonianError, match="budget"):
        exact_ground(ham)


def test_lih_reference_energies_match_published_values(lih_hamiltonian):
    hf = expectation(lih_hamiltonian.reference_vector, lih_hamiltonian)
    fci, _ = exact_ground(lih_hamiltonian)
    assert hf == pytest.approx(-7.8633576, abs=1e-6)
    assert fci == pytest.approx(-7.8810157, abs=1e-6)
