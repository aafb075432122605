import numpy as np
import pytest

from chemgen.fermion import (
    ActiveSpace,
    active_space_integrals,
    fermion_matrix,
    number_sector_indices,
    spin_orbital_terms,
)
from chemgen.molecules import MoleculeSpec, build_molecule
from chemgen.qubit_mapping import (
    PauliOperator,
    _jw_ladder,
    _parity_ladder,
    hf_bitstring,
    jordan_wigner,
    parity_mapping,
    reduce_two_qubits,
    spin_squared_operator,
)

_P = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense(op: PauliOperator) -> np.ndarray:
    dim = 2**op.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for s, c in op.items():
        m = np.array([[1.0 + 0.0j]])
        for ch in s:
            m = np.kron(m, _P[ch])
        out += c * m
    return out


@pytest.mark.parametrize("ladder", [_jw_ladder, _parity_ladder])
@pytest.mark.parametrize("n,j", [(1, 0), (2, 0), (2, 1), (3, 1), (4, 2)])
def test_ladder_anticommutation(ladder, n, j):
    a = dense(ladder(n, j, False))
    adag = dense(ladder(n, j, True))
    np.testing.assert_allclose(adag, a.conj().T, atol=1e-12)
    np.testing.assert_allclose(a @ adag + adag @ a, np.eye(2**n), atol=1e-12)
    np.testing.assert_allclose(a @ a, 0.0, atol=1e-12)


@pytest.mark.parametrize("ladder", [_jw_ladder, _parity_ladder])
def test_ladder_cross_anticommutation(ladder):
    n = 3
    for j in range(n):
        for k in range(j + 1, n):
            aj = dense(ladder(n, j, False))
            ak = dense(ladder(n, k, False))
            akd = dense(ladder(n, k, True))
            np.testing.assert_allclose(aj @ ak + ak @ aj, 0.0, atol=1e-12)
            np.testing.assert_allclose(aj @ akd + akd @ aj, 0.0, atol=1e-12)


def test_mappings_share_spectrum_h2():
    md = build_molecule(MoleculeSpec("H2", 0.75))
    space = ActiveSpace(core=(), active=(0, 1), n_active_electrons=2)
    e_core, h_eff, eri = active_space_integrals(md.h_mo, md.eri_mo, md.e_nuclear, space)
    one, two = spin_orbital_terms(h_eff, eri)
    jw = dense(jordan_wigner(4, one, two))
    par = dense(parity_mapping(4, one, two))
    fermi = fermion_matrix(4, one, two)
    e_jw = np.sort(np.linalg.eigvalsh(jw))
    e_par = np.sort(np.linalg.eigvalsh(par))
    e_fermi = np.sort(np.linalg.eigvalsh(fermi))
    np.testing.assert_allclose(e_jw, e_par, atol=1e-10)
    np.testing.assert_allclose(e_jw, e_fermi, atol=1e-10)


def test_reduction_reproduces_sector_ground_h2():
    md = build_molecule(MoleculeSpec("H2", 0.75))
    space = ActiveSpace(core=(), active=(0, 1), n_active_electrons=2)
    e_core, h_eff, eri = active_space_integrals(md.h_mo, md.eri_mo, md.e_nuclear, space)
    one, two = spin_orbital_terms(h_eff, eri)
    fermi = fermion_matrix(4, one, two)
    sector = number_sector_indices(4, 1, 1)
    e_sector = np.linalg.eigvalsh(fermi[np.ix_(sector, sector)])[0] + e_core
    red = reduce_two_qubits(parity_mapping(4, one, two), 1, 2)
    assert red.n_qubits == 2
    e_red = np.linalg.eigvalsh(dense(red))[0] + e_core
    assert e_red == pytest.approx(e_sector, abs=1e-10)


def test_reduction_rejects_nonconserving_operator():
    # a single creation operator flips the parity registers
    op = PauliOperator(4, dict(_parity_ladder(4, 0, True)))
    with pytest.raises(ValueError):
        reduce_two_qubits(op, 1, 2)


def test_spin_squared_eigenvalues_two_orbitals():
    one, two = spin_squared_operator(2)
    s2 = fermion_matrix(4, one, two)
    # two-electron Sz=0 sector: three singlets (S2=0) and one triplet (S2=2)
    sector = number_sector_indices(4, 1, 1)
    evals = np.sort(np.linalg.eigvalsh(s2[np.ix_(sector, sector)]))
    np.testing.assert_allclose(evals, [0.0, 0.0, 0.0, 2.0], atol=1e-10)


def test_spin_squared_reduces_cleanly():
    one, two = spin_squared_operator(2)
    red = reduce_two_qubits(parity_mapping(4, one, two), 1, 2)
    evals = np.sort(np.linalg.eigvalsh(dense(red)))
    np.testing.assert_allclose(evals, [0.0, 0.0, 0.0, 2.0], atol=1e-10)


def test_hf_bitstring_conventions():
    # 2 orbitals, 1 up + 1 down electron: occupations (1,0,1,0)
    assert hf_bitstring(4, 1, 1, "jordan-wigner", False) == "1010"
    # parity register: cumulative sums mod 2 -> (1,1,0,0); drop qubits 1 and 3
    assert hf_bitstring(4, 1, 1, "parity", False) == "1100"
    assert hf_bitstring(4, 1, 1, "parity", True) == "10"
    assert hf_bitstring(6, 1, 1, "parity", True) == "1100"
    with pytest.raises(ValueError):
        hf_bitstring(4, 1, 1, "jordan-wigner", True)
