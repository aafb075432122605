"""Generate qubit-Hamiltonian fixture files in the simulator's JSON schema."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fermion import (
    ActiveSpace,
    active_space_integrals,
    fermion_matrix,
    number_sector_indices,
    spin_orbital_terms,
)
from .molecules import MoleculeData, MoleculeSpec, build_molecule
from .qubit_mapping import (
    PauliOperator,
    hf_bitstring,
    jordan_wigner,
    parity_mapping,
    reduce_two_qubits,
    spin_squared_operator,
)

__all__ = ["generate", "generate_series", "build_qubit_hamiltonian"]

_P = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _dense(op: PauliOperator) -> np.ndarray:
    dim = 2**op.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for s, c in op.items():
        m = np.array([[1.0 + 0.0j]])
        for ch in s:
            m = np.kron(m, _P[ch])
        out += c * m
    return out


def _active_space(spec: MoleculeSpec, md: MoleculeData) -> tuple[ActiveSpace, str]:
    if spec.name in ("H2", "HeH+"):
        return ActiveSpace(core=(), active=(0, 1), n_active_electrons=2), "full"
    if spec.reduction not in ("full", "freeze-core-sigma"):
        raise ValueError(f"unsupported reduction {spec.reduction!r}")
    # LiH: freeze the 1-sigma core and keep the sigma-symmetry orbitals
    # (the degenerate pi pair has no sigma coupling at first order and is
    # dropped); reproduces the reference FCI for the 4-qubit register.
    mo = md.rhf.mo_coeff
    # pi MOs live entirely on the Li p_x / p_y AOs (basis order: Li 1s, 2s,
    # 2px, 2py, 2pz, H 1s)
    pi_weight = np.abs(mo[2]) + np.abs(mo[3])
    sigma = [i for i in range(mo.shape[1]) if pi_weight[i] < 1e-6]
    if len(sigma) < 4:
        raise ValueError("failed to classify LiH sigma orbitals")
    active = tuple(sigma[1:4])
    return (
        ActiveSpace(core=(sigma[0],), active=active, n_active_electrons=2),
        "freeze-core-sigma(2e,3o)",
    )


def build_qubit_hamiltonian(spec: MoleculeSpec) -> dict:
    """Full fixture document (dict) for a molecule spec, with verification.

    The reported fci_energy is the dense ground energy of the emitted qubit
    operator, cross-checked against an independent bit-level fermionic
    matrix restricted to the physical particle-number sector.
    """
    md = build_molecule(spec)
    space, reduction_label = _active_space(spec, md)
    e_core, h_eff, eri_act = active_space_integrals(
        md.h_mo, md.eri_mo, md.e_nuclear, space
    )
    one, two = spin_orbital_terms(h_eff, eri_act)
    m = len(space.active)
    n_modes = 2 * m
    n_up = n_dn = space.n_active_electrons // 2

    if spec.mapping == "parity":
        mapped = parity_mapping(n_modes, one, two)
        op = reduce_two_qubits(mapped, n_up, n_up + n_dn)
        reduced = True
    else:
        op = jordan_wigner(n_modes, one, two)
        reduced = False
    const_mapped, terms = op.real_terms()
    constant = e_core + const_mapped

    # independent verification: fermionic sector ground state
    fermi = fermion_matrix(n_modes, one, two)
    sector = number_sector_indices(n_modes, n_up, n_dn)
    e_fci_oracle = float(
        np.linalg.eigvalsh(fermi[np.ix_(sector, sector)])[0] + e_core
    )
    dense_op = _dense(op)  # includes the mapped identity coefficient
    e_fci = float(np.linalg.eigvalsh(dense_op)[0] + e_core)
    if abs(e_fci - e_fci_oracle) > 1e-8:
        raise RuntimeError(
            f"mapped ground energy {e_fci} disagrees with the fermionic "
            f"oracle {e_fci_oracle}"
        )

    reference = hf_bitstring(n_modes, n_up, n_dn, spec.mapping, reduced)
    e_hf = float(dense_op[int(reference, 2), int(reference, 2)].real + e_core)
    if abs(e_hf - md.rhf.energy) > 1e-8:
        raise RuntimeError(
            f"reference-register energy {e_hf} disagrees with RHF {md.rhf.energy}"
        )

    s2_one, s2_two = spin_squared_operator(m)
    if spec.mapping == "parity":
        s2_op = reduce_two_qubits(
            parity_mapping(n_modes, s2_one, s2_two), n_up, n_up + n_dn
        )
    else:
        s2_op = jordan_wigner(n_modes, s2_one, s2_two)
    s2_const, s2_terms = s2_op.real_terms()

    n_qubits = op.n_qubits
    doc = {
        "n_qubits": n_qubits,
        "constant": constant,
        "terms": [
            {"pauli": s, "coeff": c}
            for s, c in sorted(terms.items())
        ],
        "reference_state": reference,
        "metadata": {
            "molecule": spec.name,
            "bond_length_angstrom": spec.bond_length,
            "basis": "STO-3G",
            "mapping": (
                "parity+two-qubit-reduction" if spec.mapping == "parity"
                else "jordan-wigner"
            ),
            "reduction": reduction_label,
            "n_electrons_active": space.n_active_electrons,
            "hf_energy": md.rhf.energy,
            "fci_energy": e_fci,
            "generator": "chemgen-0.1.0",
        },
        "spin_penalty": {
            "lambda": 0.0,
            "terms": (
                [{"pauli": "I" * n_qubits, "coeff": s2_const}] if abs(s2_const) > 1e-12 else []
            ) + [
                {"pauli": s, "coeff": c} for s, c in sorted(s2_terms.items())
            ],
        },
    }
    return doc


def fixture_filename(spec: MoleculeSpec) -> str:
    tag = {"H2": "h2", "HeH+": "heh+", "LiH": "lih"}[spec.name]
    if spec.name == "LiH":
        return f"{tag}_sto3g_4q_r{spec.bond_length:.2f}.json"
    return f"{tag}_sto3g_parity_r{spec.bond_length:.2f}.json"


def generate(spec: MoleculeSpec, out_path: str | Path) -> Path:
    doc = build_qubit_hamiltonian(spec)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(doc, indent=1), encoding="utf-8")
    return out_path


def generate_series(
    name: str, bond_lengths: list[float], out_dir: str | Path
) -> list[Path]:
    out_dir = Path(out_dir)
    written = []
    for r in bond_lengths:
        spec = MoleculeSpec(name, float(r))
        written.append(generate(spec, out_dir / fixture_filename(spec)))
    return written
