"""Molecule specifications and geometry builders for the supported series."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import ANGSTROM_TO_BOHR, ATOMIC_NUMBER, build_basis
from .integrals import integral_tables
from .scf import RHFResult, run_rhf

__all__ = ["MoleculeSpec", "SUPPORTED", "build_molecule", "MoleculeData"]

SUPPORTED = ("H2", "HeH+", "LiH")


@dataclass(frozen=True)
class MoleculeSpec:
    """A diatomic on the z axis at a given bond length (Angstrom)."""

    name: str                      # H2 | HeH+ | LiH
    bond_length: float             # Angstrom
    basis: str = "sto-3g"
    mapping: str = "parity"        # parity (two-qubit reduction) | jordan-wigner
    # active-space reduction: "full" or "freeze-core-sigma" (LiH 4-qubit case)
    reduction: str = "full"

    def __post_init__(self):
        if self.name not in SUPPORTED:
            raise ValueError(f"unsupported molecule {self.name!r}")
        if self.bond_length <= 0:
            raise ValueError("bond length must be positive")
        if self.basis.lower() != "sto-3g":
            raise ValueError("only STO-3G is supported")
        if self.mapping not in ("parity", "jordan-wigner"):
            raise ValueError(f"unknown mapping {self.mapping!r}")

    @property
    def atoms(self) -> list[tuple[str, float]]:
        if self.name == "H2":
            return [("H", 0.0), ("H", self.bond_length)]
        if self.name == "HeH+":
            return [("He", 0.0), ("H", self.bond_length)]
        return [("Li", 0.0), ("H", self.bond_length)]

    @property
    def charge(self) -> int:
        return 1 if self.name == "HeH+" else 0

    @property
    def n_electrons(self) -> int:
        z_total = sum(ATOMIC_NUMBER[el] for el, _ in self.atoms)
        return z_total - self.charge


@dataclass(frozen=True)
class MoleculeData:
    """Integrals and RHF solution in the MO basis."""

    spec: MoleculeSpec
    rhf: RHFResult
    h_mo: np.ndarray       # one-electron MO integrals
    eri_mo: np.ndarray     # chemist (pq|rs) MO integrals
    e_nuclear: float
    basis_labels: list


def build_molecule(spec: MoleculeSpec) -> MoleculeData:
    geom = [
        (el, (0.0, 0.0, z * ANGSTROM_TO_BOHR)) for el, z in spec.atoms
    ]
    basis = build_basis(geom)
    charges = [
        (float(ATOMIC_NUMBER[el]), np.asarray(xyz)) for el, xyz in geom
    ]
    S, hcore, eri = integral_tables(basis, charges)
    e_nuc = 0.0
    for i in range(len(charges)):
        for j in range(i):
            zi, ci = charges[i]
            zj, cj = charges[j]
            e_nuc += zi * zj / np.linalg.norm(ci - cj)
    rhf = run_rhf(S, hcore, eri, spec.n_electrons, e_nuc)
    c = rhf.mo_coeff
    h_mo = c.T @ hcore @ c
    eri_mo = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri, c, c, c, c, optimize=True)
    return MoleculeData(
        spec=spec,
        rhf=rhf,
        h_mo=h_mo,
        eri_mo=eri_mo,
        e_nuclear=float(e_nuc),
        basis_labels=[bf.label for bf in basis],
    )
