"""Restricted Hartree-Fock for tiny closed-shell systems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = ["RHFResult", "run_rhf"]


@dataclass(frozen=True)
class RHFResult:
    energy: float          # total (electronic + nuclear), Hartree
    mo_coeff: np.ndarray   # AO x MO
    mo_energies: np.ndarray
    n_occ: int             # doubly occupied orbitals
    e_nuclear: float


def run_rhf(
    S: np.ndarray,
    hcore: np.ndarray,
    eri: np.ndarray,
    n_electrons: int,
    e_nuclear: float,
    max_cycles: int = 200,
    tol: float = 1e-12,
) -> RHFResult:
    if n_electrons % 2:
        raise ValueError("closed-shell RHF needs an even electron count")
    n_occ = n_electrons // 2
    x = scipy.linalg.fractional_matrix_power(S, -0.5).real

    def fock(dm):
        j = np.einsum("pqrs,rs->pq", eri, dm)
        k = np.einsum("prqs,rs->pq", eri, dm)
        return hcore + j - 0.5 * k

    def density(f):
        fp = x @ f @ x
        energies, cp = np.linalg.eigh(fp)
        c = x @ cp
        occ = c[:, :n_occ]
        return 2.0 * occ @ occ.T, c, energies

    dm, c, mo_e = density(hcore)
    e_old = 0.0
    for _ in range(max_cycles):
        f = fock(dm)
        e_elec = 0.5 * np.sum(dm * (hcore + f))
        dm_new, c, mo_e = density(f)
        if abs(e_elec - e_old) < tol and np.max(np.abs(dm_new - dm)) < 1e-10:
            dm = dm_new
            break
        e_old = e_elec
        dm = dm_new
    f = fock(dm)
    e_elec = 0.5 * np.sum(dm * (hcore + f))
    return RHFResult(
        energy=float(e_elec + e_nuclear),
        mo_coeff=c,
        mo_energies=mo_e,
        n_occ=n_occ,
        e_nuclear=float(e_nuclear),
    )
