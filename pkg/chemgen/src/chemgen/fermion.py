"""Active-space reduction and second-quantized Hamiltonian assembly.

Spin orbitals are ordered with all up spins first (modes 0..M-1 map to the
active spatial orbitals), then all down spins (modes M..2M-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ActiveSpace", "active_space_integrals", "fermion_matrix", "number_sector_indices"]


@dataclass(frozen=True)
class ActiveSpace:
    core: tuple[int, ...]     # doubly occupied, frozen
    active: tuple[int, ...]   # spatial orbital indices kept
    n_active_electrons: int


def active_space_integrals(
    h_mo: np.ndarray, eri_mo: np.ndarray, e_nuclear: float, space: ActiveSpace
):
    """Frozen-core effective integrals: (e_core, h_eff[uv], (uv|wx) active)."""
    core = list(space.core)
    act = list(space.active)
    e_core = e_nuclear
    for i in core:
        e_core += 2.0 * h_mo[i, i]
        for j in core:
            e_core += 2.0 * eri_mo[i, i, j, j] - eri_mo[i, j, j, i]
    h_eff = np.empty((len(act), len(act)))
    for a, u in enumerate(act):
        for b, v in enumerate(act):
            val = h_mo[u, v]
            for i in core:
                val += 2.0 * eri_mo[u, v, i, i] - eri_mo[u, i, i, v]
            h_eff[a, b] = val
    eri_act = eri_mo[np.ix_(act, act, act, act)].copy()
    return float(e_core), h_eff, eri_act


def spin_orbital_terms(h_eff: np.ndarray, eri_act: np.ndarray):
    """One-/two-body spin-orbital coefficient tables.

    Returns (one_body[(p,q)] = c, two_body[(p,q,r,s)] = c) over spin-orbital
    mode indices, for H = sum c a+_p a_q + sum c a+_p a+_q a_r a_s with the
    two-body part in the normal-ordered a+ a+ a a form.
    """
    m = h_eff.shape[0]
    one = {}
    two = {}
    for p in range(m):
        for q in range(m):
            if abs(h_eff[p, q]) > 1e-14:
                one[(p, q)] = one.get((p, q), 0.0) + h_eff[p, q]
                one[(p + m, q + m)] = one.get((p + m, q + m), 0.0) + h_eff[p, q]
    # 1/2 sum_{pqrs, st} (pq|rs) a+_{p s} a+_{r t} a_{s' t} a_{q s}  (chemist)
    for p in range(m):
        for q in range(m):
            for r in range(m):
                for s in range(m):
                    g = eri_act[p, q, r, s]
                    if abs(g) < 1e-14:
                        continue
                    for sp1 in (0, 1):
                        for sp2 in (0, 1):
                            i = p + m * sp1
                            j = r + m * sp2
                            k = s + m * sp2
                            l = q + m * sp1
                            # 1/2 g a+_i a+_j a_k a_l
                            key = (i, j, k, l)
                            two[key] = two.get(key, 0.0) + 0.5 * g
    return one, two


def fermion_matrix(n_modes: int, one: dict, two: dict) -> np.ndarray:
    """Dense many-body matrix via bit-level fermionic operators.

    Occupation-number basis ordered with mode 0 as the most significant bit;
    sign convention (-1)^(number of occupied modes with index < p). This is
    an independent oracle for the Pauli-mapped Hamiltonians.
    """
    dim = 1 << n_modes
    out = np.zeros((dim, dim))

    def annihilate(state: int, p: int):
        bit = 1 << (n_modes - 1 - p)
        if not state & bit:
            return None, 0.0
        mask = ((1 << p) - 1) << (n_modes - p)
        sign = -1.0 if bin(state & mask).count("1") % 2 else 1.0
        return state ^ bit, sign

    def create(state: int, p: int):
        bit = 1 << (n_modes - 1 - p)
        if state & bit:
            return None, 0.0
        mask = ((1 << p) - 1) << (n_modes - p)
        sign = -1.0 if bin(state & mask).count("1") % 2 else 1.0
        return state ^ bit, sign

    for (p, q), c in one.items():
        for ket in range(dim):
            s1, sg1 = annihilate(ket, q)
            if s1 is None:
                continue
            s2, sg2 = create(s1, p)
            if s2 is None:
                continue
            out[s2, ket] += c * sg1 * sg2
    for (i, j, k, l), c in two.items():
        for ket in range(dim):
            s1, g1 = annihilate(ket, l)
            if s1 is None:
                continue
            s2, g2 = annihilate(s1, k)
            if s2 is None:
                continue
            s3, g3 = create(s2, j)
            if s3 is None:
                continue
            s4, g4 = create(s3, i)
            if s4 is None:
                continue
            out[s4, ket] += c * g1 * g2 * g3 * g4
    return out


def number_sector_indices(n_modes: int, n_up: int, n_dn: int) -> list[int]:
    """Occupation-basis indices with the given per-spin electron counts."""
    m = n_modes // 2
    out = []
    for state in range(1 << n_modes):
        bits = [(state >> (n_modes - 1 - p)) & 1 for p in range(n_modes)]
        if sum(bits[:m]) == n_up and sum(bits[m:]) == n_dn:
            out.append(state)
    return out
