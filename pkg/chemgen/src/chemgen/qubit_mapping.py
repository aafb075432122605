"""Fermion-to-qubit mappings via Pauli-string algebra.

Pauli strings index qubit 0 as the leftmost character. Occupation and
parity registers put mode 0 on qubit 0. The parity mapping stores the
cumulative occupation parity p_j = (n_0 + ... + n_j) mod 2 on qubit j,
which makes the last up-spin qubit and the last qubit overall pure
symmetry registers that a particle- and spin-conserving Hamiltonian never
flips; the two-qubit reduction replaces their Z's by sector eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PauliOperator",
    "jordan_wigner",
    "parity_mapping",
    "reduce_two_qubits",
    "spin_squared_operator",
    "hf_bitstring",
]

_MULT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


class PauliOperator(dict):
    """Sparse sum of Pauli strings: {string: complex coefficient}."""

    n_qubits: int

    def __init__(self, n_qubits: int, data=None):
        super().__init__(data or {})
        self.n_qubits = n_qubits

    @classmethod
    def identity(cls, n_qubits: int, coeff=1.0):
        return cls(n_qubits, {"I" * n_qubits: coeff})

    @classmethod
    def zero(cls, n_qubits: int):
        return cls(n_qubits, {})

    def add_term(self, string: str, coeff):
        if abs(coeff) < 1e-16:
            return
        new = self.get(string, 0.0) + coeff
        if abs(new) < 1e-16:
            self.pop(string, None)
        else:
            self[string] = new

    def __add__(self, other: "PauliOperator"):
        out = PauliOperator(self.n_qubits, dict(self))
        for s, c in other.items():
            out.add_term(s, c)
        return out

    def __mul__(self, other):
        if np.isscalar(other):
            return PauliOperator(
                self.n_qubits, {s: c * other for s, c in self.items()}
            )
        out = PauliOperator.zero(self.n_qubits)
        for s1, c1 in self.items():
            for s2, c2 in other.items():
                phase = 1.0 + 0.0j
                chars = []
                for a, b in zip(s1, s2):
                    ph, ch = _MULT[(a, b)]
                    phase *= ph
                    chars.append(ch)
                out.add_term("".join(chars), c1 * c2 * phase)
        return out

    __rmul__ = __mul__

    def compressed(self, tol: float = 1e-12) -> "PauliOperator":
        return PauliOperator(
            self.n_qubits, {s: c for s, c in self.items() if abs(c) > tol}
        )

    def real_terms(self, tol: float = 1e-10):
        """(constant, {string: real coeff}) asserting Hermiticity."""
        const = 0.0
        terms = {}
        for s, c in self.items():
            if abs(c.imag) > tol:
                raise ValueError(f"non-real coefficient {c} on {s}")
            if s == "I" * self.n_qubits:
                const += c.real
            else:
                terms[s] = c.real
        return const, terms


def _string_with(n: int, entries: dict[int, str]) -> str:
    return "".join(entries.get(i, "I") for i in range(n))


def _jw_ladder(n: int, j: int, dagger: bool) -> PauliOperator:
    entries = {i: "Z" for i in range(j)}
    x = dict(entries)
    x[j] = "X"
    y = dict(entries)
    y[j] = "Y"
    sign = -0.5j if dagger else 0.5j
    return PauliOperator(
        n, {_string_with(n, x): 0.5, _string_with(n, y): sign}
    )


def _parity_ladder(n: int, j: int, dagger: bool) -> PauliOperator:
    chain = {i: "X" for i in range(j + 1, n)}
    x = dict(chain)
    x[j] = "X"
    if j > 0:
        x[j - 1] = "Z"
    y = dict(chain)
    y[j] = "Y"
    sign = -0.5j if dagger else 0.5j
    return PauliOperator(
        n, {_string_with(n, x): 0.5, _string_with(n, y): sign}
    )


def _map_terms(n_modes: int, one: dict, two: dict, ladder) -> PauliOperator:
    def a(j):
        return ladder(n_modes, j, False)

    def adag(j):
        return ladder(n_modes, j, True)

    out = PauliOperator.zero(n_modes)
    for (p, q), c in one.items():
        out = out + c * (adag(p) * a(q))
    for (i, j, k, l), c in two.items():
        out = out + c * (adag(i) * (adag(j) * (a(k) * a(l))))
    return out.compressed()


def jordan_wigner(n_modes: int, one: dict, two: dict) -> PauliOperator:
    return _map_terms(n_modes, one, two, _jw_ladder)


def parity_mapping(n_modes: int, one: dict, two: dict) -> PauliOperator:
    return _map_terms(n_modes, one, two, _parity_ladder)


def reduce_two_qubits(
    op: PauliOperator, n_up: int, n_total: int
) -> PauliOperator:
    """Drop the two parity-register qubits of a parity-mapped operator.

    Qubit M-1 (last up-spin mode) carries the up-spin parity and qubit 2M-1
    the total parity; their Z's become (-1)^n_up and (-1)^n_total.
    """
    n = op.n_qubits
    m = n // 2
    removed = (m - 1, n - 1)
    eig = {m - 1: (-1.0) ** n_up, n - 1: (-1.0) ** n_total}
    out = PauliOperator.zero(n - 2)
    for s, c in op.items():
        factor = 1.0
        kept = []
        for i, ch in enumerate(s):
            if i in removed:
                if ch == "Z":
                    factor *= eig[i]
                elif ch != "I":
                    raise ValueError(
                        f"operator does not commute with the parity registers: {s}"
                    )
            else:
                kept.append(ch)
        out.add_term("".join(kept), c * factor)
    return out.compressed()


def spin_squared_operator(m_active: int) -> tuple[dict, dict]:
    """S^2 = S_- S_+ + S_z (S_z + 1) as (one_body, two_body) mode tables.

    Expressed over the active space only (a frozen closed-shell core is a
    singlet and contributes nothing).
    """
    one: dict = {}
    two: dict = {}

    def add1(p, q, c):
        one[(p, q)] = one.get((p, q), 0.0) + c

    def add2(i, j, k, l, c):
        two[(i, j, k, l)] = two.get((i, j, k, l), 0.0) + c

    up = lambda p: p
    dn = lambda p: p + m_active

    # S_- S_+ = sum_pq a+_{p dn} a_{p up} a+_{q up} a_{q dn}
    #        = sum_p a+_{p dn} a_{p dn}  - sum_pq a+_{p dn} a+_{q up} a_{p up} a_{q dn}
    for p in range(m_active):
        add1(dn(p), dn(p), 1.0)
        for q in range(m_active):
            add2(dn(p), up(q), up(p), dn(q), -1.0)
    # S_z = 1/2 sum_p (n_up - n_dn)
    for p in range(m_active):
        add1(up(p), up(p), 0.5)
        add1(dn(p), dn(p), -0.5)
    # S_z^2 = 1/4 sum_pq (n_up_p - n_dn_p)(n_up_q - n_dn_q); normal order
    for p in range(m_active):
        for q in range(m_active):
            for sp, sgn1 in ((up, 1.0), (dn, -1.0)):
                for sq, sgn2 in ((up, 1.0), (dn, -1.0)):
                    c = 0.25 * sgn1 * sgn2
                    if sp(p) == sq(q):
                        # n_p n_p = n_p
                        add1(sp(p), sp(p), c)
                    else:
                        # n_p n_q = a+_p a+_q a_q a_p (p != q)
                        add2(sp(p), sq(q), sq(q), sp(p), c)
    return one, two


def hf_bitstring(
    n_modes: int, n_up: int, n_dn: int, mapping: str, reduced: bool
) -> str:
    """Reference-determinant register contents for the chosen encoding.

    The lowest n_up up modes and n_dn down modes are occupied (active-space
    orbitals are energy ordered).
    """
    m = n_modes // 2
    occ = [1 if p < n_up else 0 for p in range(m)]
    occ += [1 if p < n_dn else 0 for p in range(m)]
    if mapping == "jordan-wigner":
        bits = occ
    else:
        bits = list(np.cumsum(occ) % 2)
    if reduced:
        if mapping != "parity":
            raise ValueError("two-qubit reduction applies to the parity mapping")
        bits = [b for i, b in enumerate(bits) if i not in (m - 1, n_modes - 1)]
    return "".join(str(int(b)) for b in bits)
