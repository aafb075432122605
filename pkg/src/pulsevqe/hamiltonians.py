"""Qubit-mapped molecular Hamiltonians.

A Hamiltonian is a real-weighted sum of Pauli strings plus a constant
(identity) term carrying the nuclear repulsion, so every energy reported
here is a total molecular energy in Hartree.

Conventions:
    - Pauli strings index qubit 0 as the *leftmost* character.
    - Statevectors over n qubits index qubit 0 as the most significant bit,
      i.e. ``|b_0 b_1 ... b_{n-1}>`` lives at integer index
      ``sum(b_k << (n-1-k))``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "PauliTerm",
    "SpinPenalty",
    "QubitHamiltonian",
    "HamiltonianError",
    "HamiltonianParseError",
    "parse_hamiltonian",
    "load_hamiltonian",
    "serialize_hamiltonian",
    "apply_pauli_string",
    "pauli_expectation",
    "expectation",
    "exact_ground",
    "overlap_with_ground",
]

PAULI_CHARS = frozenset("IXYZ")

# Dense per-term matrices are cheap up to this qubit count; above it every
# Pauli string is applied as a signed permutation of the statevector.
DENSE_TERM_LIMIT = 6
# Dense diagonalization budget for exact_ground.
EXACT_DIAG_LIMIT = 12
# Eigenvalues within this of the minimum count as one degenerate ground space.
DEGENERACY_TOL = 1e-10

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


class HamiltonianError(ValueError):
    """Malformed or inconsistent Hamiltonian data."""


class HamiltonianParseError(HamiltonianError):
    """Hamiltonian document violates the file schema."""


@dataclass(frozen=True)
class PauliTerm:
    """One Pauli string with a real coefficient in Hartree."""

    pauli: str
    coeff: float

    def __post_init__(self):
        if not self.pauli or not set(self.pauli) <= PAULI_CHARS:
            raise HamiltonianError(
                f"invalid Pauli string {self.pauli!r}: alphabet is I, X, Y, Z"
            )
        if not np.isfinite(self.coeff):
            raise HamiltonianError(f"non-finite coefficient for {self.pauli!r}")


@dataclass(frozen=True)
class SpinPenalty:
    """Total-spin operator S^2 as Pauli terms, with penalty weight lambda."""

    lam: float
    terms: tuple[PauliTerm, ...]


@dataclass(frozen=True)
class QubitHamiltonian:
    """Validated qubit Hamiltonian: constant + sum_i coeff_i * pauli_i."""

    n_qubits: int
    constant: float
    terms: tuple[PauliTerm, ...]
    reference_state: str
    metadata: Mapping[str, Any] = field(default_factory=dict)
    spin_penalty: SpinPenalty | None = None

    def __post_init__(self):
        if self.n_qubits < 1:
            raise HamiltonianError("n_qubits must be positive")
        if not np.isfinite(self.constant):
            raise HamiltonianError("constant term must be finite")
        seen = set()
        for term in self.terms:
            if len(term.pauli) != self.n_qubits:
                raise HamiltonianError(
                    f"Pauli string {term.pauli!r} has length {len(term.pauli)}, "
                    f"expected {self.n_qubits}"
                )
            if term.pauli in seen:
                raise HamiltonianError(f"duplicate Pauli string {term.pauli!r}")
            seen.add(term.pauli)
        if len(self.reference_state) != self.n_qubits or not set(
            self.reference_state
        ) <= {"0", "1"}:
            raise HamiltonianError(
                f"reference_state {self.reference_state!r} must be a bitstring "
                f"of length {self.n_qubits}"
            )
        if self.spin_penalty is not None:
            for term in self.spin_penalty.terms:
                if len(term.pauli) != self.n_qubits:
                    raise HamiltonianError(
                        "spin_penalty terms must match n_qubits"
                    )

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @cached_property
    def reference_vector(self) -> np.ndarray:
        """The reference bitstring as a unit statevector."""
        vec = np.zeros(self.dim, dtype=complex)
        vec[int(self.reference_state, 2)] = 1.0
        return vec

    @cached_property
    def dense_terms(self) -> np.ndarray:
        """Dense matrix of the Pauli-sum part (no constant)."""
        return dense_pauli_sum(self.terms, self.n_qubits)

    @cached_property
    def _ground(self) -> tuple[np.ndarray, np.ndarray]:
        if self.n_qubits > EXACT_DIAG_LIMIT:
            raise HamiltonianError(
                f"exact diagonalization budget is {EXACT_DIAG_LIMIT} qubits, "
                f"got {self.n_qubits}"
            )
        energies, vectors = np.linalg.eigh(self.dense_terms)
        return energies + self.constant, vectors


def dense_pauli_sum(terms: Iterable[PauliTerm], n_qubits: int) -> np.ndarray:
    dim = 2**n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for term in terms:
        mat = np.array([[1.0 + 0.0j]])
        for ch in term.pauli:
            mat = np.kron(mat, _SINGLE[ch])
        out += term.coeff * mat
    return out


def apply_pauli_string(pauli: str, state: np.ndarray) -> np.ndarray:
    """Apply one Pauli string to a statevector as a signed permutation."""
    n = len(pauli)
    dim = 1 << n
    if state.shape != (dim,):
        raise HamiltonianError(
            f"state dimension {state.shape} does not match {n} qubits"
        )
    xmask = 0
    yzmask = 0
    n_y = 0
    for k, ch in enumerate(pauli):
        bit = 1 << (n - 1 - k)
        if ch in "XY":
            xmask |= bit
        if ch in "YZ":
            yzmask |= bit
        if ch == "Y":
            n_y += 1
    idx = np.arange(dim, dtype=np.uint64)
    signs = 1.0 - 2.0 * (
        np.bitwise_count(idx & np.uint64(yzmask)).astype(np.int64) & 1
    )
    out = np.empty(dim, dtype=complex)
    out[idx ^ np.uint64(xmask)] = ((1j) ** n_y) * signs * state
    return out


def pauli_expectation(
    state: np.ndarray, terms: Sequence[PauliTerm], n_qubits: int
) -> float:
    """<state| sum_i c_i P_i |state> without any normalization handling."""
    if state.shape != (2**n_qubits,):
        raise HamiltonianError(
            f"state dimension {state.shape} does not match {n_qubits} qubits"
        )
    if n_qubits <= DENSE_TERM_LIMIT:
        val = complex(np.vdot(state, dense_pauli_sum(terms, n_qubits) @ state))
    else:
        val = 0.0 + 0.0j
        for term in terms:
            val += term.coeff * np.vdot(state, apply_pauli_string(term.pauli, state))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val)):
        raise HamiltonianError(
            f"expectation has imaginary residue {val.imag:.3e}; state or terms invalid"
        )
    return float(val.real)


def expectation(state: np.ndarray, hamiltonian: QubitHamiltonian) -> float:
    """Total molecular energy <state|H|state> in Hartree for a unit-norm state."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (hamiltonian.dim,):
        raise HamiltonianError(
            f"state dimension {state.shape} does not match "
            f"{hamiltonian.n_qubits} qubits"
        )
    norm = float(np.linalg.norm(state))
    if abs(norm - 1.0) > 1e-10:
        raise HamiltonianError(
            f"state norm {norm!r} is not 1 within 1e-10; project and normalize first"
        )
    return hamiltonian.constant + pauli_expectation(
        state, hamiltonian.terms, hamiltonian.n_qubits
    )


def exact_ground(hamiltonian: QubitHamiltonian) -> tuple[float, np.ndarray]:
    """Lowest eigenvalue (constant included) and a unit eigenvector.

    The eigenvector phase is fixed so its largest-magnitude amplitude is
    real positive.
    """
    energies, vectors = hamiltonian._ground
    vec = vectors[:, 0].copy()
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    vec = vec / phase
    return float(energies[0]), vec


def overlap_with_ground(state: np.ndarray, hamiltonian: QubitHamiltonian) -> float:
    """Squared projection of `state` onto the (possibly degenerate) ground space."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (hamiltonian.dim,):
        raise HamiltonianError(
            f"state dimension {state.shape} does not match "
            f"{hamiltonian.n_qubits} qubits"
        )
    energies, vectors = hamiltonian._ground
    ground = energies <= energies[0] + DEGENERACY_TOL
    amps = vectors[:, ground].conj().T @ state
    return float(np.real(np.vdot(amps, amps)))


# ---------------------------------------------------------------------------
# File schema (UTF-8 JSON)
#
# {
#   "n_qubits": int,
#   "constant": float,
#   "terms": [{"pauli": "XXIZ", "coeff": -0.5}, ...],
#   "reference_state": "0101",            # optional, default all zeros
#   "metadata": {...},                    # optional
#   "spin_penalty": {"lambda": 0.0, "terms": [...]}   # optional
# }
# ---------------------------------------------------------------------------


def _parse_terms(raw: Any, where: str) -> tuple[PauliTerm, ...]:
    if not isinstance(raw, list):
        raise HamiltonianParseError(f"{where} must be an array")
    out = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or set(entry) != {"pauli", "coeff"}:
            raise HamiltonianParseError(
                f"{where}[{i}] must be an object with keys 'pauli' and 'coeff'"
            )
        try:
            out.append(PauliTerm(str(entry["pauli"]), float(entry["coeff"])))
        except (TypeError, ValueError, HamiltonianError) as exc:
            raise HamiltonianParseError(f"{where}[{i}]: {exc}") from exc
    return tuple(out)


def parse_hamiltonian(document: str | Mapping[str, Any]) -> QubitHamiltonian:
    """Parse and validate a Hamiltonian document (JSON text or mapping)."""
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise HamiltonianParseError(
                f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    else:
        doc = dict(document)
    if not isinstance(doc, dict):
        raise HamiltonianParseError("document root must be an object")
    for key in ("n_qubits", "constant", "terms"):
        if key not in doc:
            raise HamiltonianParseError(f"missing required field '{key}'")
    try:
        n_qubits = int(doc["n_qubits"])
        constant = float(doc["constant"])
    except (TypeError, ValueError) as exc:
        raise HamiltonianParseError(f"n_qubits/constant: {exc}") from exc
    terms = _parse_terms(doc["terms"], "terms")
    reference = doc.get("reference_state", "0" * n_qubits)
    penalty = None
    if doc.get("spin_penalty") is not None:
        raw = doc["spin_penalty"]
        if not isinstance(raw, dict) or "terms" not in raw:
            raise HamiltonianParseError(
                "spin_penalty must be an object with 'lambda' and 'terms'"
            )
        penalty = SpinPenalty(
            lam=float(raw.get("lambda", 0.0)),
            terms=_parse_terms(raw["terms"], "spin_penalty.terms"),
        )
    metadata = doc.get("metadata") or {}
    if not isinstance(metadata, dict):
        raise HamiltonianParseError("metadata must be an object")
    try:
        return QubitHamiltonian(
            n_qubits=n_qubits,
            constant=constant,
            terms=terms,
            reference_state=str(reference),
            metadata=metadata,
            spin_penalty=penalty,
        )
    except HamiltonianError as exc:
        raise HamiltonianParseError(str(exc)) from exc


def load_hamiltonian(path: str | Path) -> QubitHamiltonian:
    return parse_hamiltonian(Path(path).read_text(encoding="utf-8"))


def serialize_hamiltonian(hamiltonian: QubitHamiltonian) -> str:
    """Serialize to the JSON file schema; inverse of parse_hamiltonian."""
    doc: dict[str, Any] = {
        "n_qubits": hamiltonian.n_qubits,
        "constant": hamiltonian.constant,
        "terms": [
            {"pauli": t.pauli, "coeff": t.coeff} for t in hamiltonian.terms
        ],
        "reference_state": hamiltonian.reference_state,
    }
    if hamiltonian.metadata:
        doc["metadata"] = dict(hamiltonian.metadata)
    if hamiltonian.spin_penalty is not None:
        doc["spin_penalty"] = {
            "lambda": hamiltonian.spin_penalty.lam,
            "terms": [
                {"pauli": t.pauli, "coeff": t.coeff}
                for t in hamiltonian.spin_penalty.terms
            ],
        }
    return json.dumps(doc, indent=1)
