"""Coupled-transmon device model in a truncated Fock space.

All frequencies (omega, delta, g, drive frequencies) are stored as plain
GHz numbers and understood as angular frequencies in units of 2*pi*GHz;
the 2*pi shows up only where matrices meet time (propagators, frame
phases), so matrix elements printed here match the device parameters
directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

__all__ = [
    "Coupling",
    "TransmonDevice",
    "StaticSpectrum",
    "DeviceError",
    "build_static_hamiltonian",
    "lowering_operator",
    "eigendecompose_static",
    "parse_device",
    "load_device",
    "serialize_device",
    "ring_device",
]

# Dimension budget m^N for dense device matrices.
DIMENSION_BUDGET = 3**6


class DeviceError(ValueError):
    """Invalid device description or over-budget request."""


@dataclass(frozen=True)
class Coupling:
    pair: tuple[int, int]
    g: float


@dataclass(frozen=True)
class TransmonDevice:
    """N transmons with always-on pairwise couplings.

    levels is the Fock truncation per transmon (default 3).
    """

    n_transmons: int
    omega: tuple[float, ...]
    delta: tuple[float, ...]
    couplings: tuple[Coupling, ...]
    levels: int = 3

    def __post_init__(self):
        n = self.n_transmons
        if n < 1:
            raise DeviceError("n_transmons must be positive")
        if self.levels < 2:
            raise DeviceError("levels must be at least 2")
        if len(self.omega) != n or len(self.delta) != n:
            raise DeviceError("omega and delta must have one entry per transmon")
        if any(w <= 0 for w in self.omega) or any(d <= 0 for d in self.delta):
            raise DeviceError("omega and delta entries must be positive")
        seen = set()
        for c in self.couplings:
            k, l = c.pair
            if not (0 <= k < n and 0 <= l < n) or k == l:
                raise DeviceError(f"coupling pair {c.pair} invalid for N={n}")
            key = frozenset(c.pair)
            if key in seen:
                raise DeviceError(f"duplicate coupling pair {c.pair}")
            seen.add(key)

    @property
    def dim(self) -> int:
        return self.levels**self.n_transmons

    @cached_property
    def static_hamiltonian(self) -> np.ndarray:
        return build_static_hamiltonian(self)

    @cached_property
    def spectrum(self) -> "StaticSpectrum":
        return eigendecompose_static(self)


@dataclass(frozen=True)
class StaticSpectrum:
    """Eigendecomposition of the static device Hamiltonian.

    energies ascending; basis_change columns are eigenvectors in the bare
    Fock product basis.
    """

    energies: np.ndarray
    basis_change: np.ndarray


def _single_mode_lowering(levels: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), k=1).astype(complex)


def lowering_operator(device: TransmonDevice, k: int) -> np.ndarray:
    """I x ... x a x ... x I with the single-mode lowering operator in slot k."""
    if not 0 <= k < device.n_transmons:
        raise DeviceError(f"transmon index {k} out of range")
    a = _single_mode_lowering(device.levels)
    out = np.array([[1.0 + 0.0j]])
    for slot in range(device.n_transmons):
        out = np.kron(out, a if slot == k else np.eye(device.levels, dtype=complex))
    return out


def build_static_hamiltonian(device: TransmonDevice) -> np.ndarray:
    """H_D = sum_k (omega_k n_k - delta_k/2 n_k(n_k-1)) + sum_<kl> g (a_k+ a_l + h.c.)

    Returned in GHz units (no 2*pi) in the bare Fock product basis.
    """
    if device.dim > DIMENSION_BUDGET:
        raise DeviceError(
            f"dimension {device.dim} exceeds budget {DIMENSION_BUDGET}"
        )
    dim = device.dim
    h = np.zeros((dim, dim), dtype=complex)
    lowering = [lowering_operator(device, k) for k in range(device.n_transmons)]
    for k in range(device.n_transmons):
        a = lowering[k]
        n_op = a.conj().T @ a
        h += device.omega[k] * n_op
        h -= 0.5 * device.delta[k] * (n_op @ n_op - n_op)
    for c in device.couplings:
        k, l = c.pair
        cross = lowering[k].conj().T @ lowering[l]
        h += c.g * (cross + cross.conj().T)
    return h


def eigendecompose_static(device: TransmonDevice) -> StaticSpectrum:
    h = build_static_hamiltonian(device)
    energies, vectors = np.linalg.eigh(h)
    energies = energies.copy()
    vectors = vectors.copy()
    energies.setflags(write=False)
    vectors.setflags(write=False)
    return StaticSpectrum(energies=energies, basis_change=vectors)


def total_number_operator(device: TransmonDevice) -> np.ndarray:
    dim = device.dim
    out = np.zeros((dim, dim), dtype=complex)
    for k in range(device.n_transmons):
        a = lowering_operator(device, k)
        out += a.conj().T @ a
    return out


def ring_device(
    omega: Sequence[float],
    delta: Sequence[float],
    g: Sequence[float] | float,
    levels: int = 3,
) -> TransmonDevice:
    """Closed linear chain: k <-> k+1 for all k, plus N-1 <-> 0 when N >= 3.

    For N = 2 a single coupling is used.
    """
    n = len(omega)
    if n == 1:
        pairs: list[tuple[int, int]] = []
    elif n == 2:
        pairs = [(0, 1)]
    else:
        pairs = [(k, (k + 1) % n) for k in range(n)]
    gs = [g] * len(pairs) if np.isscalar(g) else list(g)
    if len(gs) != len(pairs):
        raise DeviceError(f"expected {len(pairs)} coupling rates, got {len(gs)}")
    return TransmonDevice(
        n_transmons=n,
        omega=tuple(float(w) for w in omega),
        delta=tuple(float(d) for d in delta),
        couplings=tuple(Coupling(pair=p, g=float(gv)) for p, gv in zip(pairs, gs)),
        levels=levels,
    )


# ---------------------------------------------------------------------------
# Device file schema (JSON): n_transmons, levels, omega[], delta[],
# couplings[{"pair": [k, l], "g": float}]
# ---------------------------------------------------------------------------


def parse_device(document: str | Mapping[str, Any]) -> TransmonDevice:
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise DeviceError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    else:
        doc = dict(document)
    try:
        couplings = tuple(
            Coupling(pair=(int(c["pair"][0]), int(c["pair"][1])), g=float(c["g"]))
            for c in doc.get("couplings", [])
        )
        return TransmonDevice(
            n_transmons=int(doc["n_transmons"]),
            omega=tuple(float(w) for w in doc["omega"]),
            delta=tuple(float(d) for d in doc["delta"]),
            couplings=couplings,
            levels=int(doc.get("levels", 3)),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise DeviceError(f"invalid device document: {exc}") from exc


def load_device(path: str | Path) -> TransmonDevice:
    return parse_device(Path(path).read_text(encoding="utf-8"))


def serialize_device(device: TransmonDevice) -> str:
    return json.dumps(
        {
            "n_transmons": device.n_transmons,
            "levels": device.levels,
            "omega": list(device.omega),
            "delta": list(device.delta),
            "couplings": [
                {"pair": list(c.pair), "g": c.g} for c in device.couplings
            ],
        },
        indent=1,
    )
