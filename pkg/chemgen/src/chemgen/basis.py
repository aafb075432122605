"""STO-3G basis data and contracted Gaussian shells for H, He, Li.

Exponents and contraction coefficients are the published STO-3G values
(already scaled per element). Contracted functions are renormalized
numerically, matching standard electronic-structure packages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# shell: (angular momentum l, [exponents], [coefficients])
STO3G = {
    "H": [
        (0, [3.42525091, 0.62391373, 0.16885540],
            [0.15432897, 0.53532814, 0.44463454]),
    ],
    "He": [
        (0, [6.36242139, 1.15892300, 0.31364979],
            [0.15432897, 0.53532814, 0.44463454]),
    ],
    "Li": [
        (0, [16.11957475, 2.93620067, 0.79465050],
            [0.15432897, 0.53532814, 0.44463454]),
        (0, [0.63628970, 0.14786010, 0.04808870],
            [-0.09996723, 0.39951283, 0.70011547]),
        (1, [0.63628970, 0.14786010, 0.04808870],
            [0.15591627, 0.60768372, 0.39195739]),
    ],
}

ATOMIC_NUMBER = {"H": 1, "He": 2, "Li": 3}

ANGSTROM_TO_BOHR = 1.0 / 0.529177210903


@dataclass(frozen=True)
class BasisFunction:
    """One contracted Cartesian Gaussian: x^i y^j z^k exp(-a r^2) sums."""

    center: tuple[float, float, float]
    powers: tuple[int, int, int]
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]  # include primitive norms; renormalized
    label: str = ""


def _primitive_norm(alpha: float, powers: tuple[int, int, int]) -> float:
    i, j, k = powers
    fact2 = lambda n: 1.0 if n < 2 else float(np.prod(np.arange(n, 0, -2)))
    num = (2 * alpha / np.pi) ** 0.75 * (4 * alpha) ** ((i + j + k) / 2)
    den = np.sqrt(fact2(2 * i - 1) * fact2(2 * j - 1) * fact2(2 * k - 1))
    return num / den


def build_basis(atoms: list[tuple[str, tuple[float, float, float]]]) -> list[BasisFunction]:
    """Contracted basis for a list of (element, xyz-in-bohr) atoms."""
    from .integrals import overlap_contracted

    funcs: list[BasisFunction] = []
    for element, xyz in atoms:
        if element not in STO3G:
            raise ValueError(f"no STO-3G data for element {element!r}")
        for l, exps, coeffs in STO3G[element]:
            powers_list = [(0, 0, 0)] if l == 0 else [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
            for powers in powers_list:
                prim = [
                    c * _primitive_norm(a, powers) for a, c in zip(exps, coeffs)
                ]
                bf = BasisFunction(
                    center=tuple(xyz),
                    powers=powers,
                    exponents=tuple(exps),
                    coefficients=tuple(prim),
                    label=f"{element}_l{l}_{powers}",
                )
                # renormalize the contraction
                s = overlap_contracted(bf, bf)
                bf = BasisFunction(
                    center=bf.center,
                    powers=bf.powers,
                    exponents=bf.exponents,
                    coefficients=tuple(c / np.sqrt(s) for c in prim),
                    label=bf.label,
                )
                funcs.append(bf)
    return funcs
