"""Molecular integrals over contracted Cartesian Gaussians (McMurchie-Davidson).

Supports arbitrary angular momentum via Hermite expansion coefficients and
Hermite Coulomb integrals; s and p shells are all STO-3G needs here. All
quantities in atomic units.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gamma, gammainc

from .basis import BasisFunction


def boys(n_max: int, x: float) -> np.ndarray:
    """Boys functions F_0..F_n at x, by downward recursion from F_n."""
    out = np.empty(n_max + 1)
    if x < 1e-12:
        for n in range(n_max + 1):
            out[n] = 1.0 / (2 * n + 1) - x / (2 * n + 3)
        return out
    if x > 35.0:
        # asymptotic start then downward recursion
        out[n_max] = (
            gamma(n_max + 0.5) / (2.0 * x ** (n_max + 0.5))
        )
    else:
        out[n_max] = (
            gammainc(n_max + 0.5, x) * gamma(n_max + 0.5) / (2.0 * x ** (n_max + 0.5))
        )
    ex = np.exp(-x)
    for n in range(n_max, 0, -1):
        out[n - 1] = (2.0 * x * out[n] + ex) / (2 * n - 1)
    return out


def hermite_e(i: int, j: int, qx: float, a: float, b: float) -> np.ndarray:
    """1D Hermite expansion coefficients E_t^{ij} for t = 0..i+j.

    qx = Ax - Bx; includes the Gaussian product prefactor exp(-mu qx^2).
    """
    p = a + b
    mu = a * b / p
    table = {}

    def E(ii, jj, t):
        if t < 0 or t > ii + jj:
            return 0.0
        if (ii, jj, t) in table:
            return table[(ii, jj, t)]
        if ii == jj == t == 0:
            val = np.exp(-mu * qx * qx)
        elif ii > 0:
            val = (
                E(ii - 1, jj, t - 1) / (2 * p)
                - (b / p) * qx * E(ii - 1, jj, t)
                + (t + 1) * E(ii - 1, jj, t + 1)
            )
        else:
            val = (
                E(ii, jj - 1, t - 1) / (2 * p)
                + (a / p) * qx * E(ii, jj - 1, t)
                + (t + 1) * E(ii, jj - 1, t + 1)
            )
        table[(ii, jj, t)] = val
        return val

    return np.array([E(i, j, t) for t in range(i + j + 1)])


def _overlap_prim(a, powers_a, A, b, powers_b, B) -> float:
    p = a + b
    val = (np.pi / p) ** 1.5
    for d in range(3):
        e = hermite_e(powers_a[d], powers_b[d], A[d] - B[d], a, b)
        val *= e[0]
    return val


def _kinetic_prim(a, powers_a, A, b, powers_b, B) -> float:
    # T = -1/2 Laplacian on ket; expressed through overlaps with shifted powers
    def ov(pb):
        if min(pb) < 0:
            return 0.0
        return _overlap_prim(a, powers_a, A, b, tuple(pb), B)

    i, j, k = powers_b
    term = b * (2 * (i + j + k) + 3) * ov((i, j, k))
    term -= 2 * b**2 * (
        ov((i + 2, j, k)) + ov((i, j + 2, k)) + ov((i, j, k + 2))
    )
    term -= 0.5 * (
        i * (i - 1) * ov((i - 2, j, k))
        + j * (j - 1) * ov((i, j - 2, k))
        + k * (k - 1) * ov((i, j, k - 2))
    )
    return term


def _hermite_coulomb(t, u, v, n, p, PC, F) -> float:
    """R^n_{tuv} by recursion; F holds Boys values at p*|PC|^2."""
    if t == u == v == 0:
        return (-2.0 * p) ** n * F[n]
    if t > 0:
        val = 0.0
        if t > 1:
            val += (t - 1) * _hermite_coulomb(t - 2, u, v, n + 1, p, PC, F)
        val += PC[0] * _hermite_coulomb(t - 1, u, v, n + 1, p, PC, F)
        return val
    if u > 0:
        val = 0.0
        if u > 1:
            val += (u - 1) * _hermite_coulomb(t, u - 2, v, n + 1, p, PC, F)
        val += PC[1] * _hermite_coulomb(t, u - 1, v, n + 1, p, PC, F)
        return val
    val = 0.0
    if v > 1:
        val += (v - 1) * _hermite_coulomb(t, u, v - 2, n + 1, p, PC, F)
    val += PC[2] * _hermite_coulomb(t, u, v - 1, n + 1, p, PC, F)
    return val


def _nuclear_prim(a, powers_a, A, b, powers_b, B, C) -> float:
    p = a + b
    P = (a * np.asarray(A) + b * np.asarray(B)) / p
    PC = P - np.asarray(C)
    la, ma, na = powers_a
    lb, mb, nb = powers_b
    ex = hermite_e(la, lb, A[0] - B[0], a, b)
    ey = hermite_e(ma, mb, A[1] - B[1], a, b)
    ez = hermite_e(na, nb, A[2] - B[2], a, b)
    n_max = la + lb + ma + mb + na + nb
    F = boys(n_max, p * float(PC @ PC))
    val = 0.0
    for t in range(la + lb + 1):
        for u in range(ma + mb + 1):
            for v in range(na + nb + 1):
                val += ex[t] * ey[u] * ez[v] * _hermite_coulomb(t, u, v, 0, p, PC, F)
    return 2.0 * np.pi / p * val


def _eri_prim(a, pa, A, b, pb, B, c, pc, C, d, pd, D) -> float:
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    P = (a * np.asarray(A) + b * np.asarray(B)) / p
    Q = (c * np.asarray(C) + d * np.asarray(D)) / q
    PQ = P - Q
    e1 = [hermite_e(pa[d_], pb[d_], A[d_] - B[d_], a, b) for d_ in range(3)]
    e2 = [hermite_e(pc[d_], pd[d_], C[d_] - D[d_], c, d) for d_ in range(3)]
    n_max = sum(pa) + sum(pb) + sum(pc) + sum(pd)
    F = boys(n_max, alpha * float(PQ @ PQ))
    val = 0.0
    for t in range(pa[0] + pb[0] + 1):
        for u in range(pa[1] + pb[1] + 1):
            for v in range(pa[2] + pb[2] + 1):
                etuv = e1[0][t] * e1[1][u] * e1[2][v]
                if etuv == 0.0:
                    continue
                for tt in range(pc[0] + pd[0] + 1):
                    for uu in range(pc[1] + pd[1] + 1):
                        for vv in range(pc[2] + pd[2] + 1):
                            e2f = e2[0][tt] * e2[1][uu] * e2[2][vv]
                            if e2f == 0.0:
                                continue
                            sign = (-1.0) ** (tt + uu + vv)
                            val += (
                                etuv
                                * e2f
                                * sign
                                * _hermite_coulomb(
                                    t + tt, u + uu, v + vv, 0, alpha, PQ, F
                                )
                            )
    return val * 2.0 * np.pi**2.5 / (p * q * np.sqrt(p + q))


def _contract2(f, bf1: BasisFunction, bf2: BasisFunction, *args) -> float:
    val = 0.0
    for a, ca in zip(bf1.exponents, bf1.coefficients):
        for b, cb in zip(bf2.exponents, bf2.coefficients):
            val += ca * cb * f(a, bf1.powers, bf1.center, b, bf2.powers, bf2.center, *args)
    return val


def overlap_contracted(bf1: BasisFunction, bf2: BasisFunction) -> float:
    return _contract2(_overlap_prim, bf1, bf2)


def kinetic_contracted(bf1: BasisFunction, bf2: BasisFunction) -> float:
    return _contract2(_kinetic_prim, bf1, bf2)


def nuclear_contracted(bf1: BasisFunction, bf2: BasisFunction, C) -> float:
    return _contract2(_nuclear_prim, bf1, bf2, C)


def eri_contracted(
    bf1: BasisFunction, bf2: BasisFunction, bf3: BasisFunction, bf4: BasisFunction
) -> float:
    val = 0.0
    for a, ca in zip(bf1.exponents, bf1.coefficients):
        for b, cb in zip(bf2.exponents, bf2.coefficients):
            for c, cc in zip(bf3.exponents, bf3.coefficients):
                for d, cd in zip(bf4.exponents, bf4.coefficients):
                    val += ca * cb * cc * cd * _eri_prim(
                        a, bf1.powers, bf1.center,
                        b, bf2.powers, bf2.center,
                        c, bf3.powers, bf3.center,
                        d, bf4.powers, bf4.center,
                    )
    return val


def integral_tables(basis: list[BasisFunction], charges: list[tuple[float, np.ndarray]]):
    """Overlap, core Hamiltonian and two-electron tensor (chemist (pq|rs))."""
    n = len(basis)
    S = np.empty((n, n))
    T = np.empty((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            S[i, j] = S[j, i] = overlap_contracted(basis[i], basis[j])
            T[i, j] = T[j, i] = kinetic_contracted(basis[i], basis[j])
            v = 0.0
            for Z, C in charges:
                v -= Z * nuclear_contracted(basis[i], basis[j], C)
            V[i, j] = V[j, i] = v
    eri = np.zeros((n, n, n, n))
    # 8-fold permutational symmetry
    pairs = [(i, j) for i in range(n) for j in range(i + 1)]
    for a, (i, j) in enumerate(pairs):
        for k, l in pairs[: a + 1]:
            val = eri_contracted(basis[i], basis[j], basis[k], basis[l])
            for p, q in ((i, j), (j, i)):
                for r, s in ((k, l), (l, k)):
                    eri[p, q, r, s] = val
                    eri[r, s, p, q] = val
    return S, T + V, eri
