"""Numba kernels for the Trotterized time stepping and its adjoint sweep.

States are propagated in the eigenbasis of the static device Hamiltonian
("dressed coordinates"), where the interaction-frame transform
exp(+i 2pi H_D t) ... exp(-i 2pi H_D t) is an elementwise phase. Each step
applies exp(-i 2pi dt M(t_mid)) to the state via a norm-controlled Taylor
series (with scaling-and-squaring for large steps), where M is the
time-averaged drive generator over the step: the average of every matrix
element's carrier+frame phase is taken in closed form, which shows up as a
sinc factor baked into `amasked` per step-length class.

Energies in GHz, times in ns; 2*pi applied inside the exponent.
"""

from __future__ import annotations

import numpy as np
from numba import njit

TWOPI = 2.0 * np.pi
_TAYLOR_TOL = 1e-15
_MAX_TAYLOR = 40


@njit(cache=True)
def _build_generator(
    M, cls, tmid, energies, amps_s, nus, amasked, amasked_dag, static_h, frame_phases
):
    """Fill M with the averaged step generator at midpoint time tmid (GHz units).

    Returns an upper bound on the 1-norm scale of the drive part (for the
    Taylor scaling decision).
    """
    n = M.shape[0]
    nk = nus.shape[0]
    w = np.empty(nk, dtype=np.complex128)
    any_drive = False
    for k in range(nk):
        if amps_s[k] == 0.0:
            w[k] = 0.0
        else:
            w[k] = amps_s[k] * np.exp(1j * TWOPI * nus[k] * tmid)
            any_drive = True
    if any_drive:
        a2 = amasked[cls].reshape(nk, n * n)
        ad2 = amasked_dag[cls].reshape(nk, n * n)
        flat = np.dot(w, a2) + np.dot(np.conj(w), ad2)
        P = flat.reshape(n, n)
    else:
        P = np.zeros((n, n), dtype=np.complex128)
    if frame_phases:
        ev = np.exp(1j * TWOPI * tmid * energies)
        evc = np.conj(ev)
        for i in range(n):
            for j in range(n):
                M[i, j] = static_h[i, j] + ev[i] * P[i, j] * evc[j]
    else:
        for i in range(n):
            for j in range(n):
                M[i, j] = static_h[i, j] + P[i, j]


@njit(cache=True)
def _drive_scale(amps_s, opnorm):
    acc = 0.0
    for k in range(amps_s.shape[0]):
        acc += abs(amps_s[k])
    return 2.0 * acc * opnorm


@njit(cache=True)
def _expm_apply(M, v, scale_im, dt, bnorm):
    """exp(-1j * scale_im * dt * M) @ v by Taylor with scaling-and-squaring.

    bnorm is an upper bound on ||M|| (any submultiplicative norm scale).
    """
    b = abs(scale_im) * dt * bnorm
    halvings = 0
    while b > 0.5 and halvings < 40:
        b *= 0.5
        halvings += 1
    nsub = 1 << halvings
    coeff = -1j * scale_im * dt / nsub
    n = v.shape[0]
    y = v.copy()
    for _ in range(nsub):
        term = y.copy()
        out = y.copy()
        for order in range(1, _MAX_TAYLOR + 1):
            term = np.dot(M, term) * (coeff / order)
            out = out + term
            tmax = 0.0
            for i in range(n):
                t = abs(term[i].real) + abs(term[i].imag)
                if t > tmax:
                    tmax = t
            if tmax < _TAYLOR_TOL:
                break
        y = out
    return y


@njit(cache=True)
def _norm(v):
    acc = 0.0
    for i in range(v.shape[0]):
        acc += v[i].real * v[i].real + v[i].imag * v[i].imag
    return np.sqrt(acc)


@njit(cache=True)
def _projected_energy_leakage(psi_bare, comp_idx, hq, constant):
    """Normalized computational-subspace energy and leakage of a bare state."""
    nc = comp_idx.shape[0]
    y = np.empty(nc, dtype=np.complex128)
    nrm2 = 0.0
    for c in range(nc):
        y[c] = psi_bare[comp_idx[c]]
        nrm2 += y[c].real * y[c].real + y[c].imag * y[c].imag
    total = 0.0
    for i in range(psi_bare.shape[0]):
        total += psi_bare[i].real * psi_bare[i].real + psi_bare[i].imag * psi_bare[i].imag
    leak = 1.0 - nrm2 / total
    if nrm2 < 1e-300:
        return np.nan, leak
    e = 0.0 + 0.0j
    for i in range(nc):
        acc = 0.0 + 0.0j
        for j in range(nc):
            acc += hq[i, j] * y[j]
        e += np.conj(y[i]) * acc
    return e.real / nrm2 + constant, leak


@njit(cache=True)
def _snapshot_state(psi, t, energies, vmat, vmat_h, frame_phases):
    """Interaction-frame bare-basis state at time t for either stepping frame."""
    if frame_phases:
        return np.dot(vmat, psi)
    phi = np.dot(vmat_h, psi)
    phi = phi * np.exp(1j * TWOPI * energies * t)
    return np.dot(vmat, phi)


@njit(cache=True)
def evolve_kernel(
    psi0,
    energies,
    vmat,
    vmat_h,
    amasked,
    amasked_dag,
    static_h,
    static_norm,
    op_norm,
    frame_phases,
    step_cls,
    step_dt,
    step_tmid,
    amps,
    nus,
    snap_after,
    comp_idx,
    hq,
    constant,
    store_states,
):
    """Sequential Trotter stepping; returns final state, drift, snapshots, states.

    psi0 and the returned states are in dressed coordinates when
    frame_phases is True (interaction frame) and in the bare basis otherwise
    (lab frame, static_h = H_D). Snapshots are always reported in
    interaction-frame bare-basis semantics.
    """
    n = psi0.shape[0]
    n_steps = step_dt.shape[0]
    n_snap = snap_after.shape[0]
    states = np.zeros((n_steps + 1 if store_states else 1, n), dtype=np.complex128)
    snap_t = np.zeros(n_snap)
    snap_e = np.zeros(n_snap)
    snap_l = np.zeros(n_snap)
    M = np.empty((n, n), dtype=np.complex128)
    psi = psi0.copy()
    if store_states:
        states[0] = psi
    drift = 0.0
    snap_ptr = 0
    t_elapsed = 0.0
    while snap_ptr < n_snap and snap_after[snap_ptr] == 0:
        psi_bare = _snapshot_state(psi, t_elapsed, energies, vmat, vmat_h, frame_phases)
        e, l = _projected_energy_leakage(psi_bare, comp_idx, hq, constant)
        snap_t[snap_ptr] = t_elapsed
        snap_e[snap_ptr] = e
        snap_l[snap_ptr] = l
        snap_ptr += 1
    for s in range(n_steps):
        _build_generator(
            M,
            step_cls[s],
            step_tmid[s],
            energies,
            amps[:, s],
            nus,
            amasked,
            amasked_dag,
            static_h,
            frame_phases,
        )
        bnorm = _drive_scale(amps[:, s], op_norm) + static_norm
        psi = _expm_apply(M, psi, TWOPI, step_dt[s], bnorm)
        t_elapsed += step_dt[s]
        d = abs(_norm(psi) - 1.0)
        if d > drift:
            drift = d
        if store_states:
            states[s + 1] = psi
        while snap_ptr < n_snap and snap_after[snap_ptr] == s + 1:
            psi_bare = _snapshot_state(
                psi, t_elapsed, energies, vmat, vmat_h, frame_phases
            )
            e, l = _projected_energy_leakage(psi_bare, comp_idx, hq, constant)
            snap_t[snap_ptr] = t_elapsed
            snap_e[snap_ptr] = e
            snap_l[snap_ptr] = l
            snap_ptr += 1
    return psi, drift, snap_t, snap_e, snap_l, states


@njit(cache=True)
def gradient_kernel(
    states,
    seed,
    energies,
    amasked,
    amasked_dag,
    dmasked,
    dmasked_dag,
    op_norm,
    step_cls,
    step_dt,
    step_tmid,
    amps,
    nus,
    with_correction,
    compute_nu,
):
    """Adjoint sweep for the interaction-frame evolution.

    states: cached per-step states (dressed coordinates) from the forward
    pass; seed: dE/d(conj psi_final) in dressed coordinates. dmasked carries
    the nu-derivative of the sinc averaging mask (used when compute_nu).
    Returns d_amp[k, s] = dE/dOmega_k(t_s) and d_nu[k] = dE/dnu_k.
    """
    n = seed.shape[0]
    n_steps = step_dt.shape[0]
    nk = nus.shape[0]
    d_amp = np.zeros((nk, n_steps))
    d_nu = np.zeros(nk)
    M = np.empty((n, n), dtype=np.complex128)
    static_zero = np.zeros((n, n), dtype=np.complex128)
    lam = seed.copy()
    for s in range(n_steps - 1, -1, -1):
        dt = step_dt[s]
        tmid = step_tmid[s]
        cls = step_cls[s]
        _build_generator(
            M, cls, tmid, energies, amps[:, s], nus, amasked, amasked_dag,
            static_zero, True,
        )
        psi_next = states[s + 1]
        ev = np.exp(1j * TWOPI * tmid * energies)
        evc = np.conj(ev)
        psi_rot = evc * psi_next
        lam_rot = evc * lam
        if with_correction:
            mpsi = np.dot(M, psi_next)
            mlam = np.dot(M, lam)
        else:
            mpsi = psi_next
            mlam = lam
        for k in range(nk):
            ck = np.exp(1j * TWOPI * nus[k] * tmid)
            A = amasked[cls, k]
            Ad = amasked_dag[cls, k]
            # u_plus = W psi, u_minus = W^dag psi with W = ck * diag(ev) A diag(ev)^*
            u_plus = ck * (ev * np.dot(A, psi_rot))
            u_minus = np.conj(ck) * (ev * np.dot(Ad, psi_rot))
            z0 = np.vdot(lam, u_plus)
            z0m = np.vdot(lam, u_minus)
            z_amp = z0 + z0m
            if with_correction:
                g_lam_p = ck * (ev * np.dot(A, lam_rot))
                g_lam_m = np.conj(ck) * (ev * np.dot(Ad, lam_rot))
                # -(i/2) * 2pi*dt * (<M lam|G psi> - <G lam|M psi>)
                corr_amp = (
                    np.vdot(mlam, u_plus + u_minus)
                    - np.vdot(g_lam_p + g_lam_m, mpsi)
                )
                z_amp += (-0.5j * TWOPI * dt) * corr_amp
            d_amp[k, s] = TWOPI * dt * 2.0 * z_amp.imag
            if compute_nu:
                z_nu = 1j * TWOPI * tmid * (z0 - z0m)
                # averaging-mask derivative: dG/dnu also shifts every
                # element's sinc factor
                u2_plus = ck * (ev * np.dot(dmasked[cls, k], psi_rot))
                u2_minus = np.conj(ck) * (ev * np.dot(dmasked_dag[cls, k], psi_rot))
                z_nu += np.vdot(lam, u2_plus) + np.vdot(lam, u2_minus)
                if with_correction:
                    # with C = dG/dnu = i 2pi t (W - W^dag):
                    # <lam|[B,C]|psi> = 2pi dt [(M lam)^dag C psi - (C lam)^dag M psi]
                    # and (C lam)^dag = conj(i 2pi t) (g_lam_p - g_lam_m)^dag
                    corr_nu = (1j * TWOPI * tmid) * (
                        np.vdot(mlam, u_plus - u_minus)
                        + np.vdot(g_lam_p - g_lam_m, mpsi)
                    )
                    z_nu += (-0.5j * TWOPI * dt) * corr_nu
                d_nu[k] += amps[k, s] * TWOPI * dt * 2.0 * z_nu.imag
        bnorm = _drive_scale(amps[:, s], op_norm)
        lam = _expm_apply(M, lam, -TWOPI, dt, bnorm)
    return d_amp, d_nu
