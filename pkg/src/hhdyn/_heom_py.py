"""Pure-numpy HEOM right-hand-side kernels.

Drop-in fallback for the compiled extension; `rhs_diag` implements the
fast path for diagonal coupling operators (all couplings in this package
are occupation projectors or sigma_z), `rhs_general` handles arbitrary
Hermitian couplings via small matrix products.

Both kernels evaluate the scaled-ADO HEOM derivative

    dA_n/dt = -i[H, A_n] - (sum_s n_s nu_s) A_n - terminator
              - i sum_s sqrt((n_s+1)|c_s|) [Q_s, A_{n+e_s}]
              - i sum_s sqrt(n_s/|c_s|) (c_s Q_s A_{n-e_s} - c_s* A_{n-e_s} Q_s)

with all slot-dependent prefactors folded into precomputed arrays.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def rhs_diag(A, out, hs, damp, tmat, g_up, g_dn, b_up, b_dn, plus, minus):
    """Diagonal-coupling RHS.

    Parameters
    ----------
    A, out : (n_ados, d, d) complex arrays (out is overwritten).
    hs : (d, d) system Hamiltonian.
    damp : (n_ados,) total decay rate sum_s n_s nu_s per ADO.
    tmat : (d, d) real elementwise terminator factor
        sum_m xi_m (q^m_a - q^m_b)^2.
    g_up, g_dn : (n_ados, n_slots) real ladder prefactors.
    b_up, b_dn : (n_slots, d, d) complex elementwise commutator factors,
        b_up[s][a,b] = -i (q_a - q_b),
        b_dn[s][a,b] = -i (c_s q_a - c_s* q_b).
    plus, minus : (n_ados, n_slots) neighbor tables, -1 = absent.
    """
    np.matmul(hs, A, out=out)
    out -= A @ hs
    out *= -1j
    out -= damp[:, None, None] * A
    out -= tmat[None, :, :] * A
    n_slots = g_up.shape[1]
    for s in range(n_slots):
        idx = plus[:, s]
        has = idx >= 0
        if np.any(has):
            out[has] += g_up[has, s, None, None] * (b_up[s][None] * A[idx[has]])
        idx = minus[:, s]
        has = idx >= 0
        if np.any(has):
            out[has] += g_dn[has, s, None, None] * (b_dn[s][None] * A[idx[has]])
    return out


def rhs_general(A, out, hs, damp, couplings, xi, c, slot_bath, g_up, g_dn, plus, minus):
    """General Hermitian-coupling RHS (numpy only).

    couplings : list of (d, d) Hermitian Q_m, one per bath.
    xi : per-bath terminator coefficients (or None to disable).
    c : (n_slots,) complex expansion amplitudes.
    slot_bath : (n_slots,) bath index of each slot.
    """
    np.matmul(hs, A, out=out)
    out -= A @ hs
    out *= -1j
    out -= damp[:, None, None] * A
    if xi is not None:
        for m, q in enumerate(couplings):
            qq = q @ q
            out -= xi[m] * (qq @ A - 2.0 * (q @ A) @ q + A @ qq)
    n_slots = g_up.shape[1]
    for s in range(n_slots):
        q = couplings[slot_bath[s]]
        idx = plus[:, s]
        has = idx >= 0
        if np.any(has):
            ap = A[idx[has]]
            out[has] += (-1j * g_up[has, s, None, None]) * (q @ ap - ap @ q)
        idx = minus[:, s]
        has = idx >= 0
        if np.any(has):
            am = A[idx[has]]
            out[has] += (-1j * g_dn[has, s, None, None]) * (
                c[s] * (q @ am) - np.conj(c[s]) * (am @ q)
            )
    return out
