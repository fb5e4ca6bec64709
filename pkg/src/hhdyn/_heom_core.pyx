# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled HEOM right-hand-side kernel (diagonal-coupling fast path).

Mirrors hhdyn._heom_py.rhs_diag; see that module for the contract.  The
per-ADO accumulation order is fixed (system commutator, damping,
terminator, then slots in order, raise before lower), so results are
deterministic and match the numpy kernel to rounding.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def rhs_diag(
    cnp.ndarray[cnp.complex128_t, ndim=3] A,
    cnp.ndarray[cnp.complex128_t, ndim=3] out,
    cnp.ndarray[cnp.complex128_t, ndim=2] hs,
    cnp.ndarray[cnp.float64_t, ndim=1] damp,
    cnp.ndarray[cnp.float64_t, ndim=2] tmat,
    cnp.ndarray[cnp.float64_t, ndim=2] g_up,
    cnp.ndarray[cnp.float64_t, ndim=2] g_dn,
    cnp.ndarray[cnp.complex128_t, ndim=3] b_up,
    cnp.ndarray[cnp.complex128_t, ndim=3] b_dn,
    cnp.ndarray[cnp.int64_t, ndim=2] plus,
    cnp.ndarray[cnp.int64_t, ndim=2] minus,
):
    cdef Py_ssize_t n_ados = A.shape[0]
    cdef Py_ssize_t d = A.shape[1]
    cdef Py_ssize_t n_slots = g_up.shape[1]
    cdef Py_ssize_t i, s, a, b, k, nb
    cdef double complex acc, minus_i = -1j
    cdef double g

    for i in range(n_ados):
        # -i [H, A_i] - damp_i A_i - tmat o A_i
        for a in range(d):
            for b in range(d):
                acc = 0
                for k in range(d):
                    acc += hs[a, k] * A[i, k, b] - A[i, a, k] * hs[k, b]
                out[i, a, b] = minus_i * acc - (damp[i] + tmat[a, b]) * A[i, a, b]
        for s in range(n_slots):
            nb = plus[i, s]
            if nb >= 0:
                g = g_up[i, s]
                for a in range(d):
                    for b in range(d):
                        out[i, a, b] = out[i, a, b] + g * b_up[s, a, b] * A[nb, a, b]
            nb = minus[i, s]
            if nb >= 0:
                g = g_dn[i, s]
                for a in range(d):
                    for b in range(d):
                        out[i, a, b] = out[i, a, b] + g * b_dn[s, a, b] * A[nb, a, b]
    return out
