"""Scalar and matrix observables of reduced electronic density matrices."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from . import model


def purity(rho_e: np.ndarray) -> float:
    """Tr[rho^2], cross-checked against sum |rho_ij|^2."""
    via_trace = float(np.trace(rho_e @ rho_e).real)
    via_elements = float(np.sum(np.abs(rho_e) ** 2))
    if abs(via_trace - via_elements) > 1e-12 * max(1.0, abs(via_trace)):
        raise ValueError(
            "purity mismatch between Tr[rho^2] and sum |rho_ij|^2; "
            "rho is not Hermitian"
        )
    return via_trace


def electronic_energy(rho_e: np.ndarray, hs: np.ndarray) -> float:
    """Tr[rho H^S]."""
    val = np.trace(rho_e @ hs)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"energy has imaginary part {val.imag:.2e}")
    return float(val.real)


def eigenbasis_elements(rho_e: np.ndarray, hs: np.ndarray) -> np.ndarray:
    """rho in the gauge-fixed energy eigenbasis of hs, ascending order."""
    _, vecs = model.hs_eigensystem(hs)
    return vecs.conj().T @ rho_e @ vecs


@lru_cache(maxsize=None)
def _bilinear_sector_matrices() -> np.ndarray:
    """Sector matrices of d+_q d_p for all spin-orbital pairs (p, q)."""
    n = len(model.SPIN_ORBITALS)
    out = np.empty((n, n, 4, 4), dtype=complex)
    for p in range(n):
        for q in range(n):
            op = model.creation_operator(q) @ model.annihilation_operator(p)
            out[p, q] = model.project_to_sector(op)
    return out


def one_body_rdm(rho_e: np.ndarray) -> np.ndarray:
    """1-body reduced density matrix Gamma_pq = Tr[d+_q d_p rho].

    Spin-orbitals ordered (1up, 1dn, 2up, 2dn); Hermitian with trace 2.
    """
    ops = _bilinear_sector_matrices()
    gamma = np.einsum("pqij,ji->pq", ops, rho_e)
    return gamma


def cumulant_trace(gamma: np.ndarray) -> float:
    """Two-particle cumulant trace Tr[Gamma^2 - Gamma].

    Nonpositive for occupations in [0, 1]; zero iff Gamma is idempotent
    (single-determinant states).
    """
    return float(np.trace(gamma @ gamma - gamma).real)


def gibbs_state(hs: np.ndarray, beta: float) -> np.ndarray:
    """exp(-beta H) / Z."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    vals = np.linalg.eigvalsh(hs)
    # shift for numerical stability before exponentiating
    rho = expm(-beta * (hs - vals[0] * np.eye(len(hs))))
    return rho / np.trace(rho).real


def observable_series(traj, hs: np.ndarray) -> dict[str, np.ndarray]:
    """All per-time scalars and eigenbasis elements of a trajectory.

    Returns purity, energy, cumulant and the complex eigenbasis matrix
    series rho_eig with shape (n_times, d, d).
    """
    _, vecs = model.hs_eigensystem(hs)
    states = traj.states
    pur = np.einsum("tij,tji->t", states, states).real
    energy = np.einsum("tij,ji->t", states, hs).real
    rho_eig = np.einsum("ai,tab,bj->tij", vecs.conj(), states, vecs)
    cum = np.empty(len(states))
    for i, rho in enumerate(states):
        cum[i] = cumulant_trace(one_body_rdm(rho))
    return {
        "times": traj.times,
        "purity": pur,
        "energy": energy,
        "cumulant": cum,
        "rho_eig": rho_eig,
    }
