"""Electronic-sector operators of the two-site Hubbard-Holstein molecule.

Everything is expressed in the 4-dimensional N=2, S_z=0 sector spanned by
(in this fixed order)

    |up-down, 0>,  |0, up-down>,  |up, down>,  |down, up>

where the two slots are the two sites.  Units: hbar = 1, energies in t0,
time in hbar/t0.

Matrix elements are generated from an explicit fermionic Fock space of the
four spin-orbitals ordered site-major, spin-up before spin-down:
(1up, 1dn, 2up, 2dn).  Occupation states are built by applying creation
operators in increasing spin-orbital order to the vacuum, which fixes all
signs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

HERMITICITY_TOL = 1e-12

#: spin-orbital ordering used for all fermionic sign bookkeeping and for
#: the one-body reduced density matrix
SPIN_ORBITALS = ("1up", "1dn", "2up", "2dn")

#: occupation vectors of the sector basis states, in the fixed basis order
SECTOR_OCCUPATIONS = (
    (1, 1, 0, 0),  # |up-down, 0>
    (0, 0, 1, 1),  # |0, up-down>
    (1, 0, 0, 1),  # |up, down>
    (0, 1, 1, 0),  # |down, up>
)

SECTOR_LABELS = ("|ud,0>", "|0,ud>", "|u,d>", "|d,u>")


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the Hubbard-Holstein molecule (units of t0)."""

    t0: float = 1.0
    U: float = 0.0
    eta: float = 0.1
    gamma: float = 0.3
    beta: float = 1.0

    def __post_init__(self):
        if self.t0 <= 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if self.U < 0:
            raise ValueError(f"U must be nonnegative, got {self.U}")
        if self.eta < 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")


# ---------------------------------------------------------------------------
# Fock-space operator algebra (16-dimensional, 4 spin-orbitals)
# ---------------------------------------------------------------------------

N_MODES = 4
FOCK_DIM = 1 << N_MODES


def _occupations(index: int) -> tuple[int, ...]:
    return tuple((index >> p) & 1 for p in range(N_MODES))


@lru_cache(maxsize=None)
def annihilation_operator(p: int) -> np.ndarray:
    """d_p in the 16-dimensional Fock space, Jordan-Wigner sign convention."""
    op = np.zeros((FOCK_DIM, FOCK_DIM), dtype=complex)
    for ket in range(FOCK_DIM):
        if not (ket >> p) & 1:
            continue
        bra = ket & ~(1 << p)
        sign = (-1) ** sum((ket >> q) & 1 for q in range(p))
        op[bra, ket] = sign
    return op


def creation_operator(p: int) -> np.ndarray:
    return annihilation_operator(p).conj().T


def number_operator(p: int) -> np.ndarray:
    return creation_operator(p) @ annihilation_operator(p)


@lru_cache(maxsize=None)
def _sector_indices() -> tuple[int, ...]:
    out = []
    for occ in SECTOR_OCCUPATIONS:
        out.append(sum(n << p for p, n in enumerate(occ)))
    return tuple(out)


def project_to_sector(op: np.ndarray) -> np.ndarray:
    """Restrict a 16x16 Fock-space operator to the N=2, S_z=0 sector."""
    idx = np.array(_sector_indices())
    return op[np.ix_(idx, idx)]


# ---------------------------------------------------------------------------
# Hamiltonians and coupling operators
# ---------------------------------------------------------------------------

# spin-orbital indices: 1up=0, 1dn=1, 2up=2, 2dn=3
_UP = (0, 2)
_DN = (1, 3)


@lru_cache(maxsize=None)
def _hopping_matrix() -> np.ndarray:
    """Sector matrix of sum_sigma (d+_1s d_2s + d+_2s d_1s), coefficient 1."""
    hop = np.zeros((FOCK_DIM, FOCK_DIM), dtype=complex)
    for a, b in ((0, 2), (1, 3)):  # (site1, site2) per spin channel
        hop += creation_operator(a) @ annihilation_operator(b)
        hop += creation_operator(b) @ annihilation_operator(a)
    return project_to_sector(hop)


@lru_cache(maxsize=None)
def _doublon_matrix() -> np.ndarray:
    """Sector matrix of n_1up n_1dn + n_2up n_2dn."""
    dbl = number_operator(0) @ number_operator(1) + number_operator(2) @ number_operator(3)
    return project_to_sector(dbl)


def build_hs(params: ModelParams) -> np.ndarray:
    """Full Hubbard Hamiltonian H^S in the sector basis."""
    return -params.t0 * _hopping_matrix() + params.U * _doublon_matrix()


def build_hs0(params: ModelParams) -> np.ndarray:
    """Mean-field component H^S_0 with <n_{i sigma}> = 1/2.

    The mean-field term 2U sum n <n> contributes U * Nhat and the constant
    -U sum <n><n> contributes -U, so on the N=2 sector this is the U=0
    Hubbard Hamiltonian shifted by U * Identity.
    """
    shift = 2.0 * params.U * 0.5 * 2 - params.U  # U*Nhat - U on N=2
    return -params.t0 * _hopping_matrix() + shift * np.eye(4, dtype=complex)


def build_vs(params: ModelParams) -> np.ndarray:
    """Residual two-body term V^S = H^S - H^S_0 (diagonal in the sector)."""
    return build_hs(params) - build_hs0(params)


@lru_cache(maxsize=None)
def build_coupling_ops() -> tuple[np.ndarray, ...]:
    """The four bath-coupling projectors Q_m.

    Q_1 = n_1up n_1dn, Q_2 = n_2up n_2dn, Q_3 = n_1up n_2dn,
    Q_4 = n_1dn n_2up; each projects onto one sector basis state.
    """
    pairs = ((0, 1), (2, 3), (0, 3), (1, 2))
    return tuple(
        project_to_sector(number_operator(a) @ number_operator(b)) for a, b in pairs
    )


def spectral_density(omega, params: ModelParams):
    """Debye spectral density J(w) = eta * gamma * w / (w^2 + gamma^2)."""
    omega = np.asarray(omega, dtype=float)
    return params.eta * params.gamma * omega / (omega**2 + params.gamma**2)


@lru_cache(maxsize=None)
def total_spin_squared() -> np.ndarray:
    """S^2 in the sector basis, used to resolve the U=0 degeneracy."""
    sp = sum(
        creation_operator(u) @ annihilation_operator(d) for u, d in zip(_UP, _DN)
    )
    sz = 0.5 * (
        sum(number_operator(p) for p in _UP) - sum(number_operator(p) for p in _DN)
    )
    s2 = sp @ sp.conj().T + sz @ sz - sz
    return project_to_sector(s2)


# ---------------------------------------------------------------------------
# Eigensystem with fixed gauge and degeneracy resolution
# ---------------------------------------------------------------------------


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component real positive."""
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    return vec / phase


def hs_eigensystem(hs: np.ndarray, degeneracy_tol: float = 1e-9):
    """Eigenvalues and gauge-fixed eigenvectors of a sector Hamiltonian.

    Eigenvalues ascend.  Within a degenerate cluster the states are
    ordered by descending S^2 expectation, which reproduces the U -> 0+
    continuation of the Hubbard spectrum (the S_z=0 triplet precedes the
    degenerate antisymmetric doublon singlet at U=0).
    """
    vals, vecs = np.linalg.eigh(hs)
    scale = max(1.0, float(np.max(np.abs(vals))))
    s2 = total_spin_squared() if hs.shape[0] == 4 else None
    i = 0
    while i < len(vals):
        j = i + 1
        while j < len(vals) and vals[j] - vals[i] < degeneracy_tol * scale:
            j += 1
        if j - i > 1 and s2 is not None:
            block = vecs[:, i:j]
            s2_block = block.conj().T @ s2 @ block
            sv, sw = np.linalg.eigh(s2_block)
            # descending S^2 within the cluster
            sw = sw[:, ::-1]
            vecs[:, i:j] = block @ sw
        i = j
    vecs = np.column_stack([_fix_phase(vecs[:, k]) for k in range(vecs.shape[1])])
    return vals, vecs


def initial_state(hs: np.ndarray, degeneracy_tol: float = 1e-9) -> np.ndarray:
    """Density matrix of (|E1> + |E2>)/sqrt(2) over the two lowest states."""
    vals, vecs = hs_eigensystem(hs, degeneracy_tol)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if vals[1] - vals[0] < degeneracy_tol * scale:
        raise ValueError(
            "ground state is degenerate; the two-state superposition is ambiguous"
        )
    psi = (vecs[:, 0] + vecs[:, 1]) / np.sqrt(2.0)
    return np.outer(psi, psi.conj())


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius norm of [a, b]."""
    return float(np.linalg.norm(a @ b - b @ a))


def check_hermitian(op: np.ndarray, tol: float = HERMITICITY_TOL) -> None:
    defect = np.max(np.abs(op - op.conj().T))
    if defect > tol:
        raise ValueError(f"operator is not Hermitian (defect {defect:.3e})")
