"""Finite-dimensional vibronic reference models and analytic oracles.

Contains the single-oscillator-per-bath vibronic Hamiltonian used for
potential-energy-surface, nonadiabatic-coupling and force-difference
analysis, exact wavefunction propagation with Schmidt purity, the
eigenstate-continuation correlation energy, and the quadrature-based
pure-dephasing coherence decay used to validate the HEOM engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_hermite

from . import model

DIMENSION_CAP = 20000


@dataclass(frozen=True)
class SingleModeModel:
    """One explicit harmonic mode per selected bath channel.

    The mode frequency sits at the peak of the Debye spectral density
    (omega = gamma) and the linear couplings are c_m = omega *
    sqrt(eta / pi), identical for all four channels.
    """

    base: model.ModelParams
    omega: float | None = None  # defaults to base.gamma
    active_modes: tuple[int, ...] = (1, 2, 3, 4)  # 1-based channel labels
    n_ph: int = 30

    def __post_init__(self):
        if self.n_ph < 2:
            raise ValueError("n_ph must be at least 2")
        if not self.active_modes or any(m not in (1, 2, 3, 4) for m in self.active_modes):
            raise ValueError("active_modes must be a nonempty subset of {1,2,3,4}")
        if len(set(self.active_modes)) != len(self.active_modes):
            raise ValueError("active_modes must be distinct")

    @property
    def mode_frequency(self) -> float:
        return self.base.gamma if self.omega is None else self.omega

    @property
    def coupling(self) -> float:
        return self.mode_frequency * np.sqrt(self.base.eta / np.pi)

    @property
    def dimension(self) -> int:
        return 4 * self.n_ph ** len(self.active_modes)


@dataclass(frozen=True)
class PesCurve:
    grid: np.ndarray  # (n_x,)
    energies: np.ndarray  # (n_x, 4), ascending per point


@dataclass(frozen=True)
class NacCurve:
    grid: np.ndarray
    coupling: np.ndarray  # d12 >= 0
    flagged: np.ndarray  # near-degenerate points, excluded from use


@dataclass(frozen=True)
class CorrelationEnergyResult:
    e_cor: float
    pairs: tuple[tuple[float, float, float], ...]  # (E_i, E0_i, weight)
    min_overlap: float
    n_steps: int

    def __post_init__(self):
        total = sum(w for *_, w in self.pairs)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"weights sum to {total}, expected 1")


def _ladder_x(n_ph: int, omega: float) -> np.ndarray:
    """Position operator x = (a + a+) / sqrt(2 omega) in the number basis."""
    off = np.sqrt(np.arange(1, n_ph)) / np.sqrt(2.0 * omega)
    return np.diag(off, 1) + np.diag(off, -1)


def build_vibronic_hamiltonian(smm: SingleModeModel) -> np.ndarray:
    """H on (electronic sector) x (number states of each active mode)."""
    if smm.dimension > DIMENSION_CAP:
        raise MemoryError(
            f"vibronic dimension {smm.dimension} exceeds cap {DIMENSION_CAP}"
        )
    omega = smm.mode_frequency
    n_ph = smm.n_ph
    qs = model.build_coupling_ops()
    x = _ladder_x(n_ph, omega)
    h_osc = omega * np.diag(np.arange(n_ph) + 0.5).astype(complex)
    eye_ph = np.eye(n_ph, dtype=complex)

    def embed(el_op, mode_ops):
        out = np.asarray(el_op, dtype=complex)
        for op in mode_ops:
            out = np.kron(out, op)
        return out

    n_modes = len(smm.active_modes)
    eye_el = np.eye(4, dtype=complex)
    h = embed(model.build_hs(smm.base), [eye_ph] * n_modes)
    for slot, m in enumerate(smm.active_modes):
        ops = [eye_ph] * n_modes
        ops[slot] = h_osc
        h += embed(eye_el, ops)
        ops[slot] = x.astype(complex)
        h += smm.coupling * embed(qs[m - 1], ops)
    model.check_hermitian(h)
    return h


def _clamped_hamiltonian(smm: SingleModeModel, mode: int, x: float) -> np.ndarray:
    """4x4 electronic Hamiltonian at clamped coordinate x of one mode."""
    omega = smm.mode_frequency
    q = model.build_coupling_ops()[mode - 1]
    return (
        model.build_hs(smm.base)
        + smm.coupling * x * q
        + 0.5 * omega**2 * x**2 * np.eye(4)
    )


def bo_pes(smm: SingleModeModel, mode: int, x_grid) -> PesCurve:
    """Born-Oppenheimer surfaces along one mode, others clamped at zero."""
    x_grid = np.asarray(x_grid, dtype=float)
    energies = np.empty((len(x_grid), 4))
    for i, x in enumerate(x_grid):
        energies[i] = np.linalg.eigvalsh(_clamped_hamiltonian(smm, mode, x))
    return PesCurve(grid=x_grid, energies=energies)


def _match_states(h: np.ndarray, reference: np.ndarray):
    """Eigenpairs of h matched column-by-column to reference vectors.

    Each reference column is assigned the eigenvector of maximal overlap,
    with the phase gauge fixed so the overlap is real positive.  Returns
    (energies, vectors, min_overlap) for the matched columns.
    """
    vals, vecs = np.linalg.eigh(h)
    n_ref = reference.shape[1]
    out_vals = np.empty(n_ref)
    out_vecs = np.empty((h.shape[0], n_ref), dtype=complex)
    min_overlap = 1.0
    for k in range(n_ref):
        ov = vecs.conj().T @ reference[:, k]
        j = int(np.argmax(np.abs(ov)))
        o = abs(ov[j])
        min_overlap = min(min_overlap, o)
        out_vals[k] = vals[j]
        out_vecs[:, k] = vecs[:, j] * (ov[j].conjugate() / o) if o > 0 else vecs[:, j]
    return out_vals, out_vecs, min_overlap


def _tracked_pair(smm: SingleModeModel, mode: int, x: float, walk_step: float = 0.05):
    """Ground and first-excited electronic states at clamped x.

    The pair is labeled at x = 0 (where the S^2 tie-break resolves the
    U = 0 degeneracy and picks the triplet as the first excited state)
    and carried to x by maximum-overlap continuation, so the states keep
    their character across trivial level crossings.  This matches the
    singlet-triplet pair whose coupling the analysis follows.
    """
    vals0, vecs0 = model.hs_eigensystem(_clamped_hamiltonian(smm, mode, 0.0))
    ref = vecs0[:, :2]
    energies = vals0[:2].copy()
    if x == 0.0:
        return energies, ref, 1.0
    n_walk = max(1, int(np.ceil(abs(x) / walk_step)))
    min_overlap = 1.0
    for xi in np.linspace(0.0, x, n_walk + 1)[1:]:
        energies, ref, o = _match_states(_clamped_hamiltonian(smm, mode, xi), ref)
        min_overlap = min(min_overlap, o)
    return energies, ref, min_overlap


def nac(
    smm: SingleModeModel,
    mode: int,
    x_grid,
    h: float = 1e-4,
    degeneracy_floor: float = 1e-8,
    hf_check_tol: float = 1e-6,
    hf_check_gap: float = 1e-3,
) -> NacCurve:
    """|<phi_1 | d/dx | phi_2>| along one mode by central differences.

    phi_1, phi_2 are the continuation-tracked ground / first-excited
    pair (see _tracked_pair).  The eigenvectors at x +/- h are matched
    and gauge-aligned to the center point before differencing.  Wherever
    the pair gap exceeds `hf_check_gap` the result is cross-validated
    against the Hellmann-Feynman form |<phi_1| dH/dx |phi_2>|/(E_2-E_1);
    disagreement beyond `hf_check_tol` raises.  Near-degenerate points
    are flagged, not extrapolated.  The difference step shrinks with the
    gap to keep the finite-difference error below the check tolerance.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    q = model.build_coupling_ops()[mode - 1]
    c = max(smm.coupling, 1e-10)
    d12 = np.zeros(len(x_grid))
    flagged = np.zeros(len(x_grid), dtype=bool)
    order = np.argsort(np.abs(x_grid))  # walk outward from the center
    pair_at = {}
    for i in order:
        x = x_grid[i]
        prev = pair_at.get(min(pair_at, key=lambda k: abs(k - x)), None) if pair_at else None
        if prev is None:
            vals, vecs, _ = _tracked_pair(smm, mode, x)
        else:
            vals, vecs, _ = _match_states(_clamped_hamiltonian(smm, mode, x), prev)
        pair_at[x] = vecs
        gap = abs(vals[1] - vals[0])
        if gap < degeneracy_floor:
            flagged[i] = True
            continue
        h_eff = float(np.clip(1e-3 * gap / c, 1e-7, h))
        _, vp, _ = _match_states(_clamped_hamiltonian(smm, mode, x + h_eff), vecs)
        _, vm, _ = _match_states(_clamped_hamiltonian(smm, mode, x - h_eff), vecs)
        deriv = (vp[:, 1] - vm[:, 1]) / (2.0 * h_eff)
        val = abs(vecs[:, 0].conj() @ deriv)
        d12[i] = val
        if gap > hf_check_gap:
            # dH/dx = c Q + omega^2 x Identity; the identity part has no
            # off-diagonal matrix element between distinct eigenstates
            hf = abs(smm.coupling * (vecs[:, 0].conj() @ q @ vecs[:, 1])) / gap
            if abs(val - hf) > hf_check_tol * max(1.0, hf):
                raise RuntimeError(
                    f"finite-difference NAC {val:.3e} disagrees with "
                    f"Hellmann-Feynman {hf:.3e} at x={x:g}"
                )
    return NacCurve(grid=x_grid, coupling=d12, flagged=flagged)


def delta_f_average(
    smm: SingleModeModel,
    mode: int,
    quad_order: int = 80,
    slope_step: float = 1e-4,
    convergence_tol: float = 1e-6,
) -> float:
    """Thermal average of the ground/first-excited PES slope difference.

    The average is over the exact thermal coordinate density of the bare
    oscillator, a Gaussian with variance coth(beta omega / 2) / (2 omega)
    (analytically equal to the Boltzmann-weighted sum over oscillator
    eigenfunctions).  The two surfaces are the continuation-tracked pair
    of `nac`, slopes use central differences, and the Gauss-Hermite order
    is doubled once; both results must agree to convergence_tol.
    """

    omega = smm.mode_frequency
    sigma = np.sqrt(0.5 / omega / np.tanh(smm.base.beta * omega / 2.0))

    # Tracked-pair vectors cached on a fine lattice via one outward walk,
    # so each quadrature node costs two small diagonalizations.
    lattice_step = 0.025
    # largest Hermite root of the doubled order is below sqrt(4*order + 1)
    x_max = np.sqrt(2.0) * sigma * np.sqrt(4.0 * quad_order + 1.0) + 1.0
    n_lat = int(np.ceil(x_max / lattice_step))
    cache = {}
    _, vecs0 = model.hs_eigensystem(_clamped_hamiltonian(smm, mode, 0.0))
    cache[0] = vecs0[:, :2]
    for sign in (1, -1):
        ref = cache[0]
        for i in range(1, n_lat + 1):
            x = sign * i * lattice_step
            _, ref, _ = _match_states(_clamped_hamiltonian(smm, mode, x), ref)
            cache[sign * i] = ref

    def slope_diff(x):
        ref = cache[int(round(x / lattice_step))]
        _, vecs, _ = _match_states(_clamped_hamiltonian(smm, mode, x), ref)
        ep, _, _ = _match_states(_clamped_hamiltonian(smm, mode, x + slope_step), vecs)
        em, _, _ = _match_states(_clamped_hamiltonian(smm, mode, x - slope_step), vecs)
        de = (ep - em) / (2.0 * slope_step)
        return de[0] - de[1]

    def average(order):
        nodes, weights = roots_hermite(order)
        xs = np.sqrt(2.0) * sigma * nodes
        return sum(w * slope_diff(x) for w, x in zip(weights, xs)) / np.sqrt(np.pi)

    coarse = average(quad_order)
    fine = average(2 * quad_order)
    if abs(fine - coarse) > convergence_tol * max(1.0, abs(fine)):
        raise RuntimeError(
            f"Gauss-Hermite average did not converge: {coarse} vs {fine}"
        )
    return float(fine)


class ContinuationError(RuntimeError):
    """Eigenstate tracking lost its branch (genuine crossing ambiguity)."""


def correlation_energy(
    weights,
    h_full: np.ndarray,
    h0: np.ndarray,
    n_steps: int = 200,
    overlap_threshold: float = 0.9,
    max_doublings: int = 5,
) -> CorrelationEnergyResult:
    """Correlation energy by eigenstate continuation in coupling strength.

    Tracks the eigenpairs of H(lambda) = h0 + lambda (h_full - h0) from
    lambda = 1 down to 0 by maximum-overlap matching, the numerical
    stand-in for adiabatic switching.  `weights` maps eigenstate index
    (ascending energy of h_full) to |alpha_i|^2; weights must sum to 1.
    If any successive overlap drops below `overlap_threshold` the step
    count doubles, up to `max_doublings`; an overlap below 0.5 after the
    refinement cap is a continuation failure.
    """
    weights = dict(weights) if not isinstance(weights, dict) else weights
    v = h_full - h0
    vals_full, vecs_full = model.hs_eigensystem(h_full) if h_full.shape[0] == 4 else (
        np.linalg.eigh(h_full)
    )
    tracked = sorted(weights)
    if any(i < 0 or i >= len(vals_full) for i in tracked):
        raise ValueError("weight index out of range")

    steps = n_steps
    for attempt in range(max_doublings + 1):
        current = {i: vecs_full[:, i] for i in tracked}
        energies = {i: vals_full[i] for i in tracked}
        min_overlap = 1.0
        lambdas = np.linspace(1.0, 0.0, steps + 1)[1:]
        ok = True
        for lam in lambdas:
            vals, vecs = np.linalg.eigh(h0 + lam * v)
            for i in tracked:
                ov = vecs.conj().T @ current[i]
                k = int(np.argmax(np.abs(ov)))
                o = abs(ov[k])
                min_overlap = min(min_overlap, o)
                if o < overlap_threshold:
                    ok = False
                # gauge: overlap with the previous point real positive
                current[i] = vecs[:, k] * (ov[k] / o) if o > 0 else vecs[:, k]
                energies[i] = vals[k]
            if not ok:
                break
        if ok:
            break
        if attempt == max_doublings:
            if min_overlap < 0.5:
                raise ContinuationError(
                    f"overlap collapsed to {min_overlap:.3f} after "
                    f"{max_doublings} refinements"
                )
            break
        steps *= 2

    e_cor = sum(weights[i] * (vals_full[i] - energies[i]) for i in tracked)
    pairs = tuple(
        (float(vals_full[i]), float(energies[i]), float(weights[i])) for i in tracked
    )
    return CorrelationEnergyResult(
        e_cor=float(e_cor), pairs=pairs, min_overlap=float(min_overlap), n_steps=steps
    )


def exact_propagate(h: np.ndarray, psi0: np.ndarray, times) -> np.ndarray:
    """|psi(t)> = exp(-i H t) |psi(0)> via full eigendecomposition."""
    if h.shape[0] > DIMENSION_CAP:
        raise MemoryError(f"dimension {h.shape[0]} exceeds cap {DIMENSION_CAP}")
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValueError("psi0 must be normalized")
    vals, vecs = np.linalg.eigh(h)
    coef = vecs.conj().T @ psi0
    times = np.asarray(times, dtype=float)
    phases = np.exp(-1j * np.outer(times, vals))
    return (phases * coef[None, :]) @ vecs.T


def schmidt_purity(psi: np.ndarray, electronic_dim: int = 4) -> float:
    """Subsystem purity sum_i lambda_i^2 from the Schmidt coefficients."""
    psi = np.asarray(psi, dtype=complex)
    if psi.size % electronic_dim != 0:
        raise ValueError(
            f"state of size {psi.size} does not factor over dim {electronic_dim}"
        )
    mat = psi.reshape(electronic_dim, -1)
    sv = np.linalg.svd(mat, compute_uv=False)
    return float(np.sum(sv**4))


def analytic_dephasing(params: model.ModelParams, times) -> np.ndarray:
    """|rho01(t)| / |rho01(0)| for the sigma_z pure-dephasing model.

    Two-level system coupled through sigma_z (eigenvalues +/-1) to one
    Debye bath with the same correlation-function convention as
    bath.expand_bath, so HEOM runs compare apples-to-apples:

        Gamma(t) = (4/pi) Int_0^inf J(w) coth(beta w/2) (1-cos wt)/w^2 dw.
    """
    eta, gamma, beta = params.eta, params.gamma, params.beta
    times = np.asarray(times, dtype=float)

    def integrand(w, t):
        j = eta * gamma * w / (w**2 + gamma**2)
        return 4.0 / np.pi * j / np.tanh(beta * w / 2.0) * (1.0 - np.cos(w * t)) / w**2

    out = np.empty(len(times))
    for i, t in enumerate(times):
        if t == 0.0:
            out[i] = 1.0
            continue
        # split at the first few oscillation periods to help the quadrature
        cut = 30.0 * np.pi / t
        g1, _ = quad(integrand, 0.0, cut, args=(t,), limit=800, epsabs=1e-10)
        # tail: 1 - cos averages to 1; the cos part is Fourier-weighted
        tail_flat, _ = quad(
            lambda w: 4.0 / np.pi
            * eta * gamma / (w**2 + gamma**2) / np.tanh(beta * w / 2.0) / w,
            cut,
            np.inf,
            limit=800,
            epsabs=1e-12,
        )
        tail_cos, _ = quad(
            lambda w: -4.0 / np.pi
            * eta * gamma / (w**2 + gamma**2) / np.tanh(beta * w / 2.0) / w,
            cut,
            np.inf,
            weight="cos",
            wvar=t,
            limit=800,
        )
        out[i] = np.exp(-(g1 + tail_flat + tail_cos))
    return out
