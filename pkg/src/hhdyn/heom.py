"""Hierarchical Equations of Motion propagation.

Generic engine for a small system coupled to independent harmonic baths
with exponentially decomposed correlation functions, plus a convenience
layer for the Hubbard-Holstein molecule (four projector-coupled Debye
baths).  Scaled ADOs, fixed-step RK4, optional Ishizaki-Tanimura-style
Matsubara terminator.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels, model
from .bath import BathExpansion, expand_bath
from .hierarchy import Hierarchy, build_hierarchy

TRACE_TOL = 1e-8
HERMITICITY_TOL = 1e-8
POSITIVITY_TOL = 1e-6
DIVERGENCE_GUARD = 1e6


class TruncationFailureError(RuntimeError):
    """Hierarchy blow-up; increase L or decrease dt."""


class StateToleranceError(RuntimeError):
    """The physical density matrix violated trace/Hermiticity/positivity."""


@dataclass(frozen=True)
class HeomConfig:
    """Numerical settings for one propagation."""

    K: int = 1
    L: int = 6
    dt: float = 0.01
    t_max: float = 40.0
    record_stride: int = 5
    use_scaling: bool = True
    use_terminator: bool = True
    check_state: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_max < self.dt:
            raise ValueError("t_max must be at least dt")
        if self.K < 0:
            raise ValueError("K must be nonnegative")
        if self.L < 1:
            raise ValueError("L must be at least 1")
        if self.record_stride < 1:
            raise ValueError("record_stride must be at least 1")


@dataclass(frozen=True)
class Trajectory:
    """Time grid and reduced density matrices of one run."""

    times: np.ndarray  # (n_rec,)
    states: np.ndarray  # (n_rec, d, d)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("one state per time point required")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


def _is_diagonal(op: np.ndarray) -> bool:
    return np.allclose(op, np.diag(np.diag(op)), atol=1e-14)


class _Workspace:
    """Precomputed arrays consumed by the RHS kernels."""

    def __init__(
        self,
        hs: np.ndarray,
        couplings: list[np.ndarray],
        expansions: list[BathExpansion],
        hierarchy: Hierarchy,
        use_scaling: bool,
        use_terminator: bool,
    ):
        d = hs.shape[0]
        self.d = d
        self.hierarchy = hierarchy
        self.hs = np.ascontiguousarray(hs, dtype=complex)
        self.couplings = [np.ascontiguousarray(q, dtype=complex) for q in couplings]
        self.slot_bath = hierarchy.slot_bath()

        c = np.concatenate([e.amplitudes for e in expansions])
        nu = np.concatenate([e.rates for e in expansions])
        self.c = c
        n = hierarchy.indices.astype(float)
        self.damp = n @ nu
        absc = np.abs(c)
        # zero-amplitude terms are decoupled channels; their ladder
        # factors vanish rather than divide by zero
        live = absc > 0.0
        absc_safe = np.where(live, absc, 1.0)
        if use_scaling:
            self.g_up = np.sqrt((n + 1.0) * absc[None, :]) * live[None, :]
            self.g_dn = np.sqrt(n / absc_safe[None, :]) * live[None, :]
        else:
            self.g_up = np.ones_like(n)
            self.g_dn = n.copy()
        self.plus = np.ascontiguousarray(hierarchy.plus_table)
        self.minus = np.ascontiguousarray(hierarchy.minus_table)
        self.xi = (
            np.array([e.terminator_coefficient for e in expansions])
            if use_terminator
            else None
        )

        self.diagonal = all(_is_diagonal(q) for q in self.couplings)
        if self.diagonal:
            qdiag = np.array([np.diag(q).real for q in self.couplings])
            n_slots = hierarchy.n_slots
            self.b_up = np.empty((n_slots, d, d), dtype=complex)
            self.b_dn = np.empty((n_slots, d, d), dtype=complex)
            for s in range(n_slots):
                q = qdiag[self.slot_bath[s]]
                diff = q[:, None] - q[None, :]
                self.b_up[s] = -1j * diff
                self.b_dn[s] = -1j * (c[s] * q[:, None] - np.conj(c[s]) * q[None, :])
            self.tmat = np.zeros((d, d))
            if self.xi is not None:
                for m, q in enumerate(qdiag):
                    self.tmat += self.xi[m] * (q[:, None] - q[None, :]) ** 2

    def rhs(self, A: np.ndarray, out: np.ndarray) -> np.ndarray:
        if self.diagonal:
            return kernels.rhs_diag(
                A,
                out,
                self.hs,
                self.damp,
                self.tmat,
                self.g_up,
                self.g_dn,
                self.b_up,
                self.b_dn,
                self.plus,
                self.minus,
            )
        return kernels.rhs_general(
            A,
            out,
            self.hs,
            self.damp,
            self.couplings,
            self.xi,
            self.c,
            self.slot_bath,
            self.g_up,
            self.g_dn,
            self.plus,
            self.minus,
        )


def _check_recorded_state(rho: np.ndarray, t: float) -> None:
    tr = abs(np.trace(rho) - 1.0)
    if tr > TRACE_TOL:
        raise StateToleranceError(f"trace defect {tr:.2e} at t={t:g}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITICITY_TOL:
        raise StateToleranceError(f"Hermiticity defect {herm:.2e} at t={t:g}")
    lo = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    if lo < -POSITIVITY_TOL:
        raise StateToleranceError(f"negative eigenvalue {lo:.2e} at t={t:g}")


def propagate(
    hs: np.ndarray,
    couplings: list[np.ndarray],
    expansions: list[BathExpansion],
    rho0: np.ndarray,
    config: HeomConfig,
    meta: dict | None = None,
) -> Trajectory:
    """Propagate from a factorized initial condition (all ADOs zero).

    `expansions` holds one BathExpansion per coupling operator.  Records
    the tier-0 ADO every `record_stride` steps (and at t=0); on every
    recorded state trace, Hermiticity and approximate positivity are
    enforced, and a hierarchy blow-up beyond 1e6 aborts with a
    truncation-failure error.
    """
    if len(couplings) != len(expansions):
        raise ValueError("need one bath expansion per coupling operator")
    d = hs.shape[0]
    hierarchy = build_hierarchy(len(couplings), config.K, config.L, system_dim=d)
    ws = _Workspace(
        hs, couplings, expansions, hierarchy, config.use_scaling, config.use_terminator
    )

    n_steps = int(round(config.t_max / config.dt))
    A = np.zeros((hierarchy.n_ados, d, d), dtype=complex)
    A[0] = rho0
    k = np.empty_like(A)
    tmp = np.empty_like(A)
    acc = np.empty_like(A)

    times = [0.0]
    states = [rho0.astype(complex).copy()]
    if config.check_state:
        _check_recorded_state(A[0], 0.0)

    dt = config.dt
    for step in range(1, n_steps + 1):
        ws.rhs(A, k)  # k1
        np.multiply(k, dt / 6.0, out=acc)
        acc += A
        np.multiply(k, dt / 2.0, out=tmp)
        tmp += A
        ws.rhs(tmp, k)  # k2
        acc += (dt / 3.0) * k
        np.multiply(k, dt / 2.0, out=tmp)
        tmp += A
        ws.rhs(tmp, k)  # k3
        acc += (dt / 3.0) * k
        np.multiply(k, dt, out=tmp)
        tmp += A
        ws.rhs(tmp, k)  # k4
        acc += (dt / 6.0) * k
        A, acc = acc, A

        if step % config.record_stride == 0 or step == n_steps:
            t = step * dt
            peak = float(np.max(np.abs(A)))
            if not np.isfinite(peak) or peak > DIVERGENCE_GUARD:
                raise TruncationFailureError(
                    f"ADO norm {peak:.2e} at t={t:g}; increase L or decrease dt"
                )
            if config.check_state:
                _check_recorded_state(A[0], t)
            times.append(t)
            states.append(A[0].copy())

    info = {
        "backend": kernels.ACTIVE_BACKEND,
        "n_ados": hierarchy.n_ados,
        "K": config.K,
        "L": config.L,
        "dt": config.dt,
        "t_max": config.t_max,
    }
    if meta:
        info.update(meta)
    return Trajectory(times=np.array(times), states=np.array(states), meta=info)


def hubbard_holstein_setup(params: model.ModelParams, K: int, hamiltonian: str = "full"):
    """System operators for a HEOM run on the Hubbard-Holstein molecule.

    hamiltonian="full" uses H^S and prepares (|E1>+|E2>)/sqrt(2) from its
    spectrum; "hf" uses the mean-field H^S_0 for both the generator and
    the initial superposition (its eigenvectors are U-independent).
    """
    if hamiltonian == "full":
        hs = model.build_hs(params)
    elif hamiltonian == "hf":
        hs = model.build_hs0(params)
    else:
        raise ValueError(f"unknown hamiltonian variant {hamiltonian!r}")
    couplings = list(model.build_coupling_ops())
    expansion = expand_bath(params.eta, params.gamma, params.beta, K)
    rho0 = model.initial_state(hs)
    return hs, couplings, [expansion] * len(couplings), rho0


def propagate_model(
    params: model.ModelParams, config: HeomConfig, hamiltonian: str = "full"
) -> Trajectory:
    """HEOM trajectory of the Hubbard-Holstein molecule."""
    hs, couplings, expansions, rho0 = hubbard_holstein_setup(
        params, config.K, hamiltonian
    )
    meta = {
        "t0": params.t0,
        "U": params.U,
        "eta": params.eta,
        "gamma": params.gamma,
        "beta": params.beta,
        "hamiltonian": hamiltonian,
    }
    return propagate(hs, couplings, expansions, rho0, config, meta=meta)


def convergence_sweep(
    params: model.ModelParams,
    base_config: HeomConfig,
    K_list: list[int],
    L_list: list[int],
    tolerance: float = 1e-3,
    hamiltonian: str = "full",
) -> list[dict]:
    """Grid of runs over (K, L); purity-series deviations between cells.

    Each row reports the max-abs purity deviation from the previous cell
    in the same K column (L refinement) and flags convergence when it
    drops below `tolerance`.  Failed cells are recorded, not fatal.
    """
    if not K_list or not L_list:
        raise ValueError("K_list and L_list must be nonempty")
    report = []
    for K in K_list:
        prev_purity = None
        for L in L_list:
            cfg = replace(base_config, K=K, L=L)
            row = {"K": K, "L": L}
            try:
                traj = propagate_model(params, cfg, hamiltonian)
                purity = np.einsum(
                    "tij,tji->t", traj.states, traj.states
                ).real
                row["n_ados"] = traj.meta["n_ados"]
                if prev_purity is not None:
                    dev = float(np.max(np.abs(purity - prev_purity)))
                    row["max_deviation"] = dev
                    row["converged"] = dev < tolerance
                prev_purity = purity
            except (TruncationFailureError, StateToleranceError, MemoryError) as exc:
                row["error"] = str(exc)
                prev_purity = None
            report.append(row)
    return report
