"""Multi-exponential timescale extraction by variable projection.

Model: y(t) = asymptote + sum_i a_i exp(-t / tau_i).  The amplitudes
(and, in free-asymptote mode, the offset) are linear parameters solved
exactly by least squares for every nonlinear tau iterate, which makes
triexponential fits robust.  The tau search runs Levenberg-Marquardt-style
least squares in log(tau) from a deterministic multi-start grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import least_squares

NO_DECAY_FLOOR = 1e-4


@dataclass(frozen=True)
class FitConfig:
    n_terms: int = 3
    asymptote_mode: str = "tail-average"  # or "fixed-value", "free-parameter"
    asymptote_value: float | None = None  # required for fixed-value mode
    tail_fraction: float = 0.2
    max_iterations: int = 200
    tolerance: float = 1e-12
    n_starts: int = 8
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_terms <= 3:
            raise ValueError("n_terms must be 1, 2 or 3")
        if self.asymptote_mode not in ("fixed-value", "tail-average", "free-parameter"):
            raise ValueError(f"unknown asymptote mode {self.asymptote_mode!r}")
        if not 0.0 < self.tail_fraction < 1.0:
            raise ValueError("tail_fraction must lie in (0, 1)")
        if self.asymptote_mode == "fixed-value" and self.asymptote_value is None:
            raise ValueError("fixed-value mode requires asymptote_value")


@dataclass(frozen=True)
class ExpFitResult:
    asymptote: float
    terms: tuple[tuple[float, float], ...]  # (amplitude, timescale), tau ascending
    residual_rms: float
    converged: bool
    warnings: tuple[str, ...] = field(default=())

    @property
    def amplitudes(self) -> tuple[float, ...]:
        return tuple(a for a, _ in self.terms)

    @property
    def timescales(self) -> tuple[float, ...]:
        return tuple(tau for _, tau in self.terms)


def thermal_asymptote(times, values, config: FitConfig):
    """Asymptote per the configured mode; tail drift raises a warning flag.

    Returns (value_or_None, warnings); None means the asymptote is a free
    fit parameter.
    """
    warnings = []
    if config.asymptote_mode == "fixed-value":
        return float(config.asymptote_value), warnings
    if config.asymptote_mode == "free-parameter":
        return None, warnings
    n_tail = max(2, int(round(len(values) * config.tail_fraction)))
    tail = np.asarray(values[-n_tail:], dtype=float)
    value = float(tail.mean())
    half = n_tail // 2
    drift = abs(tail[half:].mean() - tail[:half].mean())
    span = max(abs(value), np.ptp(values), 1e-300)
    if drift > 0.05 * span:
        warnings.append(
            f"tail not stationary: drift {drift:.3e} over the averaging window"
        )
    return value, warnings


def _linear_solve(t, y, taus, free_offset):
    cols = [np.exp(-t / tau) for tau in taus]
    if free_offset:
        cols.append(np.ones_like(t))
    phi = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(phi, y, rcond=None)
    resid = y - phi @ coef
    return coef, resid


def _start_grids(t, n_terms, n_starts):
    t_span = t[-1] - t[0]
    lo, hi = np.log(max(t_span * 1e-3, 1e-12)), np.log(t_span * 2.0)
    grid = np.linspace(lo, hi, max(n_starts, n_terms + 2))
    starts = list(combinations(grid, n_terms))
    # prefer well-spread combinations, deterministically
    starts.sort(key=lambda c: (-min(np.diff(c)) if len(c) > 1 else 0.0, c))
    return [np.array(s) for s in starts[: max(n_starts, 1)]]


def fit_exponentials(times, values, config: FitConfig) -> ExpFitResult:
    """Fit asymptote + sum a_i exp(-t/tau_i) to a real series."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(t) < 10 * config.n_terms:
        raise ValueError(
            f"need at least {10 * config.n_terms} samples for {config.n_terms} terms"
        )
    offset, warnings = thermal_asymptote(t, y, config)
    free_offset = offset is None
    y_fit = y if free_offset else y - offset

    if np.ptp(y_fit) < config.tolerance**0.5 and not free_offset:
        # constant series: all amplitudes vanish
        terms = tuple((0.0, 1.0) for _ in range(config.n_terms))
        return ExpFitResult(offset, terms, float(np.std(y_fit)), True, tuple(warnings))

    def residual(log_taus):
        _, resid = _linear_solve(t, y_fit, np.exp(log_taus), free_offset)
        return resid

    y_span = max(np.ptp(y_fit), 1e-300)

    def degenerate(sol):
        # nearly equal taus let the linear solve cancel huge amplitudes;
        # such solutions describe t*exp(-t/tau) terms, not distinct decays
        taus = np.exp(np.sort(sol.x))
        if np.any(np.diff(taus) < 0.02 * taus[:-1]):
            return True
        coef, _ = _linear_solve(t, y_fit, np.exp(sol.x), free_offset)
        return float(np.max(np.abs(coef[: config.n_terms]))) > 100.0 * y_span

    best = None
    fallback = None
    for start in _start_grids(t, config.n_terms, config.n_starts):
        sol = least_squares(
            residual,
            start,
            method="lm",
            xtol=config.tolerance,
            ftol=config.tolerance,
            gtol=config.tolerance,
            max_nfev=config.max_iterations * (config.n_terms + 1),
        )
        if fallback is None or sol.cost < fallback.cost - 1e-15:
            fallback = sol
        if degenerate(sol):
            continue
        if best is None or sol.cost < best.cost - 1e-15:
            best = sol
    if best is None:
        best = fallback
        warnings.append("all fit starts degenerate; timescales may coincide")

    taus = np.exp(best.x)
    coef, resid = _linear_solve(t, y_fit, taus, free_offset)
    amps = coef[: config.n_terms]
    if free_offset:
        offset = float(coef[-1])
    grad_norm = float(np.linalg.norm(best.grad)) if best.grad is not None else np.inf
    converged = bool(best.status > 0) and grad_norm < max(
        1e-6, 1e3 * config.tolerance
    ) * max(1.0, best.cost)
    order = np.argsort(taus)
    terms = tuple((float(amps[i]), float(taus[i])) for i in order)
    rms = float(np.sqrt(np.mean(resid**2)))
    return ExpFitResult(float(offset), terms, rms, converged, tuple(warnings))


def fit_density_matrix_elements(
    times,
    rho_eig,
    noise_floor: float = NO_DECAY_FLOOR,
    tail_fraction: float = 0.2,
) -> dict[tuple[int, int], ExpFitResult | None]:
    """Single-exponential fit of every independent eigenbasis element.

    rho_eig has shape (n_times, d, d) in the energy eigenbasis.  Diagonal
    elements are fitted on their (real) values, off-diagonal elements on
    their modulus.  Elements whose total variation stays below the noise
    floor are reported as None (no decay, p = 0).  Per-element fit
    failures are recorded as non-converged results, not raised.
    """
    d = rho_eig.shape[1]
    out: dict[tuple[int, int], ExpFitResult | None] = {}
    cfg = FitConfig(n_terms=1, asymptote_mode="tail-average", tail_fraction=tail_fraction)
    for i in range(d):
        for j in range(i, d):
            series = rho_eig[:, i, j]
            y = series.real if i == j else np.abs(series)
            if np.ptp(y) < noise_floor:
                out[(i, j)] = None
                continue
            try:
                out[(i, j)] = fit_exponentials(times, y, cfg)
            except (ValueError, np.linalg.LinAlgError) as exc:
                out[(i, j)] = ExpFitResult(
                    float(np.mean(y)), ((0.0, 1.0),), float(np.std(y)), False,
                    (f"fit failed: {exc}",),
                )
    return out


def evaluate_fit(result: ExpFitResult, times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    y = np.full_like(t, result.asymptote)
    for a, tau in result.terms:
        y += a * np.exp(-t / tau)
    return y
