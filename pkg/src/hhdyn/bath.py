"""Exponential decomposition of the Debye bath correlation function.

The correlation function of a bath with spectral density
J(w) = eta * gamma * w / (w^2 + gamma^2) at inverse temperature beta is

    C(t) = (1/pi) * Int_0^inf J(w) [coth(beta w / 2) cos(wt) - i sin(wt)] dw
         = sum_k c_k exp(-nu_k t),   t >= 0,

with a single pole term (c_0, nu_0 = gamma) plus Matsubara terms at
nu_k = 2 pi k / beta.  The truncated Matsubara tail is absorbed into a
Markovian double-commutator correction with coefficient xi (the
Ishizaki-Tanimura terminator), using the closed form

    sum_{k>=0} Re(c_k) / nu_k = eta / (beta gamma),

so xi = eta/(beta gamma) - Re(c_0)/gamma - sum_{k=1..K} c_k/nu_k -> 0 as
K -> inf.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad


@dataclass(frozen=True)
class BathExpansion:
    """Exponential expansion {(c_k, nu_k)} of one bath's C(t)."""

    amplitudes: np.ndarray  # complex, shape (K+1,)
    rates: np.ndarray  # real positive, shape (K+1,)
    matsubara_count: int
    terminator_coefficient: float = field(default=0.0)

    def __post_init__(self):
        if np.any(self.rates <= 0):
            raise ValueError("all decay rates must be positive")

    @property
    def n_terms(self) -> int:
        return len(self.rates)

    def correlation(self, t):
        """C(t) from the truncated expansion, t >= 0."""
        t = np.asarray(t, dtype=float)
        return np.sum(
            self.amplitudes[:, None] * np.exp(-self.rates[:, None] * t[None, :]), axis=0
        )


def expand_bath(eta: float, gamma: float, beta: float, K: int) -> BathExpansion:
    """Matsubara expansion of the Debye correlation function with K terms."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    x = beta * gamma / 2.0
    if abs(np.sin(x)) < 1e-12:
        raise ValueError(
            f"beta*gamma/2 = {x} is at a cotangent pole; the expansion is singular"
        )
    c = np.empty(K + 1, dtype=complex)
    nu = np.empty(K + 1, dtype=float)
    c[0] = 0.5 * eta * gamma * (1.0 / np.tan(x) - 1j)
    nu[0] = gamma
    for k in range(1, K + 1):
        nu[k] = 2.0 * np.pi * k / beta
        c[k] = (2.0 * eta * gamma / beta) * nu[k] / (nu[k] ** 2 - gamma**2)
    xi = eta / (beta * gamma) - c[0].real / gamma
    if K >= 1:
        xi -= float(np.sum(c[1:].real / nu[1:]))
    return BathExpansion(
        amplitudes=c, rates=nu, matsubara_count=K, terminator_coefficient=xi
    )


def correlation_function_exact(t, eta: float, gamma: float, beta: float):
    """C(t) for t > 0 by direct quadrature of the Debye spectral integral.

    Independent of the exponential expansion; used to certify it.  The
    real part is split into a thermal piece with coth - 1 (exponentially
    decaying integrand, plain quadrature) and a zero-temperature piece
    handled with Fourier-weighted quadrature.  Note Re C(0+) diverges
    logarithmically for a Debye bath, so t must be strictly positive.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t <= 0):
        raise ValueError("quadrature oracle requires t > 0")
    out = np.empty(len(t), dtype=complex)

    def j(w):
        return eta * gamma * w / (w**2 + gamma**2)

    def thermal(w):
        # J(w) * (coth(beta w / 2) - 1), decays like 2 J exp(-beta w)
        return j(w) * (1.0 / np.tanh(beta * w / 2.0) - 1.0)

    for i, ti in enumerate(t):
        re_th, _ = quad(
            lambda w: thermal(w) * np.cos(w * ti) / np.pi, 0.0, np.inf, limit=400
        )
        re_zt, _ = quad(
            lambda w: j(w) / np.pi, 0.0, np.inf, weight="cos", wvar=ti, limit=400
        )
        im, _ = quad(
            lambda w: -j(w) / np.pi, 0.0, np.inf, weight="sin", wvar=ti, limit=400
        )
        out[i] = re_th + re_zt + 1j * im
    return out if out.size > 1 else out[0]
