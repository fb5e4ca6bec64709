"""Variable-projection exponential fitting."""

import numpy as np
import pytest

from hhdyn import fitting


def _triexp(t):
    return 0.3 + 0.6 * np.exp(-t / 2.0) - 0.2 * np.exp(-t / 15.0)


def test_exact_recovery_free_asymptote():
    t = np.linspace(0.0, 60.0, 1201)
    cfg = fitting.FitConfig(n_terms=2, asymptote_mode="free-parameter")
    res = fitting.fit_exponentials(t, _triexp(t), cfg)
    assert abs(res.asymptote - 0.3) < 1e-8
    (a1, tau1), (a2, tau2) = res.terms
    assert abs(a1 - 0.6) < 1e-8 and abs(tau1 - 2.0) < 1e-7
    assert abs(a2 + 0.2) < 1e-8 and abs(tau2 - 15.0) < 1e-6
    assert res.converged
    assert res.residual_rms < 1e-10


def test_recovery_within_one_percent_tail_mode():
    t = np.linspace(0.0, 200.0, 2001)
    cfg = fitting.FitConfig(n_terms=2, asymptote_mode="tail-average")
    res = fitting.fit_exponentials(t, _triexp(t), cfg)
    for (a, tau), (a_true, tau_true) in zip(res.terms, [(0.6, 2.0), (-0.2, 15.0)]):
        assert abs(a - a_true) < 0.01 * abs(a_true)
        assert abs(tau - tau_true) < 0.01 * tau_true


def test_fixed_asymptote_mode():
    t = np.linspace(0.0, 40.0, 801)
    y = 0.5 + 0.4 * np.exp(-t / 3.0)
    cfg = fitting.FitConfig(
        n_terms=1, asymptote_mode="fixed-value", asymptote_value=0.5
    )
    res = fitting.fit_exponentials(t, y, cfg)
    assert res.asymptote == 0.5
    assert abs(res.terms[0][0] - 0.4) < 1e-9
    assert abs(res.terms[0][1] - 3.0) < 1e-8


def test_degenerate_timescales_rejected():
    # a single decay fitted with three terms must not produce the huge
    # canceling amplitude pairs of a collapsed basis
    t = np.linspace(0.0, 40.0, 801)
    y = 0.5 + 0.4 * np.exp(-t / 3.0)
    cfg = fitting.FitConfig(n_terms=3, asymptote_mode="tail-average")
    res = fitting.fit_exponentials(t, y, cfg)
    assert max(abs(a) for a in res.amplitudes) < 40.0
    dominant = max(res.terms, key=lambda term: abs(term[0]))
    assert abs(dominant[0] - 0.4) < 0.01
    assert abs(dominant[1] - 3.0) < 0.05


def test_constant_series():
    t = np.linspace(0.0, 10.0, 101)
    y = np.full_like(t, 0.7)
    res = fitting.fit_exponentials(
        t, y, fitting.FitConfig(n_terms=2, asymptote_mode="tail-average")
    )
    assert abs(res.asymptote - 0.7) < 1e-12
    assert all(a == 0.0 for a in res.amplitudes)


def test_tail_drift_warning():
    t = np.linspace(0.0, 10.0, 201)
    y = 1.0 - 0.08 * t  # no stationary tail
    res = fitting.fit_exponentials(
        t, y, fitting.FitConfig(n_terms=1, asymptote_mode="tail-average")
    )
    assert any("tail" in w for w in res.warnings)


def test_evaluate_fit_round_trip():
    res = fitting.ExpFitResult(
        asymptote=0.3, terms=((0.6, 2.0), (-0.2, 15.0)), residual_rms=0.0,
        converged=True,
    )
    t = np.linspace(0.0, 30.0, 61)
    assert np.allclose(fitting.evaluate_fit(res, t), _triexp(t), atol=1e-14)


def test_config_validation():
    with pytest.raises(ValueError):
        fitting.FitConfig(n_terms=0)
    with pytest.raises(ValueError):
        fitting.FitConfig(n_terms=4)
    with pytest.raises(ValueError):
        fitting.FitConfig(asymptote_mode="bogus")
    with pytest.raises(ValueError):
        fitting.FitConfig(asymptote_mode="fixed-value")
    with pytest.raises(ValueError):
        fitting.FitConfig(tail_fraction=1.5)
    with pytest.raises(ValueError):
        fitting.fit_exponentials([0, 1], [1, 2], fitting.FitConfig(n_terms=1))


def test_element_fits_flag_flat_series():
    t = np.linspace(0.0, 120.0, 1201)
    rho = np.zeros((len(t), 4, 4), dtype=complex)
    rho[:, 0, 0] = 0.4 + 0.3 * np.exp(-t / 5.0)
    rho[:, 1, 1] = 0.6 - 0.3 * np.exp(-t / 5.0)
    rho[:, 0, 1] = 0.5 * np.exp(-t / 8.0) * np.exp(2j * t)  # decaying modulus
    rho[:, 2, 3] = 1e-6  # below the decay floor
    fits = fitting.fit_density_matrix_elements(t, rho)
    assert abs(fits[(0, 0)].terms[0][1] - 5.0) < 0.05
    assert abs(fits[(0, 1)].terms[0][1] - 8.0) < 0.08
    assert abs(fits[(0, 1)].terms[0][0] - 0.5) < 0.005
    assert fits[(2, 3)] is None
    assert fits[(3, 3)] is None
