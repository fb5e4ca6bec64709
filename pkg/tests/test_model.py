"""Electronic-sector operator algebra and eigensystem conventions."""

import numpy as np
import pytest

from hhdyn import model


def test_fermionic_anticommutators():
    eye = np.eye(model.FOCK_DIM)
    for p in range(4):
        for q in range(4):
            dp = model.annihilation_operator(p)
            dq_dag = model.creation_operator(q)
            anti = dp @ dq_dag + dq_dag @ dp
            target = eye if p == q else 0.0 * eye
            assert np.allclose(anti, target, atol=1e-14)
            dq = model.annihilation_operator(q)
            assert np.allclose(dp @ dq + dq @ dp, 0.0, atol=1e-14)


def test_sector_states_have_two_particles_and_zero_spin():
    n_tot = sum(model.number_operator(p) for p in range(4))
    sz = 0.5 * (
        model.number_operator(0)
        + model.number_operator(2)
        - model.number_operator(1)
        - model.number_operator(3)
    )
    assert np.allclose(model.project_to_sector(n_tot), 2.0 * np.eye(4))
    assert np.allclose(model.project_to_sector(sz), 0.0)


@pytest.mark.parametrize("U", [0.0, 1.0, 4.0, 6.0])
def test_eigenvalues_match_closed_form(U):
    params = model.ModelParams(U=U)
    vals = np.linalg.eigvalsh(model.build_hs(params))
    root = np.sqrt(U * U + 16.0)
    expected = np.sort([0.5 * (U - root), 0.0, U, 0.5 * (U + root)])
    assert np.max(np.abs(vals - expected)) < 1e-10


def test_mean_field_splitting():
    params = model.ModelParams(U=3.0)
    hs = model.build_hs(params)
    hs0 = model.build_hs0(params)
    vs = model.build_vs(params)
    assert np.allclose(hs, hs0 + vs, atol=1e-14)
    # the residual interaction is diagonal and acts only on the
    # singly-occupied states
    assert np.allclose(vs, np.diag([0.0, 0.0, -3.0, -3.0]), atol=1e-14)
    # the mean-field spectrum is the U=0 spectrum shifted by U
    vals0 = np.linalg.eigvalsh(model.build_hs(model.ModelParams(U=0.0)))
    assert np.allclose(np.linalg.eigvalsh(hs0), vals0 + 3.0, atol=1e-12)


def test_couplings_are_complete_orthogonal_projectors():
    qs = model.build_coupling_ops()
    assert len(qs) == 4
    assert np.allclose(sum(qs), np.eye(4), atol=1e-14)
    for i, qi in enumerate(qs):
        for j, qj in enumerate(qs):
            target = qi if i == j else np.zeros((4, 4))
            assert np.allclose(qi @ qj, target, atol=1e-14)


def test_couplings_commute_with_interaction_not_hopping():
    params = model.ModelParams(U=2.0)
    vs = model.build_vs(params)
    hs = model.build_hs(params)
    for q in model.build_coupling_ops():
        assert model.commutator_norm(vs, q) < 1e-14
        assert model.commutator_norm(hs, q) > 0.1


def test_spin_squared_spectrum():
    vals = np.sort(np.linalg.eigvalsh(model.total_spin_squared()))
    assert np.allclose(vals, [0.0, 0.0, 0.0, 2.0], atol=1e-12)


def test_degenerate_cluster_ordered_by_descending_spin():
    # at U=0 the middle eigenvalues coincide; the triplet must come first
    vals, vecs = model.hs_eigensystem(model.build_hs(model.ModelParams(U=0.0)))
    assert np.allclose(vals, [-2.0, 0.0, 0.0, 2.0], atol=1e-12)
    s2 = model.total_spin_squared()
    expectations = [float((vecs[:, k].conj() @ s2 @ vecs[:, k]).real) for k in range(4)]
    assert abs(expectations[1] - 2.0) < 1e-10
    assert abs(expectations[2]) < 1e-10


def test_eigenvector_gauge_is_real_positive():
    for U in (0.0, 2.5):
        _, vecs = model.hs_eigensystem(model.build_hs(model.ModelParams(U=U)))
        for k in range(4):
            lead = vecs[np.argmax(np.abs(vecs[:, k])), k]
            assert abs(lead.imag) < 1e-14
            assert lead.real > 0


def test_initial_state_is_pure_superposition():
    hs = model.build_hs(model.ModelParams(U=1.0))
    rho = model.initial_state(hs)
    assert abs(np.trace(rho) - 1.0) < 1e-14
    assert np.allclose(rho, rho @ rho, atol=1e-12)  # pure
    vals, vecs = model.hs_eigensystem(hs)
    psi = (vecs[:, 0] + vecs[:, 1]) / np.sqrt(2.0)
    assert np.allclose(rho, np.outer(psi, psi.conj()), atol=1e-12)


def test_initial_state_rejects_degenerate_ground():
    with pytest.raises(ValueError):
        model.initial_state(np.diag([0.0, 0.0, 1.0, 2.0]).astype(complex))


def test_spectral_density_peak():
    params = model.ModelParams(eta=0.7, gamma=0.4)
    assert abs(model.spectral_density(0.4, params) - 0.35) < 1e-14
    grid = np.linspace(0.01, 5.0, 500)
    assert np.max(model.spectral_density(grid, params)) <= 0.35 + 1e-12


@pytest.mark.parametrize(
    "kwargs",
    [
        {"t0": 0.0},
        {"t0": -1.0},
        {"U": -0.1},
        {"eta": -0.1},
        {"gamma": 0.0},
        {"beta": -2.0},
    ],
)
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        model.ModelParams(**kwargs)


def test_check_hermitian():
    model.check_hermitian(np.diag([1.0, 2.0]).astype(complex))
    with pytest.raises(ValueError):
        model.check_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))
