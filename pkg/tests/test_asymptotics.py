import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rwa_markov import (BathKernel, DensityBlocks, SystemModel, asymptotic_data,
                        asymptotic_density, compute_L, compute_L_explicit, compute_r,
                        eval_G_tilde, gksl_decompose, liouvillian, markov_density, renormalize)
from rwa_markov.asymptotics import AsymptoticData, gksl_liouvillian
from rwa_markov.errors import DefectiveGenerator
from rwa_markov.harness.scenario import random_scenario
from rwa_markov.matrix_calculus import dissipativity_margin, matrix_exp

from conftest import random_state


def test_r_at_zero_coupling(reference_model, unit_kernel):
    np.testing.assert_array_equal(compute_r(reference_model.with_lambda(0.0), unit_kernel), np.eye(2))


def test_r_scalar(unit_kernel):
    r = compute_r(SystemModel([[0.0]], [[0.0]], 0.1), unit_kernel)
    # G~(p) = 1/(p+1) so G~'(0) = -1
    assert r[0, 0] == pytest.approx(1.01, abs=1e-15)


def test_r_two_level(unit_kernel):
    lam = 0.3
    r = compute_r(SystemModel(np.diag([0.0, 1.0]), np.zeros((2, 2)), lam), unit_kernel)
    expected = np.eye(2) - lam ** 2 * np.diag([-1.0, -1.0 / (1.0 - 1j) ** 2])
    np.testing.assert_allclose(r, expected, atol=1e-15)


def test_L_zeroth_order(reference_model, unit_kernel):
    L = compute_L(reference_model.with_lambda(0.0), unit_kernel)
    np.testing.assert_allclose(L, -np.diag([1 / (1 - 1j), 1 / (1 - 2j)]), atol=1e-15)


def test_L_scalar(unit_kernel):
    L = compute_L(SystemModel([[0.0]], [[2.0]], 0.1), unit_kernel)
    assert L[0, 0] == pytest.approx(-1.01 - 0.02j, abs=1e-15)


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("degenerate", [False, True])
def test_dual_formula(seed, degenerate):
    sc = random_scenario(seed, N=int(2 + seed % 3), degenerate=degenerate)
    m = sc.model_at(0.3)
    assert np.max(np.abs(compute_L(m, sc.kernel) - compute_L_explicit(m, sc.kernel))) < 1e-10


def test_near_commutation_is_fourth_order(reference_model, unit_kernel):
    lams = np.array([0.2, 0.1, 0.05])
    errs = []
    for lam in lams:
        d = asymptotic_data(reference_model.with_lambda(lam), unit_kernel)
        rinv = np.linalg.inv(d.r)
        errs.append(np.linalg.norm(rinv @ d.L @ d.r - d.L, 2))
    assert np.polyfit(np.log(lams), np.log(errs), 1)[0] >= 3.5


def test_renormalize_examples():
    rho = DensityBlocks.from_matrix(random_state(np.random.default_rng(0), 2))
    np.testing.assert_allclose(renormalize(rho, np.eye(2)).to_matrix(), rho.to_matrix(), atol=1e-15)
    g = DensityBlocks.ground(2)
    np.testing.assert_array_equal(renormalize(g, np.array([[1.2, 0.3j], [0.1, 0.9]])).to_matrix(),
                                  g.to_matrix())
    out = renormalize(DensityBlocks(0.0, [0.0], [0.0], [[1.0]]), np.array([[1.01]]))
    assert out.ee[0, 0].real == pytest.approx(1.0201, abs=1e-14)
    assert out.gg == pytest.approx(-0.0201, abs=1e-14)
    assert out.min_eigenvalue() < 0  # R is not a channel


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_renormalization_preserves_trace(seed, N):
    rng = np.random.default_rng(seed)
    rho = DensityBlocks.from_matrix(random_state(rng, N))
    r = np.eye(N) + 0.3 * (rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N)))
    assert abs(renormalize(rho, r).trace() - 1) < 1e-12


def test_asymptotic_density_initial_value(reference_model, unit_kernel):
    rho = DensityBlocks.from_matrix(random_state(np.random.default_rng(3), 2))
    d = asymptotic_data(reference_model, unit_kernel)
    np.testing.assert_allclose(asymptotic_density(rho, d, 0.0).to_matrix(),
                               renormalize(rho, d.r).to_matrix(), atol=1e-15)


def test_asymptotic_density_scalar_decay(unit_kernel):
    d = asymptotic_data(SystemModel([[0.0]], [[0.0]], 0.0), unit_kernel)
    excited = DensityBlocks(0.0, [0.0], [0.0], [[1.0]])
    for t in (0.5, 1.0, 3.0):
        assert asymptotic_density(excited, d, t).ee[0, 0].real == pytest.approx(np.exp(-2 * t), rel=1e-13)


def test_asymptotic_density_equals_liouvillian_flow(reference_model, unit_kernel):
    d = asymptotic_data(reference_model, unit_kernel)
    rho = DensityBlocks.from_matrix(random_state(np.random.default_rng(9), 2))
    t = 1.3
    via_blocks = asymptotic_density(rho, d, t).to_matrix()
    Rrho = renormalize(rho, d.r).to_matrix().reshape(-1)
    via_generator = (matrix_exp(liouvillian(d.L), t) @ Rrho).reshape(3, 3)
    np.testing.assert_allclose(via_blocks, via_generator, atol=1e-12)


def test_gksl_examples():
    g = gksl_decompose(np.array([[-0.5 - 2j]]))
    assert g.modes[0].epsilon == pytest.approx(2.0)
    assert g.modes[0].gamma == pytest.approx(1.0)
    g = gksl_decompose(np.array([[-1.01 - 0.02j]]))
    assert g.modes[0].gamma == pytest.approx(2.02, abs=1e-14)
    assert g.modes[0].epsilon == pytest.approx(0.02, abs=1e-14)


def test_gksl_diagonal_case(unit_kernel):
    E = np.array([0.0, 1.0, 2.5])
    L = compute_L(SystemModel(np.diag(E), np.zeros((3, 3)), 0.0), unit_kernel)
    g = gksl_decompose(L)
    assert g.orthogonal
    for mode in g.modes:
        k = int(np.argmax(np.abs(mode.eigvec)))
        np.testing.assert_allclose(mode.eigvec, np.eye(3)[k], atol=1e-14)
        assert mode.gamma == pytest.approx(2 * eval_G_tilde(unit_kernel, -1j * E[k]).real, abs=1e-14)
        assert mode.epsilon == pytest.approx(eval_G_tilde(unit_kernel, -1j * E[k]).imag, abs=1e-14)


def test_gksl_eigen_relation_and_phase(reference_model, unit_kernel):
    L = compute_L(reference_model, unit_kernel)
    g = gksl_decompose(L)
    for m in g.modes:
        mu = -1j * m.epsilon - m.gamma / 2
        assert np.max(np.abs(L @ m.eigvec - mu * m.eigvec)) < 1e-10
        assert np.linalg.norm(m.eigvec) == pytest.approx(1.0)
        k = int(np.argmax(np.abs(m.eigvec)))
        assert m.eigvec[k].imag == 0 and m.eigvec[k].real > 0
    assert not g.orthogonal  # H2 mixes levels, so L is non-normal here
    assert g.gammas.min() >= -1e-10


def test_gksl_literal_generator_matches_when_normal(unit_kernel):
    L = compute_L(SystemModel(np.diag([0.0, 1.0]), np.diag([0.3, -0.2]), 0.2), unit_kernel)
    g = gksl_decompose(L)
    assert g.orthogonal
    np.testing.assert_allclose(gksl_liouvillian(g, 2), liouvillian(L), atol=1e-13)


def test_gksl_defective():
    with pytest.raises(DefectiveGenerator):
        gksl_decompose(np.array([[-1.0, 1.0], [0.0, -1.0]]))


@pytest.mark.parametrize("lam", [0.0, 0.05, 0.1, 0.2])
def test_dissipative_for_small_lambda(reference_model, unit_kernel, lam):
    assert dissipativity_margin(compute_L(reference_model.with_lambda(lam), unit_kernel)) <= 1e-12


def test_markov_density_is_unrenormalized(reference_model, unit_kernel):
    d = asymptotic_data(reference_model, unit_kernel)
    rho = DensityBlocks.from_matrix(random_state(np.random.default_rng(4), 2))
    plain = AsymptoticData(np.eye(2), d.L, d.lam)
    np.testing.assert_allclose(markov_density(rho, d.L, 0.7).to_matrix(),
                               asymptotic_density(rho, plain, 0.7).to_matrix(), atol=1e-15)


def test_order_zero_data(reference_model, unit_kernel):
    d0 = asymptotic_data(reference_model, unit_kernel, order=0)
    np.testing.assert_array_equal(d0.r, np.eye(2))
    np.testing.assert_allclose(d0.L, compute_L(reference_model.with_lambda(0), unit_kernel))
    with pytest.raises(ValueError):
        asymptotic_data(reference_model, unit_kernel, order=4)
