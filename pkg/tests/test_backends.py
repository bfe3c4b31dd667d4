"""The compiled core and the numpy fallback must agree."""

import numpy as np
import pytest

from rwa_markov import _backend

from conftest import BACKENDS, closed_form_v, random_hermitian

needs_compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")


def test_backend_name_is_known():
    assert _backend.BACKEND in ("python", "compiled")


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.get_kernels("fortran")


@pytest.mark.parametrize("name", BACKENDS)
def test_volterra_scalar_closed_form(name):
    volterra, _ = _backend.get_kernels(name)
    h = 1e-2
    t = h * np.arange(501)
    V = volterra(np.exp(-t)[:, None, None].astype(complex), h)
    assert np.max(np.abs(V[:, 0, 0] - closed_form_v(t))) < 1e-4


@needs_compiled
@pytest.mark.parametrize("N", [1, 2, 3])
def test_volterra_backends_agree(N):
    rng = np.random.default_rng(N)
    n = 300
    K = rng.normal(size=(n + 1, N, N)) + 1j * rng.normal(size=(n + 1, N, N))
    K *= np.exp(-0.05 * np.arange(n + 1))[:, None, None]
    a = _backend.get_kernels("python")[0](K, 0.01)
    b = _backend.get_kernels("compiled")[0](K, 0.01)
    assert np.max(np.abs(a - b)) < 1e-12


@needs_compiled
@pytest.mark.parametrize("n", [2, 5, 12])
def test_jacobi_backends_agree(n):
    H = random_hermitian(np.random.default_rng(n), n)
    wa, va, sa = _backend.get_kernels("python")[1](H, 100, 1e-15)
    wb, vb, sb = _backend.get_kernels("compiled")[1](H, 100, 1e-15)
    assert sa == sb
    np.testing.assert_allclose(wa, wb, atol=1e-12)
    np.testing.assert_allclose(va, vb, atol=1e-10)


@pytest.mark.parametrize("name", BACKENDS)
def test_jacobi_zero_budget_flags_failure(name):
    _, jacobi = _backend.get_kernels(name)
    _, _, sweeps = jacobi(np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex), 0, 1e-15)
    assert sweeps == -1
