from pathlib import Path

import numpy as np
import pytest

from rwa_markov import BathKernel, SystemModel
from rwa_markov import _backend

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

BACKENDS = ["python"]
try:
    from rwa_markov import _kernels  # noqa: F401
    BACKENDS.append("compiled")
except ImportError:
    pass


def closed_form_v(t):
    """Scalar solution of v'' + v' + v = 0, v(0) = 1, v'(0) = 0."""
    t = np.asarray(t, dtype=float)
    w = np.sqrt(3.0) / 2
    return np.exp(-t / 2) * (np.cos(w * t) + np.sin(w * t) / np.sqrt(3.0))


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    volterra, jacobi = _backend.get_kernels(request.param)
    monkeypatch.setattr(_backend, "volterra_trapezoid", volterra)
    monkeypatch.setattr(_backend, "jacobi_hermitian", jacobi)
    return request.param


@pytest.fixture
def unit_kernel():
    return BathKernel.single(1.0, 1.0, 0.0)


@pytest.fixture
def scalar_model():
    return SystemModel([[0.0]], [[0.0]], 1.0)


@pytest.fixture
def reference_model():
    return SystemModel(np.diag([1.0, 2.0]), [[0.0, 1.0], [1.0, 0.0]], 0.2)


def random_hermitian(rng, n, scale=1.0):
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (X + X.conj().T)


def random_hermitian_degenerate(rng, n):
    levels = rng.choice([-1.0, 0.5, 2.0], size=n)
    if n > 1:
        levels[1] = levels[0]
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    return Q @ np.diag(levels) @ Q.conj().T


def random_state(rng, N, rank=None):
    """(N+1)-level density matrix from a random Gram product; ``rank=1`` is pure."""
    X = rng.normal(size=(N + 1, rank or N + 1)) + 1j * rng.normal(size=(N + 1, rank or N + 1))
    rho = X @ X.conj().T
    return rho / np.trace(rho)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
