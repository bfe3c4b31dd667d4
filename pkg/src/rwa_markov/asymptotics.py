"""Second-order weak-coupling asymptotics of the rescaled propagator.

For fixed rescaled time t > 0,

    W_lambda(t) = exp(L t) r + O(lambda^4),
    r = 1 - lambda^2 G~'(-i H0),
    L = -G~(-i H0) + lambda^2 (G~'(-i H0) G~(-i H0) + i H2 * dG~(-i H0, -i H0)),

where the last product puts H2 between the two spectral arguments of the
divided difference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bath_kernel import BathKernel, eval_G_tilde
from .errors import DefectiveGenerator
from .exact_dynamics import DensityBlocks, SystemModel, apply_block_map
from .matrix_calculus import (SpectralDecomposition, matrix_exp, matrix_function,
                              sandwich_divided_difference, spectral_decompose)

EIGENVECTOR_CONDITION_LIMIT = 1e12
GRAM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class AsymptoticData:
    r: np.ndarray
    L: np.ndarray
    lam: float

    def semigroup(self, t: float) -> np.ndarray:
        """``exp(L t) r``."""
        return matrix_exp(self.L, t) @ self.r


@dataclass(frozen=True)
class GkslMode:
    epsilon: float
    gamma: float
    eigvec: np.ndarray


@dataclass(frozen=True)
class GkslData:
    modes: tuple
    gram_deviation: float

    @property
    def orthogonal(self) -> bool:
        return self.gram_deviation <= GRAM_TOLERANCE

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([m.epsilon for m in self.modes])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([m.gamma for m in self.modes])


def _transform_on_spectrum(kernel, D, order):
    return matrix_function(lambda E: eval_G_tilde(kernel, -1j * E, order), D)


def compute_r(model: SystemModel, kernel: BathKernel, D: SpectralDecomposition | None = None):
    D = D or spectral_decompose(model.H0)
    return np.eye(model.N) - model.lam ** 2 * _transform_on_spectrum(kernel, D, 1)


def compute_L(model: SystemModel, kernel: BathKernel, D: SpectralDecomposition | None = None):
    """Corrected generator in operator-function form."""
    D = D or spectral_decompose(model.H0)
    F = _transform_on_spectrum(kernel, D, 0)
    Fp = _transform_on_spectrum(kernel, D, 1)
    S = sandwich_divided_difference(kernel, D, model.H2)
    return -F + model.lam ** 2 * (Fp @ F + 1j * S)


def compute_L_explicit(model: SystemModel, kernel: BathKernel,
                       D: SpectralDecomposition | None = None):
    """Corrected generator written out level by level.

    Diagonal blocks carry ``(G~(-iE) + i Pi H2 Pi) G~'(-iE) Pi``; off-diagonal
    blocks carry the difference quotient in the energies.
    """
    D = D or spectral_decompose(model.H0)
    lam2 = model.lam ** 2
    H2 = model.H2
    g = [eval_G_tilde(kernel, -1j * E) for E in D.eigenvalues]
    gp = [eval_G_tilde(kernel, -1j * E, 1) for E in D.eigenvalues]
    L = np.zeros((model.N, model.N), dtype=complex)
    for a, (E, P) in enumerate(zip(D.eigenvalues, D.projectors)):
        L -= g[a] * P
        L += lam2 * (g[a] * P + 1j * (P @ H2 @ P)) @ (gp[a] * P)
        for b, (E2, P2) in enumerate(zip(D.eigenvalues, D.projectors)):
            if a != b:
                L -= lam2 * (g[a] - g[b]) / (E - E2) * (P @ H2 @ P2)
    return L


def asymptotic_data(model: SystemModel, kernel: BathKernel, order: int = 2) -> AsymptoticData:
    """``r`` and ``L``; ``order=0`` truncates both at lambda^0."""
    D = spectral_decompose(model.H0)
    if order == 0:
        m0 = model.with_lambda(0.0)
        return AsymptoticData(compute_r(m0, kernel, D), compute_L(m0, kernel, D), model.lam)
    if order != 2:
        raise ValueError("order must be 0 or 2")
    return AsymptoticData(compute_r(model, kernel, D), compute_L(model, kernel, D), model.lam)


def renormalize(rho: DensityBlocks, r) -> DensityBlocks:
    """Renormalization superoperator R; not positivity preserving in general."""
    return apply_block_map(rho, r)


def asymptotic_density(rho0: DensityBlocks, data: AsymptoticData, t: float) -> DensityBlocks:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return apply_block_map(rho0, data.semigroup(t))


def markov_density(rho0: DensityBlocks, L, t: float) -> DensityBlocks:
    """Semigroup evolution generated by L without any renormalization."""
    return apply_block_map(rho0, matrix_exp(L, t))


def gksl_decompose(L) -> GkslData:
    """Frequencies and rates read off the eigenvalues ``-i eps - Gamma/2`` of L.

    Eigenvectors are right eigenvectors with unit norm and the
    largest-magnitude entry rotated to the positive real axis.  Modes are
    sorted by frequency.
    """
    L = np.asarray(L, dtype=complex)
    mu, vecs = np.linalg.eig(L)
    if not np.all(np.isfinite(vecs)) or np.linalg.cond(vecs) > EIGENVECTOR_CONDITION_LIMIT:
        raise DefectiveGenerator("L is not diagonalizable within tolerance")
    modes = []
    for k in np.lexsort((-2 * mu.real, -mu.imag)):
        v = vecs[:, k] / np.linalg.norm(vecs[:, k])
        j = int(np.argmax(np.abs(v)))
        v = v * (abs(v[j]) / v[j])
        modes.append(GkslMode(float(-mu[k].imag), float(-2 * mu[k].real), v))
    basis = np.array([m.eigvec for m in modes]).T
    gram = basis.conj().T @ basis
    return GkslData(tuple(modes), float(np.max(np.abs(gram - np.eye(len(modes))))))


def _vec_superop(left, right):
    """Matrix of rho -> left @ rho @ right acting on row-major vec(rho)."""
    return np.kron(left, right.T)


def liouvillian(L) -> np.ndarray:
    """GKSL generator on the (N+1)-level space whose flow reproduces exp(L t).

    Built from the Hamiltonian and dissipative parts of L; the dissipator's
    jump operators are ``|0><k|`` along eigenvectors of ``-(L + L^+)``.
    Returned as a matrix acting on row-major ``vec(rho)``.
    """
    L = np.asarray(L, dtype=complex)
    N = L.shape[0]
    K = np.zeros((N + 1, N + 1), dtype=complex)
    K[1:, 1:] = L
    ident = np.eye(N + 1)
    # d rho/dt = K rho + rho K^+ + sum_k J_k rho J_k^+
    sup = _vec_superop(K, ident) + _vec_superop(ident, K.conj().T)
    D = -(L + L.conj().T)
    w, U = np.linalg.eigh(D)
    for gamma, u in zip(w, U.T):
        J = np.zeros((N + 1, N + 1), dtype=complex)
        J[0, 1:] = u.conj()
        sup += gamma * _vec_superop(J, J.conj().T)
    return sup


def gksl_liouvillian(data: GkslData, N: int) -> np.ndarray:
    """Literal generator from (eps_l, Gamma_l, |l>); exact only for orthogonal modes."""
    ident = np.eye(N + 1)
    H = np.zeros((N + 1, N + 1), dtype=complex)
    sup = np.zeros(((N + 1) ** 2,) * 2, dtype=complex)
    for mode in data.modes:
        ket = np.concatenate([[0.0], mode.eigvec])
        proj = np.outer(ket, ket.conj())
        H += mode.epsilon * proj
        J = np.zeros((N + 1, N + 1), dtype=complex)
        J[0] = ket.conj()
        JdJ = J.conj().T @ J
        sup += mode.gamma * (_vec_superop(J, J.conj().T)
                             - 0.5 * (_vec_superop(JdJ, ident) + _vec_superop(ident, JdJ)))
    sup += -1j * (_vec_superop(H, ident) - _vec_superop(ident, H))
    return sup
