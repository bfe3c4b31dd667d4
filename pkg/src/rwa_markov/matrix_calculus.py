"""Spectral calculus for small dense matrices.

Hermitian decompositions come from a cyclic Jacobi eigensolver (compiled when
available).  Eigenvalues closer than ``1e-8 * max(1, ||H||)`` share one
projector, and every divided difference evaluated between members of a
cluster falls back to the derivative branch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _backend
from .bath_kernel import BathKernel, divided_difference_G_tilde, eval_G_tilde
from .errors import ConvergenceFailure, ValidationError

HERMITIAN_TOLERANCE = 1e-12
EIGEN_CLUSTER_TOLERANCE = 1e-8
JACOBI_MAX_SWEEPS = 100
JACOBI_TOLERANCE = 1e-15


def as_hermitian(H, name="matrix") -> np.ndarray:
    """Validate approximate Hermiticity and return the symmetrized matrix."""
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValidationError(name, f"expected a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValidationError(name, "entries must be finite")
    scale = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(H - H.conj().T)) > HERMITIAN_TOLERANCE * scale:
        raise ValidationError(name, "matrix is not Hermitian")
    return 0.5 * (H + H.conj().T)


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray        # distinct (clustered), ascending
    projectors: np.ndarray         # (n_clusters, N, N)
    unitary: np.ndarray            # columns are eigenvectors, ascending order
    multiplicities: tuple

    @property
    def dim(self) -> int:
        return self.unitary.shape[0]

    def reconstruct(self) -> np.ndarray:
        return np.einsum("a,aij->ij", self.eigenvalues, self.projectors)


def spectral_decompose(H, cluster_tol=EIGEN_CLUSTER_TOLERANCE) -> SpectralDecomposition:
    """Eigen-decompose a Hermitian matrix and merge near-degenerate levels."""
    H = as_hermitian(H)
    w, U, sweeps = _backend.jacobi_hermitian(H, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE)
    if sweeps < 0:
        raise ConvergenceFailure(
            f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (dim {H.shape[0]})")
    order = np.argsort(w, kind="stable")
    w = w[order]
    U = np.ascontiguousarray(U[:, order])
    tol = cluster_tol * max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)

    groups = [[0]]
    for k in range(1, w.size):
        if w[k] - w[k - 1] < tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    values = np.array([w[g].mean() for g in groups])
    projs = np.array([U[:, g] @ U[:, g].conj().T for g in groups])
    return SpectralDecomposition(values, projs, U, tuple(len(g) for g in groups))


def matrix_function(f: Callable, D: SpectralDecomposition) -> np.ndarray:
    """``sum_a f(E_a) Pi_a``."""
    vals = np.array([f(E) for E in D.eigenvalues], dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise ValueError("f is not finite on the spectrum")
    return np.einsum("a,aij->ij", vals, D.projectors)


def sandwich_divided_difference(kernel: BathKernel, D: SpectralDecomposition, M) -> np.ndarray:
    """``sum_{a,b} dG~(-i E_a, -i E_b) Pi_a M Pi_b``.

    Same-cluster pairs use the derivative branch because the clustered
    eigenvalues coincide exactly.
    """
    M = np.asarray(M, dtype=complex)
    if M.shape != (D.dim, D.dim):
        raise ValueError(f"dimension mismatch: {M.shape} vs {D.dim}")
    p = -1j * D.eigenvalues
    out = np.zeros_like(M)
    for a, Pa in enumerate(D.projectors):
        PaM = Pa @ M
        for b, Pb in enumerate(D.projectors):
            out += divided_difference_G_tilde(kernel, p[a], p[b]) * (PaM @ Pb)
    return out


def feynman_ordered_apply(f: Callable, A1: SpectralDecomposition, A2: SpectralDecomposition,
                          A3: SpectralDecomposition, indices: Sequence[int] = (1, 2, 3)) -> np.ndarray:
    """Three-argument function of non-commuting Hermitian operators.

    ``indices[k]`` is the Feynman index attached to operand ``A_{k+1}``; in
    each product term the projector with the smaller index stands further
    left.  Ties keep the operand order.
    """
    if len(indices) != 3:
        raise ValueError("exactly three Feynman indices are required")
    if not (A1.dim == A2.dim == A3.dim):
        raise ValueError("operands must share a dimension")
    ops = (A1, A2, A3)
    order = sorted(range(3), key=lambda k: (indices[k], k))
    out = np.zeros((A1.dim, A1.dim), dtype=complex)
    for i, a1 in enumerate(A1.eigenvalues):
        for j, a2 in enumerate(A2.eigenvalues):
            for k, a3 in enumerate(A3.eigenvalues):
                coef = f(a1, a2, a3)
                if coef == 0:
                    continue
                picks = (i, j, k)
                prod = ops[order[0]].projectors[picks[order[0]]]
                prod = prod @ ops[order[1]].projectors[picks[order[1]]]
                prod = prod @ ops[order[2]].projectors[picks[order[2]]]
                out += coef * prod
    return out


# Pade numerator coefficients b_0..b_m; the denominator uses (-1)^k b_k.
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}
# largest 1-norm for which degree m keeps the backward error below 2^-53
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}


def _pade_uv(A, m):
    b = _PADE[m]
    n = A.shape[0]
    ident = np.eye(n, dtype=A.dtype)
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
        return U, V
    powers = [ident, A2]
    while len(powers) < (m + 1) // 2:
        powers.append(powers[-1] @ A2)
    U = A @ sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
    V = sum(b[2 * k] * powers[k] for k in range(len(powers)))
    return U, V


def matrix_exp(A, t: float = 1.0) -> np.ndarray:
    """``exp(A t)`` by scaling and squaring with a diagonal Pade approximant."""
    X = np.asarray(A, dtype=complex) * t
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError("matrix_exp expects a square matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix_exp requires finite entries")
    norm = np.linalg.norm(X, 1)
    if norm == 0.0:
        return np.eye(X.shape[0], dtype=complex)
    squarings = 0
    for m in (3, 5, 7, 9):
        if norm <= _THETA[m]:
            break
    else:
        m = 13
        squarings = max(0, int(np.ceil(np.log2(norm / _THETA[13]))))
        X = X / 2.0 ** squarings
    U, V = _pade_uv(X, m)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(squarings):
        R = R @ R
    return R


def hermitian_eigenvalues(H) -> np.ndarray:
    w, _, sweeps = _backend.jacobi_hermitian(np.asarray(H, dtype=complex),
                                             JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE)
    if sweeps < 0:
        raise ConvergenceFailure(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    return np.sort(w)


def dissipativity_margin(L) -> float:
    """Largest eigenvalue of the Hermitian part of ``L`` (``<= 0`` iff dissipative)."""
    L = np.asarray(L, dtype=complex)
    return float(hermitian_eigenvalues(0.5 * (L + L.conj().T))[-1])


def spectral_norm(M) -> float:
    """Largest singular value."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return float(np.sqrt(max(hermitian_eigenvalues(M.conj().T @ M)[-1], 0.0)))
