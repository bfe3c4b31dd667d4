"""Pure numpy implementations of the hot loops.

These mirror ``_kernels.pyx`` operation for operation and are used whenever
the compiled extension is unavailable.
"""

import numpy as np


def volterra_trapezoid(K, h):
    """Integrate ``V' = -int_0^t K(t-s) V(s) ds`` with ``V(0) = I``.

    ``K`` holds the kernel samples ``K[k] = K(k h)`` with shape (n+1, N, N).
    The memory integral uses the composite trapezoidal rule; each step is an
    explicit Euler predictor followed by one trapezoidal correction.
    """
    K = np.ascontiguousarray(K, dtype=complex)
    n = K.shape[0] - 1
    N = K.shape[1]
    V = np.empty_like(K)
    F = np.empty_like(K)
    V[0] = np.eye(N)
    F[0] = 0.0
    half_h = 0.5 * h
    # Kr[i, p, j] = K[n - p, i, j]: the history sum becomes one flat matmul
    Kr = np.ascontiguousarray(K[::-1].transpose(1, 0, 2))
    for m in range(1, n + 1):
        hist = 0.5 * (K[m] @ V[0])
        if m > 1:
            hist = hist + Kr[:, n - m + 1:n, :].reshape(N, -1) @ V[1:m].reshape(-1, N)
        hist *= h
        pred = V[m - 1] + h * F[m - 1]
        f_pred = -(hist + half_h * (K[0] @ pred))
        V[m] = V[m - 1] + half_h * (F[m - 1] + f_pred)
        F[m] = -(hist + half_h * (K[0] @ V[m]))
    return V


def jacobi_hermitian(A, max_sweeps, tol):
    """Cyclic complex Jacobi eigensolver.

    Returns ``(eigenvalues, eigenvectors, sweeps)``; ``sweeps == -1`` means the
    budget was exhausted before the off-diagonal mass fell below ``tol``.
    Eigenvalues are unsorted.
    """
    a = np.array(A, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = np.sqrt(np.sum(np.abs(a) ** 2))
    if scale == 0.0 or n == 1:
        return a.diagonal().real.copy(), v, 0
    offdiag = ~np.eye(n, dtype=bool)
    for sweep in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a[offdiag]) ** 2))
        if off <= tol * scale:
            return a.diagonal().real.copy(), v, sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # columns: a <- a U with U_pp = c, U_pq = s, U_qp = -s/phase, U_qq = c/phase
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp - s * cq / phase
                a[:, q] = s * cp + c * cq / phase
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq * phase
                a[q, :] = s * rp + c * rq * phase
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq / phase
                v[:, q] = s * vp + c * vq / phase
    off = np.sqrt(np.sum(np.abs(a[offdiag]) ** 2))
    if off <= tol * scale:
        return a.diagonal().real.copy(), v, max_sweeps
    return a.diagonal().real.copy(), v, -1
