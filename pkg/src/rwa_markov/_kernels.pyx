# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops.  Same contracts as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
cimport cython

cnp.import_array()

ctypedef double complex cplx


cdef inline double cabs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


def volterra_trapezoid(K, double h):
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] Kc = np.ascontiguousarray(K, dtype=np.complex128)
    cdef Py_ssize_t n = Kc.shape[0] - 1
    cdef Py_ssize_t N = Kc.shape[1]
    # History sum as contiguous real dot products:
    #   Kr[i, p*N + j] = K[n - p, i, j]   and   Vt[l, k*N + j] = V[k, j, l]
    Kr = np.ascontiguousarray(Kc[::-1].transpose(1, 0, 2)).reshape(N, (n + 1) * N)
    kr_re_arr = np.ascontiguousarray(Kr.real)
    kr_im_arr = np.ascontiguousarray(Kr.imag)
    vt_re_arr = np.zeros((N, (n + 1) * N))
    vt_im_arr = np.zeros((N, (n + 1) * N))
    V_arr = np.zeros((n + 1, N, N), dtype=np.complex128)
    F_arr = np.zeros((n + 1, N, N), dtype=np.complex128)
    hist_arr = np.zeros((N, N), dtype=np.complex128)
    pred_arr = np.zeros((N, N), dtype=np.complex128)
    cdef double[:, ::1] kr_re = kr_re_arr
    cdef double[:, ::1] kr_im = kr_im_arr
    cdef double[:, ::1] vt_re = vt_re_arr
    cdef double[:, ::1] vt_im = vt_im_arr
    cdef cplx[:, :, ::1] Kv = Kc
    cdef cplx[:, :, ::1] V = V_arr
    cdef cplx[:, :, ::1] F = F_arr
    cdef cplx[:, ::1] hist = hist_arr
    cdef cplx[:, ::1] pred = pred_arr
    cdef Py_ssize_t m, q, i, j, l, base, span
    cdef double half_h = 0.5 * h
    cdef double sr, si
    cdef double *ar
    cdef double *ai
    cdef double *br
    cdef double *bi
    cdef cplx acc, fp
    for i in range(N):
        V[0, i, i] = 1.0
        vt_re[i, i] = 1.0
    with nogil:
        for m in range(1, n + 1):
            base = (n - m + 1) * N
            span = (m - 1) * N
            for i in range(N):
                ar = &kr_re[i, base]
                ai = &kr_im[i, base]
                for l in range(N):
                    br = &vt_re[l, N]
                    bi = &vt_im[l, N]
                    sr = 0.0
                    si = 0.0
                    for q in range(span):
                        sr = sr + ar[q] * br[q] - ai[q] * bi[q]
                        si = si + ar[q] * bi[q] + ai[q] * br[q]
                    hist[i, l] = h * (0.5 * Kv[m, i, l] + (sr + 1j * si))
            for i in range(N):
                for l in range(N):
                    pred[i, l] = V[m - 1, i, l] + h * F[m - 1, i, l]
            for i in range(N):
                for l in range(N):
                    acc = 0.0
                    for j in range(N):
                        acc = acc + Kv[0, i, j] * pred[j, l]
                    fp = -(hist[i, l] + half_h * acc)
                    V[m, i, l] = V[m - 1, i, l] + half_h * (F[m - 1, i, l] + fp)
                    vt_re[l, m * N + i] = V[m, i, l].real
                    vt_im[l, m * N + i] = V[m, i, l].imag
            for i in range(N):
                for l in range(N):
                    acc = 0.0
                    for j in range(N):
                        acc = acc + Kv[0, i, j] * V[m, j, l]
                    F[m, i, l] = -(hist[i, l] + half_h * acc)
    return V_arr


cdef double _off_norm(cplx[:, ::1] a, Py_ssize_t n) nogil:
    cdef double s = 0.0
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(n):
            if i != j:
                s += cabs2(a[i, j])
    return sqrt(s)


def jacobi_hermitian(A, int max_sweeps, double tol):
    a_arr = np.array(A, dtype=np.complex128, order="C")
    cdef Py_ssize_t n = a_arr.shape[0]
    v_arr = np.eye(n, dtype=np.complex128)
    cdef cplx[:, ::1] a = a_arr
    cdef cplx[:, ::1] v = v_arr
    cdef double scale = 0.0
    cdef Py_ssize_t i, j, p, q
    cdef int sweep, result = -1
    cdef double mag, theta, t, c, s
    cdef cplx apq, phase, iphase, xp, xq
    for i in range(n):
        for j in range(n):
            scale += cabs2(a[i, j])
    scale = sqrt(scale)
    if scale == 0.0 or n == 1:
        return np.real(a_arr.diagonal()).copy(), v_arr, 0
    with nogil:
        for sweep in range(max_sweeps + 1):
            if _off_norm(a, n) <= tol * scale:
                result = sweep
                break
            if sweep == max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    mag = sqrt(cabs2(apq))
                    if mag <= 1e-300:
                        continue
                    phase = apq / mag
                    iphase = phase.conjugate()
                    theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                    if fabs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                        if theta < 0:
                            t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for i in range(n):
                        xp = a[i, p]
                        xq = a[i, q]
                        a[i, p] = c * xp - s * xq * iphase
                        a[i, q] = s * xp + c * xq * iphase
                    for j in range(n):
                        xp = a[p, j]
                        xq = a[q, j]
                        a[p, j] = c * xp - s * xq * phase
                        a[q, j] = s * xp + c * xq * phase
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for i in range(n):
                        xp = v[i, p]
                        xq = v[i, q]
                        v[i, p] = c * xp - s * xq * iphase
                        v[i, q] = s * xp + c * xq * iphase
    return np.real(a_arr.diagonal()).copy(), v_arr, result
