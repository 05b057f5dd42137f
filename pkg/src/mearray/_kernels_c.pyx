# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in :mod:`mearray._kernels_py`.

Grid kernels split rows across OpenMP threads. Every output cell is summed
sequentially by one thread, so results do not depend on the thread count.
"""

import numpy as np
from cython.parallel cimport prange
from libc.math cimport cos, sin, sqrt, M_PI

cdef double TWO_PI = 2.0 * M_PI


cdef inline double _row_power(const double[:, ::1] t, Py_ssize_t g) noexcept nogil:
    cdef double re = 0.0, im = 0.0
    cdef Py_ssize_t j
    for j in range(t.shape[1]):
        re += cos(t[g, j])
        im += sin(t[g, j])
    return re * re + im * im


cdef inline double _linear_power(
    double x1, double x2, double s,
    const double[::1] ck1, const double[::1] ck2, const double[::1] cr,
    const double[::1] cp, const double[::1] pr,
) noexcept nogil:
    cdef double re = 0.0, im = 0.0, th
    cdef Py_ssize_t e
    for e in range(ck1.shape[0]):
        th = (TWO_PI * (ck1[e] * x1 + ck2[e] * x2 + cr[e] * s) + cp[e]) + pr[e]
        re += cos(th)
        im += sin(th)
    return re * re + im * im


def array_factor(phases, distances, double wavenumber):
    cdef const double[::1] ph = np.ascontiguousarray(phases, dtype=np.float64)
    cdef const double[::1] d = np.ascontiguousarray(distances, dtype=np.float64)
    cdef Py_ssize_t j, n = ph.shape[0]
    cdef double re = 0.0, im = 0.0, th
    with nogil:
        for j in range(n):
            th = ph[j] + wavenumber * d[j]
            re += cos(th)
            im += sin(th)
    return re * re + im * im


def phasor_power(theta):
    arr = np.ascontiguousarray(theta, dtype=np.float64)
    lead = arr.shape[:-1]
    cdef const double[:, ::1] t = arr.reshape(-1, arr.shape[arr.ndim - 1])
    cdef Py_ssize_t g, ng = t.shape[0]
    out = np.empty(ng, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for g in prange(ng, schedule="static"):
            o[g] = _row_power(t, g)
    return out.reshape(lead)


def sweep_linear(k1, k2, c_k1, c_k2, c_root, double root_shift, comp, prop):
    cdef const double[::1] a1 = np.ascontiguousarray(k1, dtype=np.float64)
    cdef const double[::1] a2 = np.ascontiguousarray(k2, dtype=np.float64)
    cdef const double[::1] ck1 = np.ascontiguousarray(c_k1, dtype=np.float64)
    cdef const double[::1] ck2 = np.ascontiguousarray(c_k2, dtype=np.float64)
    cdef const double[::1] cr = np.ascontiguousarray(c_root, dtype=np.float64)
    cdef const double[::1] cp = np.ascontiguousarray(comp, dtype=np.float64)
    cdef const double[::1] pr = np.ascontiguousarray(prop, dtype=np.float64)
    cdef Py_ssize_t i, j, na = a1.shape[0], nb = a2.shape[0]
    out = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double x1, x2
    with nogil:
        for i in prange(na, schedule="static"):
            x1 = a1[i]
            for j in range(nb):
                x2 = a2[j]
                o[i, j] = _linear_power(
                    x1, x2, sqrt(x1 * x1 + (x2 + root_shift) * (x2 + root_shift)), ck1, ck2, cr, cp, pr
                )
    return out
