# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: batched blade products and Christoffel contractions."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def blade_products(const double[:, ::1] a, const double[:, ::1] b,
                   const double[:, ::1] signs, const cnp.int64_t[:, ::1] target):
    """Batched product of multivectors in an orthonormal blade basis.

    out[n, target[i, j]] += signs[i, j] * a[n, i] * b[n, j]
    """
    cdef Py_ssize_t n_items = a.shape[0]
    cdef Py_ssize_t m = a.shape[1]
    cdef Py_ssize_t n, i, j
    cdef double ai, s
    out = np.zeros((n_items, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    for n in range(n_items):
        for i in range(m):
            ai = a[n, i]
            if ai == 0.0:
                continue
            for j in range(m):
                s = signs[i, j]
                if s != 0.0 and b[n, j] != 0.0:
                    o[n, target[i, j]] += s * ai * b[n, j]
    return out


def christoffel(const double[:, :, ::1] ginv, const double[:, :, :, ::1] dg):
    """Gamma[n, r, m, v] = 1/2 ginv[n, r, s] (dg[n, m, s, v] + dg[n, v, s, m] - dg[n, s, m, v]).

    dg[n, k, a, b] holds the partial derivative of g_ab along coordinate k.
    """
    cdef Py_ssize_t n_items = ginv.shape[0]
    cdef Py_ssize_t d = ginv.shape[1]
    cdef Py_ssize_t n, r, m, v, s
    cdef double acc
    out = np.empty((n_items, d, d, d), dtype=np.float64)
    cdef double[:, :, :, ::1] o = out
    for n in range(n_items):
        for r in range(d):
            for m in range(d):
                for v in range(m, d):
                    acc = 0.0
                    for s in range(d):
                        acc += ginv[n, r, s] * (dg[n, m, s, v] + dg[n, v, s, m] - dg[n, s, m, v])
                    o[n, r, m, v] = 0.5 * acc
                    o[n, r, v, m] = 0.5 * acc
    return out


def geodesic_accel(const double[:, :, :, ::1] gamma, const double[:, ::1] u):
    """acc[n, r] = -Gamma[n, r, m, v] u[n, m] u[n, v]."""
    cdef Py_ssize_t n_items = gamma.shape[0]
    cdef Py_ssize_t d = gamma.shape[1]
    cdef Py_ssize_t n, r, m, v
    cdef double acc
    out = np.empty((n_items, d), dtype=np.float64)
    cdef double[:, ::1] o = out
    for n in range(n_items):
        for r in range(d):
            acc = 0.0
            for m in range(d):
                for v in range(d):
                    acc += gamma[n, r, m, v] * u[n, m] * u[n, v]
            o[n, r] = -acc
    return out
