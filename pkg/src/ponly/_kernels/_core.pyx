# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled accumulation kernels.

Single fused pass per call: no temporaries the size of the data, GIL
released during the loops. Semantics match ``ponly._kernels._ref``.
"""

from libc.math cimport exp, log1p, fabs

import numpy as np

DEF U_MAX = 700.0


def exp_moments(const double[::1] u, const double[::1] w, const double[:, ::1] x):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t p = x.shape[1]
    s1_arr = np.zeros(p)
    s2_arr = np.zeros((p, p))
    cdef double[::1] s1 = s1_arr
    cdef double[:, ::1] s2 = s2_arr
    cdef double s0 = 0.0, e, xj
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t bad = -1

    with nogil:
        for i in range(n):
            if u[i] > U_MAX:
                bad = i
                break
            e = w[i] * exp(u[i])
            s0 += e
            for j in range(p):
                xj = e * x[i, j]
                s1[j] += xj
                for k in range(j, p):
                    s2[j, k] += xj * x[i, k]
        if bad < 0:
            for j in range(p):
                for k in range(j + 1, p):
                    s2[k, j] = s2[j, k]

    if bad >= 0:
        return 0.0, np.zeros(p), np.zeros((p, p)), int(bad)
    return s0, s1_arr, s2_arr, -1


def logit_moments(const double[::1] u, const double[::1] w,
                  const double[::1] y, const double[:, ::1] x):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t p = x.shape[1]
    g1_arr = np.zeros(p)
    h1_arr = np.zeros(p)
    h2_arr = np.zeros((p, p))
    cdef double[::1] g1 = g1_arr
    cdef double[::1] h1 = h1_arr
    cdef double[:, ::1] h2 = h2_arr
    cdef double ll = 0.0, g0 = 0.0, h0 = 0.0
    cdef double ui, enu, mu, l1pe, r, c, cx
    cdef Py_ssize_t i, j, k

    with nogil:
        for i in range(n):
            ui = u[i]
            enu = exp(-fabs(ui))
            if ui > 0:
                mu = 1.0 / (1.0 + enu)
                l1pe = ui + log1p(enu)
            else:
                mu = enu / (1.0 + enu)
                l1pe = log1p(enu)
            ll += w[i] * (y[i] * ui - l1pe)
            r = w[i] * (y[i] - mu)
            g0 += r
            c = w[i] * mu * (1.0 - mu)
            h0 += c
            for j in range(p):
                g1[j] += r * x[i, j]
                cx = c * x[i, j]
                h1[j] += cx
                for k in range(j, p):
                    h2[j, k] += cx * x[i, k]
        for j in range(p):
            for k in range(j + 1, p):
                h2[k, j] = h2[j, k]

    return ll, g0, g1_arr, h0, h1_arr, h2_arr
