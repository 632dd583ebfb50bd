# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Mirrors _kernels_py; see that module for semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, exp

cnp.import_array()


def similarity_stats(const double[::1] a, const double[::1] b):
    cdef Py_ssize_t n = a.shape[0], i
    cdef double dot = 0.0, na = 0.0, nb = 0.0
    cdef double sa = 0.0, sb = 0.0, ma, mb
    cdef double cov = 0.0, va = 0.0, vb = 0.0
    cdef double sq = 0.0, ab = 0.0, d, xa, xb
    for i in range(n):
        sa += a[i]
        sb += b[i]
    ma = sa / n
    mb = sb / n
    for i in range(n):
        dot += a[i] * b[i]
        na += a[i] * a[i]
        nb += b[i] * b[i]
        xa = a[i] - ma
        xb = b[i] - mb
        cov += xa * xb
        va += xa * xa
        vb += xb * xb
        d = a[i] - b[i]
        sq += d * d
        ab += fabs(d)
    return (dot, na, nb, cov, va, vb, sqrt(sq), ab)


def fraction_above(const double[::1] values, double threshold):
    cdef Py_ssize_t n = values.shape[0], i, count = 0
    for i in range(n):
        if fabs(values[i]) > threshold:
            count += 1
    return <double>count / n


def sgd_epoch(double[:, ::1] W, const double[:, ::1] X, const long[::1] y,
              double lr, Py_ssize_t batch_size):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], C = W.shape[0]
    cdef Py_ssize_t start, stop, i, c, j, m
    cdef double mx, z, inv_m
    cdef double[::1] p = np.empty(C)
    cdef double[:, ::1] G = np.zeros((C, d + 1))
    start = 0
    while start < n:
        stop = start + batch_size
        if stop > n:
            stop = n
        m = stop - start
        inv_m = 1.0 / m
        G[:, :] = 0.0
        for i in range(start, stop):
            mx = -1e308
            for c in range(C):
                z = W[c, d]
                for j in range(d):
                    z += W[c, j] * X[i, j]
                p[c] = z
                if z > mx:
                    mx = z
            z = 0.0
            for c in range(C):
                p[c] = exp(p[c] - mx)
                z += p[c]
            for c in range(C):
                p[c] /= z
            p[y[i]] -= 1.0
            for c in range(C):
                for j in range(d):
                    G[c, j] += p[c] * X[i, j]
                G[c, d] += p[c]
        for c in range(C):
            for j in range(d + 1):
                W[c, j] -= lr * G[c, j] * inv_m
        start = stop
    return np.asarray(W)
