# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Cython versions of the hot kernels in ``carnot._kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.string cimport memset

cnp.import_array()


cdef inline void _bracket_row(const double* x, const double* y, double* out, Py_ssize_t n,
                              const long long* I, const long long* J, const long long* K,
                              const double* C, Py_ssize_t T) noexcept nogil:
    cdef Py_ssize_t t
    memset(out, 0, n * sizeof(double))
    for t in range(T):
        out[K[t]] += C[t] * (x[I[t]] * y[J[t]] - x[J[t]] * y[I[t]])


cdef inline void _bch_row(const double* x, const double* y, double* out, double* work,
                          Py_ssize_t n, const long long* I, const long long* J,
                          const long long* K, const double* C, Py_ssize_t T,
                          const long long* leaf, const long long* operand,
                          const double* coef, Py_ssize_t P) noexcept nogil:
    # work holds P node values of length n; values 0 and 1 are x and y
    cdef Py_ssize_t t, k
    cdef const double* a
    cdef const double* b
    cdef double* v
    cdef double c
    for k in range(n):
        out[k] = x[k] + y[k]
    for t in range(P):
        a = x if leaf[t] == 0 else y
        if operand[t] == 0:
            b = x
        elif operand[t] == 1:
            b = y
        else:
            b = work + (operand[t] - 2) * n
        v = work + t * n
        _bracket_row(a, b, v, n, I, J, K, C, T)
        c = coef[t]
        if c != 0.0:
            for k in range(n):
                out[k] += c * v[k]


def bracket(const double[:, ::1] X, const double[:, ::1] Y, const long long[::1] I,
            const long long[::1] J, const long long[::1] K, const double[::1] C):
    cdef Py_ssize_t B = X.shape[0], n = X.shape[1], T = I.shape[0], b
    out = np.zeros((B, n))
    cdef double[:, ::1] o = out
    if T == 0:
        return out
    with nogil:
        for b in range(B):
            _bracket_row(&X[b, 0], &Y[b, 0], &o[b, 0], n, &I[0], &J[0], &K[0], &C[0], T)
    return out


def bch_multiply(const double[:, ::1] X, const double[:, ::1] Y, const long long[::1] I,
                 const long long[::1] J, const long long[::1] K, const double[::1] C,
                 const long long[::1] leaf, const long long[::1] operand,
                 const double[::1] coef):
    cdef Py_ssize_t B = X.shape[0], n = X.shape[1], T = I.shape[0], P = leaf.shape[0], b, k
    out = np.empty((B, n))
    cdef double[:, ::1] o = out
    cdef double* work
    if T == 0 or P == 0:
        with nogil:
            for b in range(B):
                for k in range(n):
                    o[b, k] = X[b, k] + Y[b, k]
        return out
    work = <double*> malloc(P * n * sizeof(double))
    if work == NULL:
        raise MemoryError()
    try:
        with nogil:
            for b in range(B):
                _bch_row(&X[b, 0], &Y[b, 0], &o[b, 0], work, n, &I[0], &J[0], &K[0], &C[0],
                         T, &leaf[0], &operand[0], &coef[0], P)
    finally:
        free(work)
    return out


def heat_compose(const double[:, :, ::1] increments, const long long[::1] I,
                 const long long[::1] J, const long long[::1] K, const double[::1] C,
                 const long long[::1] leaf, const long long[::1] operand,
                 const double[::1] coef, Py_ssize_t n):
    cdef Py_ssize_t B = increments.shape[0], steps = increments.shape[1]
    cdef Py_ssize_t d1 = increments.shape[2], T = I.shape[0], P = leaf.shape[0]
    cdef Py_ssize_t b, i, k
    out = np.zeros((B, n))
    cdef double[:, ::1] o = out
    cdef double* work
    cdef double* g
    cdef double* y
    cdef double* tmp
    if T == 0 or P == 0:
        with nogil:
            for b in range(B):
                for i in range(steps):
                    for k in range(d1):
                        o[b, k] += increments[b, i, k]
        return out
    work = <double*> malloc((P + 3) * n * sizeof(double))
    if work == NULL:
        raise MemoryError()
    g = work + P * n
    y = g + n
    tmp = y + n
    try:
        with nogil:
            for b in range(B):
                memset(g, 0, n * sizeof(double))
                memset(y, 0, n * sizeof(double))
                for i in range(steps):
                    for k in range(d1):
                        y[k] = increments[b, i, k]
                    _bch_row(g, y, tmp, work, n, &I[0], &J[0], &K[0], &C[0], T,
                             &leaf[0], &operand[0], &coef[0], P)
                    for k in range(n):
                        g[k] = tmp[k]
                for k in range(n):
                    o[b, k] = g[k]
    finally:
        free(work)
    return out
