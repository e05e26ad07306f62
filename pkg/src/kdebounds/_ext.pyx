# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: integer distance tables and the float KDE mat-vec."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, pow

cnp.import_array()

cdef enum:
    GAUSSIAN = 0
    RQ = 1
    TSTUDENT = 2
    CONSTANT = 3


def sqdist_int(X, Y):
    cdef const cnp.int64_t[:, ::1] x = np.ascontiguousarray(X, dtype=np.int64)
    cdef const cnp.int64_t[:, ::1] y = np.ascontiguousarray(Y, dtype=np.int64)
    cdef Py_ssize_t n = x.shape[0], k = y.shape[0], m = x.shape[1], i, j, t
    cdef cnp.int64_t acc, diff
    out = np.empty((n, k), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] o = out
    for i in range(n):
        for j in range(k):
            acc = 0
            for t in range(m):
                diff = x[i, t] - y[j, t]
                acc += diff * diff
            o[i, j] = acc
    return out


def min_sqdist_int(X, Y):
    cdef const cnp.int64_t[:, ::1] x = np.ascontiguousarray(X, dtype=np.int64)
    cdef const cnp.int64_t[:, ::1] y = np.ascontiguousarray(Y, dtype=np.int64)
    cdef Py_ssize_t n = x.shape[0], k = y.shape[0], m = x.shape[1], i, j, t
    cdef cnp.int64_t acc, diff, best = -1
    if n == 0 or k == 0:
        raise ValueError("min over an empty point set")
    for i in range(n):
        for j in range(k):
            acc = 0
            for t in range(m):
                diff = x[i, t] - y[j, t]
                acc += diff * diff
            if best < 0 or acc < best:
                best = acc
    return int(best)


def distance_histogram(X, Y, Py_ssize_t dmax):
    cdef const cnp.int64_t[:, ::1] x = np.ascontiguousarray(X, dtype=np.int64)
    cdef const cnp.int64_t[:, ::1] y = np.ascontiguousarray(Y, dtype=np.int64)
    cdef Py_ssize_t n = x.shape[0], k = y.shape[0], m = x.shape[1], i, j, t
    cdef cnp.int64_t acc, diff
    out = np.zeros((dmax + 1, n), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] o = out
    for i in range(n):
        for j in range(k):
            acc = 0
            for t in range(m):
                diff = x[i, t] - y[j, t]
                acc += diff * diff
            if acc > dmax:
                raise ValueError(f"squared distance {acc} exceeds cap {dmax}")
            o[acc, i] += 1
    return out


cdef inline double _profile(double x, int family, double scale, double param) nogil:
    if family == GAUSSIAN:
        return exp(-scale * x)
    if family == RQ:
        return pow(1.0 + scale * x, -param)
    if family == TSTUDENT:
        return 1.0 / (1.0 + pow(scale * x, param))
    return 1.0


def kde_matvec(X, Y, u, int family, double scale, double param):
    if family not in (GAUSSIAN, RQ, TSTUDENT, CONSTANT):
        raise ValueError(f"unknown kernel family code {family}")
    cdef const double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], k = y.shape[0], m = x.shape[1], i, j, t
    cdef double acc, diff, total
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            total = 0.0
            for j in range(k):
                acc = 0.0
                for t in range(m):
                    diff = x[i, t] - y[j, t]
                    acc = acc + diff * diff
                total = total + _profile(acc, family, scale, param) * w[j]
            o[i] = total
    return out
