# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-iteration kernels.

Every routine here has a NumPy twin in ``_core_py`` and the two must agree
bit for bit: sums are accumulated sequentially in index order and nothing
is reassociated.
"""
from libcpp.algorithm cimport nth_element, sort
from libcpp.vector cimport vector

import numpy as np


# above this many rows numpy's vectorised sort beats std::sort
cdef Py_ssize_t NUMPY_SORT_ROWS = 512


def trimmed_sums(const double[:, :] proj, Py_ssize_t t):
    """Per column, the sum of the ``t`` smallest squared entries."""
    cdef Py_ssize_t n = proj.shape[0]
    cdef Py_ssize_t d = proj.shape[1]
    cdef Py_ssize_t i, j
    cdef double v, acc
    cdef const double[:, :] srt
    if t < 0 or t > n:
        raise ValueError(f"trim count {t} outside [0, {n}]")
    out = np.empty(d, dtype=np.float64)
    cdef double[::1] o = out
    if n > NUMPY_SORT_ROWS:
        a = np.asarray(proj)
        srt = np.sort(a * a, axis=0)
        for j in range(d):
            acc = 0.0
            for i in range(t):
                acc += srt[i, j]
            o[j] = acc
        return out
    cdef vector[double] buf
    buf.resize(n)
    for j in range(d):
        for i in range(n):
            v = proj[i, j]
            buf[i] = v * v
        # only the t smallest matter; their sorted order is the same either way
        if 0 < t < n:
            nth_element(buf.begin(), buf.begin() + (t - 1), buf.end())
        sort(buf.begin(), buf.begin() + t)
        acc = 0.0
        for i in range(t):
            acc += buf[i]
        o[j] = acc
    return out


def row_sq_norms(const double[:, :] proj):
    """Per row, sum over columns of squared entries."""
    cdef Py_ssize_t n = proj.shape[0]
    cdef Py_ssize_t d = proj.shape[1]
    cdef Py_ssize_t i, j
    cdef double v
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    for j in range(d):
        for i in range(n):
            v = proj[i, j]
            o[i] += v * v
    return out


def sample_index(const double[::1] weights, double u):
    """Cumulative-weight inversion of one uniform draw ``u`` in [0, 1).

    Falls back to a uniform pick when every weight is zero.
    """
    cdef Py_ssize_t n = weights.shape[0]
    cdef Py_ssize_t i, last = -1
    cdef double total = 0.0, acc = 0.0, target
    if n == 0:
        raise ValueError("no points to sample from")
    for i in range(n):
        total += weights[i]
    if not total > 0.0:
        i = <Py_ssize_t>(u * n)
        return i if i < n else n - 1
    target = u * total
    for i in range(n):
        if weights[i] > 0.0:
            last = i
        acc += weights[i]
        if acc > target:
            return i
    return last


def rank1_downdate(double[:, ::1] S, const double[::1] y):
    """In place ``S -= y yᵀ``."""
    cdef Py_ssize_t m = y.shape[0]
    cdef Py_ssize_t i, j
    cdef double yi
    if S.shape[0] != m or S.shape[1] != m:
        raise ValueError("shape mismatch in rank-1 downdate")
    for i in range(m):
        yi = y[i]
        for j in range(m):
            S[i, j] -= yi * y[j]
