# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same contracts as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

# full recomputation interval, bounds drift of the incremental updates
cdef enum:
    RESYNC = 4096


cdef inline double _norm(double[::1] v, Py_ssize_t d, int kind) nogil:
    cdef Py_ssize_t j
    cdef double acc = 0.0, a
    if kind == 0:
        for j in range(d):
            acc += fabs(v[j])
        return acc
    if kind == 1:
        for j in range(d):
            acc += v[j] * v[j]
        return sqrt(acc)
    for j in range(d):
        a = fabs(v[j])
        if a > acc:
            acc = a
    return acc


cdef void _resync_sum(const double[:, ::1] w, double[::1] cur, Py_ssize_t p,
                      Py_ssize_t m, Py_ssize_t d) nogil:
    cdef Py_ssize_t i, j
    cdef double s
    for j in range(d):
        cur[j] = w[0, j]
    for i in range(1, m):
        s = -1.0 if (p >> (m - 1 - i)) & 1 else 1.0
        for j in range(d):
            cur[j] += s * w[i, j]


def sign_pattern_norms(weighted, int kind):
    cdef const double[:, ::1] w = np.ascontiguousarray(weighted, dtype=np.float64)
    cdef Py_ssize_t m = w.shape[0], d = w.shape[1]
    if m == 0:
        return np.zeros(1)
    cdef Py_ssize_t n_pat = (<Py_ssize_t>1) << (m - 1)
    out_arr = np.empty(n_pat)
    cdef double[::1] out = out_arr
    cdef double[::1] cur = np.empty(d)
    cdef Py_ssize_t p, q, b, row, j
    with nogil:
        _resync_sum(w, cur, 0, m, d)
        out[0] = _norm(cur, d, kind)
        for p in range(1, n_pat):
            if p % RESYNC == 0:
                _resync_sum(w, cur, p, m, d)
            else:
                q = p - 1
                b = 0
                while q & 1:
                    row = m - 1 - b
                    for j in range(d):
                        cur[j] += 2.0 * w[row, j]
                    q >>= 1
                    b += 1
                row = m - 1 - b
                for j in range(d):
                    cur[j] -= 2.0 * w[row, j]
            out[p] = _norm(cur, d, kind)
    return out_arr


cdef void _resync_dots(const double[:, ::1] v, double[::1] dots, Py_ssize_t p,
                       Py_ssize_t m, Py_ssize_t d) nogil:
    cdef Py_ssize_t i, j
    cdef double y
    for i in range(m):
        dots[i] = v[i, 0]
    for j in range(1, d):
        y = -1.0 if (p >> (d - 1 - j)) & 1 else 1.0
        for i in range(m):
            dots[i] += y * v[i, j]


cdef inline double _weighted_abs(double[::1] dots, const double[::1] mu,
                                 Py_ssize_t m) nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(m):
        acc += mu[i] * fabs(dots[i])
    return acc


def dual_vertex_values(values, weights):
    cdef const double[:, ::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef const double[::1] mu = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t m = v.shape[0], d = v.shape[1]
    if d == 0:
        return np.zeros(1)
    cdef Py_ssize_t n_pat = (<Py_ssize_t>1) << (d - 1)
    out_arr = np.empty(n_pat)
    cdef double[::1] out = out_arr
    cdef double[::1] dots = np.empty(max(m, 1))
    cdef Py_ssize_t p, q, b, col, i
    with nogil:
        _resync_dots(v, dots, 0, m, d)
        out[0] = _weighted_abs(dots, mu, m)
        for p in range(1, n_pat):
            if p % RESYNC == 0:
                _resync_dots(v, dots, p, m, d)
            else:
                q = p - 1
                b = 0
                while q & 1:
                    col = d - 1 - b
                    for i in range(m):
                        dots[i] += 2.0 * v[i, col]
                    q >>= 1
                    b += 1
                col = d - 1 - b
                for i in range(m):
                    dots[i] -= 2.0 * v[i, col]
            out[p] = _weighted_abs(dots, mu, m)
    return out_arr


def bocce_osc_masks(x, w, cell, masks, int kind):
    cdef const double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const int64_t[::1] cv = np.ascontiguousarray(cell, dtype=np.int64)
    cdef const uint64_t[::1] mv = np.ascontiguousarray(masks, dtype=np.uint64)
    cdef Py_ssize_t n = xv.shape[0], d = xv.shape[1], n_sets = mv.shape[0]
    out_arr = np.zeros(n_sets)
    cdef double[::1] out = out_arr
    cdef double[::1] mean = np.empty(max(d, 1))
    cdef double[::1] diff = np.empty(max(d, 1))
    cdef Py_ssize_t s, a, j
    cdef uint64_t mask
    cdef double total, acc
    with nogil:
        for s in range(n_sets):
            mask = mv[s]
            total = 0.0
            for j in range(d):
                mean[j] = 0.0
            for a in range(n):
                if cv[a] >= 0 and (mask >> cv[a]) & 1:
                    total += wv[a]
                    for j in range(d):
                        mean[j] += wv[a] * xv[a, j]
            if total <= 0.0:
                continue
            for j in range(d):
                mean[j] /= total
            acc = 0.0
            for a in range(n):
                if cv[a] >= 0 and (mask >> cv[a]) & 1:
                    for j in range(d):
                        diff[j] = xv[a, j] - mean[j]
                    acc += wv[a] * _norm(diff, d, kind)
            out[s] = acc / total
    return out_arr
