# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Mirrors :mod:`ssbm._pykernels` function for function."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

NAME = "cython"


cdef inline void _signed_row(const cnp.int8_t* row, const double* a, const double* b,
                             Py_ssize_t n, double* out_a, double* out_b) noexcept nogil:
    # Fixed-width lane accumulators vectorize without reassociation, so the
    # summation order (and the result) does not depend on the compiler.
    cdef double acc_a[8]
    cdef double acc_b[8]
    cdef double w
    cdef Py_ssize_t k, l
    cdef Py_ssize_t stop = n - (n % 8)
    for l in range(8):
        acc_a[l] = 0.0
        acc_b[l] = 0.0
    k = 0
    while k < stop:
        for l in range(8):
            w = <double>row[k + l]
            acc_a[l] += w * a[k + l]
            acc_b[l] += w * b[k + l]
        k += 8
    while k < n:
        w = <double>row[k]
        acc_a[0] += w * a[k]
        acc_b[0] += w * b[k]
        k += 1
    out_a[0] = ((acc_a[0] + acc_a[1]) + (acc_a[2] + acc_a[3])) + ((acc_a[4] + acc_a[5]) + (acc_a[6] + acc_a[7]))
    out_b[0] = ((acc_b[0] + acc_b[1]) + (acc_b[2] + acc_b[3])) + ((acc_b[4] + acc_b[5]) + (acc_b[6] + acc_b[7]))


def prepare_dense(w):
    w = np.ascontiguousarray(w, dtype=np.int8)
    n = w.shape[0]
    off = ~np.eye(n, dtype=bool)
    unit_complete = bool(n > 1 and np.all(np.abs(w[off]) == 1))
    return w, unit_complete


def dense_sums(handle, const double[::1] a, const double[::1] b):
    """Ferro / antiferro neighbour sums over a dense int8 weight matrix in one pass.

    Returns ``(f_a, af_a, f_b, af_b)``: the ``|w|``-weighted sums of ``a`` and
    ``b`` over ferro (``w < 0``) and antiferro (``w > 0``) neighbours. On
    complete +-1 graphs only the signed products are accumulated and the
    unsigned sums come from ``sum(x) - x_i``.
    """
    cdef cnp.int8_t[:, ::1] w = handle[0]
    cdef bint unit_complete = handle[1]
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t i, k
    cdef double wa, wb, sa, sb, wk, tot_a = 0.0, tot_b = 0.0
    out = np.empty((4, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef const cnp.int8_t* row
    with nogil:
        if unit_complete:
            for k in range(n):
                tot_a = tot_a + a[k]
                tot_b = tot_b + b[k]
            for i in range(n):
                _signed_row(&w[i, 0], &a[0], &b[0], n, &wa, &wb)
                sa = tot_a - a[i]
                sb = tot_b - b[i]
                o[0, i] = 0.5 * (sa - wa)
                o[1, i] = 0.5 * (sa + wa)
                o[2, i] = 0.5 * (sb - wb)
                o[3, i] = 0.5 * (sb + wb)
        else:
            for i in range(n):
                row = &w[i, 0]
                wa = 0.0
                wb = 0.0
                sa = 0.0
                sb = 0.0
                for k in range(n):
                    wk = <double>row[k]
                    wa = wa + wk * a[k]
                    wb = wb + wk * b[k]
                    wk = fabs(wk)
                    sa = sa + wk * a[k]
                    sb = sb + wk * b[k]
                o[0, i] = 0.5 * (sa - wa)
                o[1, i] = 0.5 * (sa + wa)
                o[2, i] = 0.5 * (sb - wb)
                o[3, i] = 0.5 * (sb + wb)
    return out[0], out[1], out[2], out[3]


def dense_energy(handle, const double[::1] s):
    cdef cnp.int8_t[:, ::1] w = handle[0]
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t i, k
    cdef double acc = 0.0, row_acc
    with nogil:
        for i in range(n):
            row_acc = 0.0
            for k in range(i + 1, n):
                row_acc = row_acc + w[i, k] * s[k]
            acc = acc + s[i] * row_acc
    return acc


def prepare_sparse(indptr, indices, weights, Py_ssize_t n):
    return (
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.float64),
        n,
    )


def sparse_sums(handle, const double[::1] a, const double[::1] b):
    cdef const cnp.int64_t[::1] indptr = handle[0]
    cdef const cnp.int64_t[::1] indices = handle[1]
    cdef const double[::1] weights = handle[2]
    cdef Py_ssize_t n = handle[3]
    cdef Py_ssize_t i, p, k
    cdef double wk, fa, afa, fb, afb
    out = np.empty((4, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(n):
            fa = 0.0
            afa = 0.0
            fb = 0.0
            afb = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                k = indices[p]
                wk = weights[p]
                if wk > 0:
                    afa = afa + wk * a[k]
                    afb = afb + wk * b[k]
                else:
                    fa = fa - wk * a[k]
                    fb = fb - wk * b[k]
            o[0, i] = fa
            o[1, i] = afa
            o[2, i] = fb
            o[3, i] = afb
    return out[0], out[1], out[2], out[3]


def gray_enumerate(const double[:, ::1] w, double tol):
    """Visit every configuration with spin 0 pinned to +1 in Gray-code order.

    Returns ``(best_energy, codes)`` where bit ``k`` of a code set means node
    ``k + 1`` is -1. Codes are sorted.
    """
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t m = n - 1
    cdef Py_ssize_t k, j, node
    cdef unsigned long long t, total, g
    cdef double e, best, sj
    s_arr = np.ones(n, dtype=np.float64)
    h_arr = np.asarray(w).sum(axis=1)
    cdef double[::1] s = s_arr
    cdef double[::1] h = h_arr
    e = 0.0
    for k in range(n):
        e += 0.5 * s[k] * h[k]
    best = e
    codes = [0]
    total = (<unsigned long long>1) << m
    t = 1
    while t < total:
        j = 0
        while not ((t >> j) & 1):
            j += 1
        node = j + 1
        e -= 2.0 * s[node] * h[node]
        s[node] = -s[node]
        sj = 2.0 * s[node]
        for k in range(n):
            h[k] += sj * w[node, k]
        if e < best - tol:
            best = e
            g = t ^ (t >> 1)
            codes = [g]
        elif e <= best + tol:
            g = t ^ (t >> 1)
            codes.append(g)
        t += 1
    out = np.array(codes, dtype=np.uint64)
    out.sort()
    return best, out


def local_search(const double[:, ::1] w, s_in, double tol):
    """Greedy 1-opt descent: flip the best-improving spin until none improves."""
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t i, k, best_i
    cdef double gain, best_gain, si2
    s_arr = np.array(s_in, dtype=np.float64)
    h_arr = np.asarray(w) @ s_arr
    cdef double[::1] s = s_arr
    cdef double[::1] h = h_arr
    cdef long flips = 0
    with nogil:
        while True:
            best_gain = tol
            best_i = -1
            for i in range(n):
                gain = s[i] * h[i]
                if gain > best_gain:
                    best_gain = gain
                    best_i = i
            if best_i < 0:
                break
            s[best_i] = -s[best_i]
            si2 = 2.0 * s[best_i]
            for k in range(n):
                h[k] += si2 * w[best_i, k]
            flips += 1
    return s_arr, flips
