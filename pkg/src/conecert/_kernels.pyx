# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled loops for batched two-cone simulation and row orbits."""

import numpy as np
from libc.math cimport sqrt, fabs


def batch_switch_counts(double[:, ::1] A1, double[:, ::1] A2, double[::1] K,
                        double[:, ::1] X0, long steps, double tol):
    """Switch count of every row of X0 over `steps` steps (labels of x_0..x_steps)."""
    cdef Py_ssize_t N = X0.shape[0], n = X0.shape[1]
    cdef Py_ssize_t i, j, k
    cdef long t
    cdef double s, nrm, acc
    cdef int lab, cur, mode
    counts_np = np.zeros(N, dtype=np.int64)
    cdef long long[::1] counts = counts_np
    x_np = np.empty(n, dtype=np.float64)
    y_np = np.empty(n, dtype=np.float64)
    cdef double[::1] x = x_np
    cdef double[::1] y = y_np
    cdef double[:, ::1] A
    with nogil:
        for i in range(N):
            for j in range(n):
                x[j] = X0[i, j]
            cur = 0
            for t in range(steps + 1):
                s = 0.0
                nrm = 0.0
                for j in range(n):
                    s += K[j] * x[j]
                    nrm += x[j] * x[j]
                nrm = sqrt(nrm)
                if s > tol * nrm:
                    lab = 1
                elif s < -tol * nrm:
                    lab = 2
                else:
                    lab = 0
                if lab != 0:
                    if cur != 0 and lab != cur:
                        counts[i] += 1
                    cur = lab
                if t == steps:
                    break
                mode = lab
                if mode == 0:
                    mode = cur if cur != 0 else 1
                for j in range(n):
                    acc = 0.0
                    if mode == 1:
                        for k in range(n):
                            acc += A1[j, k] * x[k]
                    else:
                        for k in range(n):
                            acc += A2[j, k] * x[k]
                    y[j] = acc
                for j in range(n):
                    x[j] = y[j]
    return counts_np


def row_orbit_extrema(double[::1] r0, double[:, ::1] A, double[:, ::1] G, long steps):
    """For r_t = r0 A^t, t < steps: min_j (r_t G)_j and max_j |(r_t G)_j|."""
    cdef Py_ssize_t n = A.shape[0], p = G.shape[1]
    cdef Py_ssize_t j, k
    cdef long t
    cdef double acc, lo, hi
    mins_np = np.empty(steps, dtype=np.float64)
    maxs_np = np.empty(steps, dtype=np.float64)
    cdef double[::1] mins = mins_np
    cdef double[::1] maxs = maxs_np
    r_np = np.array(r0, dtype=np.float64)
    w_np = np.empty(n, dtype=np.float64)
    cdef double[::1] r = r_np
    cdef double[::1] w = w_np
    with nogil:
        for t in range(steps):
            lo = 1e308
            hi = 0.0
            for k in range(p):
                acc = 0.0
                for j in range(n):
                    acc += r[j] * G[j, k]
                if acc < lo:
                    lo = acc
                if fabs(acc) > hi:
                    hi = fabs(acc)
            mins[t] = lo
            maxs[t] = hi
            for k in range(n):
                acc = 0.0
                for j in range(n):
                    acc += r[j] * A[j, k]
                w[k] = acc
            for k in range(n):
                r[k] = w[k]
    return mins_np, maxs_np
