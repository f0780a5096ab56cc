"""Pure numpy versions of the compiled kernels (same signatures and semantics)."""

import numpy as np


def batch_switch_counts(A1, A2, K, X0, steps, tol):
    A1 = np.asarray(A1, float)
    A2 = np.asarray(A2, float)
    K = np.asarray(K, float)
    x = np.array(X0, dtype=float, copy=True)
    nrows = x.shape[0]
    counts = np.zeros(nrows, dtype=np.int64)
    cur = np.zeros(nrows, dtype=np.int8)
    for t in range(steps + 1):
        s = x @ K
        nrm = np.sqrt(np.einsum("ij,ij->i", x, x))
        lab = np.where(s > tol * nrm, 1, np.where(s < -tol * nrm, 2, 0)).astype(np.int8)
        hit = lab != 0
        counts += (hit & (cur != 0) & (lab != cur)).astype(np.int64)
        cur = np.where(hit, lab, cur)
        if t == steps:
            break
        mode = np.where(hit, lab, np.where(cur != 0, cur, 1))
        one = mode == 1
        nxt = np.empty_like(x)
        if one.any():
            nxt[one] = x[one] @ A1.T
        if (~one).any():
            nxt[~one] = x[~one] @ A2.T
        x = nxt
    return counts


def row_orbit_extrema(r0, A, G, steps):
    A = np.asarray(A, float)
    G = np.asarray(G, float)
    r = np.array(r0, dtype=float, copy=True)
    mins = np.empty(steps)
    maxs = np.empty(steps)
    for t in range(steps):
        v = r @ G
        mins[t] = v.min()
        maxs[t] = np.abs(v).max()
        r = r @ A
    return mins, maxs
