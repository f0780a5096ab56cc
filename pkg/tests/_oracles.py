"""Independent reference implementations used only by the tests."""

import itertools
import math

import numpy as np


def jacobi_eigenvalues(a, sweeps=100, tol=1e-15):
    """Cyclic Jacobi rotations for a symmetric matrix."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    for _ in range(sweeps):
        off = math.sqrt(max(float(np.sum(a ** 2) - np.sum(np.diag(a) ** 2)), 0.0))
        if off < tol * max(1.0, float(np.linalg.norm(a))):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                j = np.eye(n)
                j[p, p] = j[q, q] = c
                j[p, q] = s
                j[q, p] = -s
                a = j.T @ a @ j
    return np.sort(np.diag(a))[::-1]


def vertex_lp(c, A, b):
    """max c'x over {A x <= b} by enumerating all basic solutions (bounded problems)."""
    m, n = A.shape
    best = -math.inf
    for rows in itertools.combinations(range(m), n):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ x <= b + 1e-9):
            best = max(best, float(c @ x))
    return best


def simpson(f, a, b, panels):
    """Composite Simpson rule for an array-valued integrand."""
    if panels % 2:
        panels += 1
    h = (b - a) / panels
    total = f(a) + f(b)
    for k in range(1, panels):
        total = total + (4 if k % 2 else 2) * f(a + k * h)
    return total * h / 3.0


def phi_grid_min(z, mus, s_max=None, points=100_000):
    """Minimum of z1 + sum z_i exp(-mu_i s) over a dense grid of [0, s_max]."""
    z = np.asarray(z, float)
    mus = np.asarray(mus, float)
    if s_max is None:
        s_max = 50.0 / mus[1] if len(mus) > 1 and mus[1] > 0 else 50.0
    s = np.linspace(0.0, s_max, points)
    vals = np.exp(-np.outer(s, mus)) @ z
    return float(min(vals.min(), z[0]))


def min_switches_exhaustive(labels):
    """labels: 1, 2, or 0 for a boundary state; brute force over boundary assignments."""
    free = [i for i, l in enumerate(labels) if l == 0]
    best = None
    for choice in itertools.product((1, 2), repeat=len(free)):
        seq = list(labels)
        for i, c in zip(free, choice):
            seq[i] = c
        count = sum(1 for a, b in zip(seq, seq[1:]) if a != b)
        best = count if best is None else min(best, count)
    return best
