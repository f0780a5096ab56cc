"""Exact decision of whether a polyhedral cone {x : G x >= 0} is {0}.

The rows are taken as the exact binary fractions that the floats represent,
so the answer does not depend on a solver tolerance.  A cone other than {0}
either contains a line (rank G < n) or has an extreme ray, and every extreme
ray spans the null space of n - 1 independent rows.  Candidate rays are
screened in floating point; only subsets whose sign pattern is too close to
call are recomputed with integer arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

SCREEN_TOL = 1e-9


@dataclass(frozen=True)
class ExactCone:
    trivial: bool
    ray: Optional[np.ndarray]  # float image of an exact ray, max-norm 1
    reason: str
    exact_checks: int


def to_integers(g: np.ndarray) -> list:
    """Scale a float matrix by a power of two so that every entry is an integer."""
    vals = [v for v in g.ravel() if v != 0.0]
    if not vals:
        return [[0] * g.shape[1] for _ in range(g.shape[0])]
    e = min(math.frexp(v)[1] for v in vals) - 53
    return [[int(math.ldexp(v, -e)) for v in row] for row in g.tolist()]


def int_det(m: list) -> int:
    """Determinant of a square integer matrix (fraction-free Bareiss)."""
    n = len(m)
    if n == 0:
        return 1
    m = [r[:] for r in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[-1][-1]


def int_rank(m: list) -> int:
    rows = [[Fraction(v) for v in r] for r in m]
    if not rows:
        return 0
    r = 0
    for c in range(len(rows[0])):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c] / rows[r][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
    return r


def int_null_vector(sub: list) -> list:
    """Signed maximal minors of an (n-1) x n integer matrix."""
    n = len(sub[0])
    return [(-1) ** j * int_det([[row[k] for k in range(n) if k != j] for row in sub]) for j in range(n)]


def _float_ray(x: list) -> np.ndarray:
    top = max(abs(v) for v in x)
    return np.array([float(Fraction(v, top)) for v in x])


def _minors(g: np.ndarray, subsets: np.ndarray) -> np.ndarray:
    """Float signed maximal minors for each subset of n - 1 rows."""
    n = g.shape[1]
    blocks = g[subsets]  # (S, n-1, n)
    out = np.empty((len(subsets), n))
    for j in range(n):
        keep = [k for k in range(n) if k != j]
        out[:, j] = (-1) ** j * np.linalg.det(blocks[:, :, keep]) if n > 1 else 1.0
    return out


def exact_cone_trivial(rows, chunk: int = 4096) -> ExactCone:
    """Decide {x : rows x >= 0} == {0} exactly for the given float rows."""
    g = np.atleast_2d(np.asarray(rows, float))
    m, n = g.shape
    norms = np.linalg.norm(g, axis=1)
    g = g[norms > 0]
    norms = norms[norms > 0]
    gi = to_integers(g)
    if n == 1:
        vals = [r[0] for r in gi]
        if all(v >= 0 for v in vals) or all(v <= 0 for v in vals):
            return ExactCone(False, np.array([1.0 if all(v >= 0 for v in vals) else -1.0]), "ray", 0)
        return ExactCone(True, None, "opposite rows", 0)
    gn = g / norms[:, None]
    sv = np.linalg.svd(gn, compute_uv=False) if len(gn) else np.zeros(0)
    if len(gn) < n or sv[-1] < 1e-6 * max(sv[0], 1.0):
        if int_rank(gi) < n:
            return ExactCone(False, _lineality_ray(gi, n), "the rows leave a line", 1)
    checks = 0
    combos = itertools.combinations(range(len(gn)), n - 1)
    while True:
        batch = np.array(list(itertools.islice(combos, chunk)), dtype=int)
        if batch.size == 0:
            break
        x = _minors(gn, batch)
        size = np.linalg.norm(x, axis=1)
        v = x @ gn.T  # (S, m)
        err = SCREEN_TOL * np.maximum(size, 1e-300)[:, None]
        sure_pos = (v > err).any(axis=1)
        sure_neg = (v < -err).any(axis=1)
        undecided = ~(sure_pos & sure_neg) | (size < SCREEN_TOL)
        for s in np.nonzero(undecided)[0]:
            checks += 1
            sub = [gi[i] for i in batch[s]]
            xi = int_null_vector(sub)
            if not any(xi):
                continue
            vals = [sum(a * b for a, b in zip(r, xi)) for r in gi]
            if all(t >= 0 for t in vals):
                return ExactCone(False, _float_ray(xi), "extreme ray", checks)
            if all(t <= 0 for t in vals):
                return ExactCone(False, _float_ray([-t for t in xi]), "extreme ray", checks)
    return ExactCone(True, None, "no extreme ray", checks)


def _lineality_ray(gi: list, n: int) -> np.ndarray:
    """A nonzero exact solution of G x = 0 (rank G < n)."""
    rows = [[Fraction(v) for v in r] for r in gi]
    piv = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        rows[r] = [a / rows[r][c] for a in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv.append(c)
        r += 1
    free = next(c for c in range(n) if c not in piv)
    x = [Fraction(0)] * n
    x[free] = Fraction(1)
    for i, c in enumerate(piv):
        x[c] = -rows[i][free]
    top = max(abs(v) for v in x)
    return np.array([float(v / top) for v in x])
