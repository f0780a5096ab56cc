"""Dense real linear algebra and small LP kernels.

Matrices are plain float64 numpy arrays.  numpy supplies storage, products
and dense linear solves; the eigenvalue iteration, the Riccati doubling, the
matrix exponential and the simplex method are implemented here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    NoStabilizingSolution,
    NonConvergence,
    NonFiniteInput,
)

TOL_DISTINCT = 1e-7
TOL_SCHUR = 1e-9
MAX_EIG_DIM = 32

_EPS = np.finfo(float).eps
_SMALL = np.finfo(float).tiny / _EPS


def as_mat(a, name="matrix", square=False) -> np.ndarray:
    """Return a finite 2-D float64 copy of `a`."""
    m = np.array(a, dtype=float, copy=True)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2 or m.size == 0:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array")
    if not np.all(np.isfinite(m)):
        raise NonFiniteInput(f"{name} has non-finite entries")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got {m.shape}")
    return m


def as_vec(v, name="vector", n=None) -> np.ndarray:
    x = np.array(v, dtype=float, copy=True).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput(f"{name} has non-finite entries")
    if n is not None and x.size != n:
        raise DimensionMismatch(f"{name} has length {x.size}, expected {n}")
    return x


# ---------------------------------------------------------------------------
# eigenvalues


@dataclass(frozen=True)
class Spectrum:
    """Eigen data of a real square matrix.

    `eigenvalues` is complex, sorted by real part (descending) then imaginary
    part.  When the spectrum is real, `eigenvectors` holds unit-norm columns
    in the same order, each signed so that its largest-magnitude entry is
    positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray]
    diagonalizable: bool
    complex_spectrum: bool

    @property
    def real(self) -> np.ndarray:
        return self.eigenvalues.real.copy()

    @property
    def radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    def __len__(self):
        return len(self.eigenvalues)


def hessenberg(a) -> np.ndarray:
    """Upper Hessenberg form by Householder reflections (similarity)."""
    h = as_mat(a, "A", square=True)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        alpha = -math.copysign(nx, x[0])
        x[0] -= alpha
        nv = np.linalg.norm(x)
        if nv == 0.0:
            continue
        v = x / nv
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def _hqr(a: np.ndarray, max_its: int = 60) -> np.ndarray:
    """Francis double-shift QR on an upper Hessenberg matrix (destroys `a`)."""
    n = a.shape[0]
    wr = np.zeros(n, dtype=complex)
    anorm = float(np.sum(np.abs(np.triu(a, -1))))
    nn = n - 1
    t = 0.0
    x = y = z = w = p = q = r = 0.0
    while nn >= 0:
        its = 0
        while True:
            l = nn
            while l > 0:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                # absolute floor too, since eps * s underflows next to subnormals
                if abs(a[l, l - 1]) <= max(_EPS * s, _SMALL):
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                nn -= 1
            else:
                y = a[nn - 1, nn - 1]
                w = a[nn, nn - 1] * a[nn - 1, nn]
                if l == nn - 1:
                    p = 0.5 * (y - x)
                    q = p * p + w
                    z = math.sqrt(abs(q))
                    x += t
                    if q >= 0.0:
                        z = p + math.copysign(z, p)
                        wr[nn - 1] = wr[nn] = x + z
                        if z != 0.0:
                            wr[nn] = x - w / z
                    else:
                        wr[nn - 1] = complex(x + p, z)
                        wr[nn] = complex(x + p, -z)
                    nn -= 2
                else:
                    if its == max_its:
                        raise NonConvergence("shifted QR did not converge")
                    if its in (10, 20):
                        # exceptional shift
                        t += x
                        for i in range(nn + 1):
                            a[i, i] -= x
                        s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                        x = y = 0.75 * s
                        w = -0.4375 * s * s
                    its += 1
                    m = nn - 2
                    while m >= l:
                        z = a[m, m]
                        r = x - z
                        s = y - z
                        p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                        q = a[m + 1, m + 1] - z - r - s
                        r = a[m + 2, m + 1]
                        s = abs(p) + abs(q) + abs(r)
                        p /= s
                        q /= s
                        r /= s
                        if m == l:
                            break
                        u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                        v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                        if u <= _EPS * v:
                            break
                        m -= 1
                    for i in range(m + 2, nn + 1):
                        a[i, i - 2] = 0.0
                        if i != m + 2:
                            a[i, i - 3] = 0.0
                    for k in range(m, nn):
                        if k != m:
                            p = a[k, k - 1]
                            q = a[k + 1, k - 1]
                            r = a[k + 2, k - 1] if k + 1 != nn else 0.0
                            x = abs(p) + abs(q) + abs(r)
                            if x != 0.0:
                                p /= x
                                q /= x
                                r /= x
                        s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                        if s == 0.0:
                            continue
                        if k == m:
                            if l != m:
                                a[k, k - 1] = -a[k, k - 1]
                        else:
                            a[k, k - 1] = -s * x
                        p += s
                        x = p / s
                        y = q / s
                        z = r / s
                        q /= p
                        r /= p
                        for j in range(k, nn + 1):
                            p = a[k, j] + q * a[k + 1, j]
                            if k + 1 != nn:
                                p += r * a[k + 2, j]
                                a[k + 2, j] -= p * z
                            a[k + 1, j] -= p * y
                            a[k, j] -= p * x
                        mmin = nn if nn < k + 3 else k + 3
                        for i in range(l, mmin + 1):
                            p = x * a[i, k] + y * a[i, k + 1]
                            if k + 1 != nn:
                                p += z * a[i, k + 2]
                                a[i, k + 2] -= p * r
                            a[i, k + 1] -= p * q
                            a[i, k] -= p
            if not (l + 1 < nn):
                break
    return wr


def eigenvalues(a) -> np.ndarray:
    """All eigenvalues (complex array, unsorted order of deflation)."""
    m = as_mat(a, "A", square=True)
    if m.shape[0] == 1:
        return np.array([complex(m[0, 0])])
    # unit max entry keeps tiny or huge matrices away from under/overflow
    scale = float(np.max(np.abs(m)))
    if scale == 0.0:
        return np.zeros(m.shape[0], dtype=complex)
    return _hqr(hessenberg(m / scale)) * scale


def _sort_key(lam):
    return (-lam.real, -lam.imag)


def _sign_convention(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def inverse_iteration(a: np.ndarray, lam: float, iters: int = 4) -> np.ndarray:
    """Unit eigenvector of `a` for the real eigenvalue estimate `lam`."""
    n = a.shape[0]
    scale = max(np.linalg.norm(a, "fro"), 1.0)
    v = np.linspace(1.0, 2.0, n)
    v /= np.linalg.norm(v)
    for bump in (1e-13, 1e-11, 1e-9):
        shifted = a - (lam + bump * scale) * np.eye(n)
        try:
            u = v
            for _ in range(iters):
                u = np.linalg.solve(shifted, u)
                nu = np.linalg.norm(u)
                if not np.isfinite(nu) or nu == 0.0:
                    raise np.linalg.LinAlgError
                u = u / nu
            return _sign_convention(u)
        except np.linalg.LinAlgError:
            continue
    raise NonConvergence("inverse iteration failed")


def real_spectrum(a, tol_distinct: float = TOL_DISTINCT) -> Spectrum:
    """Eigenvalues by shifted QR; eigenvectors when the spectrum is real."""
    m = as_mat(a, "A", square=True)
    n = m.shape[0]
    if n > MAX_EIG_DIM:
        raise DimensionMismatch(f"real_spectrum supports n <= {MAX_EIG_DIM}")
    lams = sorted(eigenvalues(m), key=_sort_key)
    lams = np.array(lams, dtype=complex)
    is_complex = bool(np.any(lams.imag != 0.0))
    if is_complex:
        return Spectrum(lams, None, False, True)
    vals = lams.real
    vecs = np.column_stack([inverse_iteration(m, lam) for lam in vals])
    rad = float(np.max(np.abs(vals)))
    gaps = -np.diff(vals)
    simple = bool(np.all(gaps > tol_distinct * max(rad, _EPS)))
    # independent basis: guard against collapsed inverse-iteration vectors
    well = simple and np.linalg.matrix_rank(vecs, tol=1e-10) == n
    return Spectrum(lams, vecs, bool(well), False)


def spectral_radius(a) -> float:
    return float(np.max(np.abs(eigenvalues(a))))


def is_schur(a, tol_schur: float = TOL_SCHUR) -> bool:
    """True iff every eigenvalue modulus is below 1 - tol_schur."""
    return spectral_radius(a) < 1.0 - tol_schur


# ---------------------------------------------------------------------------
# matrix exponential and sampled-data discretization


def expm(a) -> np.ndarray:
    """exp(a) by [6/6] Pade with scaling and squaring."""
    m = as_mat(a, "A", square=True)
    n = m.shape[0]
    nrm = np.linalg.norm(m, 1)
    s = 0
    if nrm > 0.5:
        s = int(math.ceil(math.log2(nrm / 0.5)))
    x = m / (2.0 ** s)
    c = [1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0]
    ident = np.eye(n)
    x2 = x @ x
    x4 = x2 @ x2
    x6 = x4 @ x2
    u = x @ (c[1] * ident + c[3] * x2 + c[5] * x4)
    v = c[0] * ident + c[2] * x2 + c[4] * x4 + c[6] * x6
    e = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        e = e @ e
    return e


class Discretization(NamedTuple):
    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    S: np.ndarray
    R: float


def zoh_discretize(Ac, Bc, Qc, Rc: float, T: float, input_model: str = "impulse") -> Discretization:
    """Sample a continuous plant and its quadratic cost with period T.

    input_model="impulse": B = exp(Ac T) Bc and the cost integrals of x(v) =
    exp(Ac v)(x + Bc u), i.e. the input acts as an impulse at the sampling
    instant.  input_model="zoh": conventional zero-order hold, B = int
    exp(Ac v) dv Bc and the held-input cost (R picks up Rc*T).
    """
    ac = as_mat(Ac, "Ac", square=True)
    n = ac.shape[0]
    bc = as_vec(Bc, "Bc", n)
    qc = as_mat(Qc, "Qc", square=True)
    if qc.shape[0] != n:
        raise DimensionMismatch("Qc must match Ac")
    if not T > 0:
        raise ValueError("sampling period must be positive")
    rc = float(Rc)
    if input_model == "impulse":
        ead = expm(ac * T)
        blk = np.zeros((2 * n, 2 * n))
        blk[:n, :n] = -ac.T
        blk[:n, n:] = qc
        blk[n:, n:] = ac
        f = expm(blk * T)
        w = f[n:, n:].T @ f[:n, n:]
        w = 0.5 * (w + w.T)
        return Discretization(ead, ead @ bc, w, w @ bc, float(bc @ w @ bc + rc))
    if input_model == "zoh":
        na = n + 1
        aa = np.zeros((na, na))
        aa[:n, :n] = ac
        aa[:n, n] = bc
        qa = np.zeros((na, na))
        qa[:n, :n] = qc
        qa[n, n] = rc
        blk = np.zeros((2 * na, 2 * na))
        blk[:na, :na] = -aa.T
        blk[:na, na:] = qa
        blk[na:, na:] = aa
        f = expm(blk * T)
        phi = f[na:, na:]
        w = phi.T @ f[:na, na:]
        w = 0.5 * (w + w.T)
        return Discretization(phi[:n, :n], phi[:n, n].copy(), w[:n, :n], w[:n, n].copy(), float(w[n, n]))
    raise ValueError(f"unknown input_model {input_model!r}")


# ---------------------------------------------------------------------------
# Riccati


def riccati_residual(A, B, Q, S, R, P) -> np.ndarray:
    a = as_mat(A)
    b = np.asarray(B, float).reshape(a.shape[0], -1)
    s = np.asarray(S, float).reshape(a.shape[0], -1)
    r = np.atleast_2d(np.asarray(R, float))
    g = a.T @ P @ b + s
    return a.T @ P @ a - P - g @ np.linalg.solve(r + b.T @ P @ b, g.T) + np.asarray(Q, float)


def solve_dare(A, B, Q, S, R, max_iter: int = 100, tol: float = 1e-14):
    """Stabilizing solution of the discrete Riccati equation with cross term.

    Structure-preserving doubling on the cross-term-free form, followed by
    one Newton (Hewer) polish.  Returns (P, K) with u = K x optimal.
    """
    a = as_mat(A, "A", square=True)
    n = a.shape[0]
    b = np.asarray(B, float).reshape(n, -1)
    q = as_mat(Q, "Q", square=True)
    s = np.asarray(S, float).reshape(n, -1)
    r = np.atleast_2d(np.asarray(R, float))
    if b.shape[1] != r.shape[0] or s.shape != b.shape or q.shape[0] != n:
        raise DimensionMismatch("inconsistent DARE data")
    if np.any(np.linalg.eigvalsh(0.5 * (r + r.T)) <= 0):
        raise ValueError("R must be positive definite")

    rinv_st = np.linalg.solve(r, s.T)
    ak = a - b @ rinv_st
    hk = q - s @ rinv_st
    hk = 0.5 * (hk + hk.T)
    gk = b @ np.linalg.solve(r, b.T)
    gk = 0.5 * (gk + gk.T)
    ident = np.eye(n)
    for _ in range(max_iter):
        w = ident + gk @ hk
        try:
            wa = np.linalg.solve(w, ak)
            wg = np.linalg.solve(w, gk)
        except np.linalg.LinAlgError as exc:
            raise NoStabilizingSolution("doubling step singular") from exc
        h_new = hk + ak.T @ hk @ wa
        g_new = gk + ak @ wg @ ak.T
        ak = ak @ wa
        h_new = 0.5 * (h_new + h_new.T)
        g_new = 0.5 * (g_new + g_new.T)
        if not np.all(np.isfinite(h_new)):
            raise NoStabilizingSolution("doubling iteration diverged")
        done = np.linalg.norm(h_new - hk) <= tol * max(np.linalg.norm(h_new), 1.0)
        hk, gk = h_new, g_new
        if done:
            break
    else:
        raise NoStabilizingSolution("doubling iteration hit its cap")
    p = hk
    k = _gain(a, b, s, r, p)
    p = _hewer_polish(a, b, q, s, r, k)
    k = _gain(a, b, s, r, p)
    if spectral_radius(a + b @ k) >= 1.0:
        raise NoStabilizingSolution("closed loop is not Schur")
    if b.shape[1] == 1:
        k = k.reshape(-1)
    return p, k


def _gain(a, b, s, r, p):
    return -np.linalg.solve(r + b.T @ p @ b, b.T @ p @ a + s.T)


def _hewer_polish(a, b, q, s, r, k):
    # value of the fixed gain k: P = Acl' P Acl + Q + S K + K' S' + K' R K
    n = a.shape[0]
    acl = a + b @ k
    qk = q + s @ k + k.T @ s.T + k.T @ r @ k
    lhs = np.eye(n * n) - np.kron(acl.T, acl.T)
    p = np.linalg.solve(lhs, qk.reshape(-1)).reshape(n, n)
    return 0.5 * (p + p.T)


# ---------------------------------------------------------------------------
# linear programming


@dataclass(frozen=True)
class LpResult:
    """Outcome of lp_maximize.

    For Optimal results the dual multipliers satisfy
    A' dual + dual_upper - dual_lower = c with all multipliers non-negative;
    for Unbounded results `witness` is a ray along which the objective grows.
    """

    status: str
    objective: float
    witness: Optional[np.ndarray] = None
    dual: Optional[np.ndarray] = None
    dual_lower: Optional[np.ndarray] = None
    dual_upper: Optional[np.ndarray] = None
    pivots: int = 0


OPTIMAL, UNBOUNDED, INFEASIBLE = "Optimal", "Unbounded", "Infeasible"


def _norm_bounds(bounds, n):
    if bounds is None:
        return [(0.0, math.inf)] * n
    if len(bounds) != n:
        raise DimensionMismatch("one interval per variable is required")
    out = []
    for lo, hi in bounds:
        lo = -math.inf if lo is None else float(lo)
        hi = math.inf if hi is None else float(hi)
        if lo > hi:
            raise ValueError("empty variable interval")
        out.append((lo, hi))
    return out


class _Revised:
    """Revised simplex on [G I E](y, s, a) = h, refactorizing the basis each pivot.

    Bland's rule: the entering column is the lowest-index improving one; among
    tied ratios the basic variable with the lowest index leaves.
    """

    def __init__(self, full, h, basis, tol, piv_tol):
        self.full = full
        self.h = h
        self.basis = np.array(basis, dtype=int)
        self.tol = tol
        self.piv_tol = piv_tol
        self.pivots = 0

    def values(self):
        try:
            return np.linalg.solve(self.full[:, self.basis], self.h)
        except np.linalg.LinAlgError as exc:
            raise NonConvergence("simplex basis became singular") from exc

    def duals(self, cost):
        return np.linalg.solve(self.full[:, self.basis].T, cost[self.basis])

    def run(self, cost, allowed, cap):
        """Maximize cost over the allowed columns; returns (status, column, direction)."""
        full = self.full
        while True:
            if self.pivots > cap:
                raise NonConvergence("simplex pivot cap exceeded")
            bmat = full[:, self.basis]
            try:
                xb = np.linalg.solve(bmat, self.h)
                pi = np.linalg.solve(bmat.T, cost[self.basis])
            except np.linalg.LinAlgError as exc:
                raise NonConvergence("simplex basis became singular") from exc
            red = cost - pi @ full
            red[self.basis] = 0.0
            cand = np.nonzero((red > self.tol) & allowed)[0]
            if cand.size == 0:
                return OPTIMAL, -1, None
            col = int(cand[0])
            u = np.linalg.solve(bmat, full[:, col])
            rows = np.nonzero(u > self.piv_tol)[0]
            if rows.size == 0:
                return UNBOUNDED, col, u
            ratios = np.maximum(xb[rows], 0.0) / u[rows]
            rmin = float(ratios.min())
            ties = rows[ratios <= rmin + 1e-12 * (1.0 + rmin)]
            leave = int(min(ties, key=lambda i: self.basis[i]))
            self.basis[leave] = col
            self.pivots += 1


def lp_maximize(c, A_ineq, b_ineq, bounds=None, tol: float = 1e-12, pivot_tol: float = 1e-11,
                pivot_cap: int = 50000) -> LpResult:
    """maximize c'x subject to A_ineq x <= b_ineq and per-variable intervals.

    Two-phase primal simplex with Bland's smallest-index rule.  `bounds` is a
    list of (lo, hi) pairs, None meaning unbounded on that side; omitted
    bounds default to x >= 0.
    """
    cvec = as_vec(c, "c")
    nvar = cvec.size
    if A_ineq is None or np.size(A_ineq) == 0:
        amat = np.zeros((0, nvar))
        bvec = np.zeros(0)
    else:
        amat = np.array(A_ineq, dtype=float)
        if amat.ndim == 1:
            amat = amat.reshape(-1, nvar)
        bvec = as_vec(b_ineq, "b_ineq")
        if amat.ndim != 2 or amat.shape[1] != nvar or amat.shape[0] != bvec.size:
            raise DimensionMismatch(f"A_ineq {amat.shape} incompatible with c ({nvar}) and b ({bvec.size})")
        if not np.all(np.isfinite(amat)):
            raise NonFiniteInput("A_ineq has non-finite entries")
    bnds = _norm_bounds(bounds, nvar)

    # substitute x = shift + T y with y >= 0
    cols = []  # (variable index, sign)
    shift = np.zeros(nvar)
    extra_rows = []
    for j, (lo, hi) in enumerate(bnds):
        if math.isfinite(lo):
            shift[j] = lo
            cols.append((j, 1.0))
            if math.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif math.isfinite(hi):
            shift[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    ny = len(cols)
    tmat = np.zeros((nvar, ny))
    for k, (j, sg) in enumerate(cols):
        tmat[j, k] = sg
    m1 = amat.shape[0]
    m = m1 + len(extra_rows)
    g = np.zeros((m, ny))
    h = np.zeros(m)
    g[:m1] = amat @ tmat
    h[:m1] = bvec - amat @ shift
    for i, (k, width) in enumerate(extra_rows):
        g[m1 + i, k] = 1.0
        h[m1 + i] = width
    cy = tmat.T @ cvec
    const = float(cvec @ shift)
    if m == 0:
        if np.any(cy > 0):
            k = int(np.nonzero(cy > 0)[0][0])
            d = np.zeros(ny)
            d[k] = 1.0
            return LpResult(UNBOUNDED, math.inf, witness=tmat @ d)
        return LpResult(OPTIMAL, const, witness=shift.copy(), dual=np.zeros(0),
                        dual_lower=np.maximum(-cvec, 0) * 0, dual_upper=np.zeros(nvar))

    # rows with h < 0 start on an artificial column -e_i
    neg = np.nonzero(h < 0)[0]
    na = len(neg)
    width = ny + m + na
    full = np.zeros((m, width))
    full[:, :ny] = g
    full[:, ny:ny + m] = np.eye(m)
    basis = list(range(ny, ny + m))
    for k, i in enumerate(neg):
        full[i, ny + m + k] = -1.0
        basis[i] = ny + m + k
    scale = max(1.0, float(np.max(np.abs(g))) if g.size else 1.0)
    hscale = max(1.0, float(np.max(np.abs(h))))
    rs = _Revised(full, h, basis, tol * scale, pivot_tol * scale)
    real_cols = np.arange(width) < ny + m

    if na:
        cost1 = np.zeros(width)
        cost1[ny + m:] = -1.0
        rs.run(cost1, np.ones(width, dtype=bool), pivot_cap)
        xb = rs.values()
        art = rs.basis >= ny + m
        if float(np.sum(np.maximum(xb[art], 0.0))) > 1e-9 * hscale:
            return LpResult(INFEASIBLE, math.nan, pivots=rs.pivots)
        # move zero-level artificials out where possible
        for r in np.nonzero(rs.basis >= ny + m)[0]:
            bmat = full[:, rs.basis]
            row = np.linalg.solve(bmat, full)[r]
            nonbasic = np.setdiff1d(np.nonzero(real_cols)[0], rs.basis)
            hits = nonbasic[np.abs(row[nonbasic]) > 1e-9]
            if hits.size:
                rs.basis[r] = int(hits[0])
    cost2 = np.zeros(width)
    cost2[:ny] = cy
    status, col, u = rs.run(cost2, real_cols, pivot_cap)
    xb = np.maximum(rs.values(), 0.0)
    z = np.zeros(width)
    z[rs.basis] = xb
    x = shift + tmat @ z[:ny]
    if status == UNBOUNDED:
        d = np.zeros(width)
        d[col] = 1.0
        d[rs.basis] = -u
        return LpResult(UNBOUNDED, math.inf, witness=tmat @ d[:ny], pivots=rs.pivots)

    w = np.maximum(rs.duals(cost2)[:m], 0.0)
    red = np.maximum(g.T @ w - cy, 0.0)
    pi = w[:m1]
    dual_upper = np.zeros(nvar)
    dual_lower = np.zeros(nvar)
    for i, (k, _) in enumerate(extra_rows):
        dual_upper[cols[k][0]] += w[m1 + i]
    for k, (j, sg) in enumerate(cols):
        lo, hi = bnds[j]
        if not (math.isfinite(lo) or math.isfinite(hi)):
            continue
        if sg > 0:
            dual_lower[j] += red[k]
        else:
            dual_upper[j] += red[k]
    return LpResult(OPTIMAL, float(cy @ z[:ny] + const), witness=x, dual=pi,
                    dual_lower=dual_lower, dual_upper=dual_upper, pivots=rs.pivots)


def duality_gap(res: LpResult, c, A_ineq, b_ineq, bounds=None):
    """(dual objective - primal objective, dual feasibility residual)."""
    cvec = as_vec(c)
    n = cvec.size
    amat = np.zeros((0, n)) if A_ineq is None or np.size(A_ineq) == 0 else np.asarray(A_ineq, float).reshape(-1, n)
    bvec = np.zeros(0) if amat.shape[0] == 0 else as_vec(b_ineq)
    bnds = _norm_bounds(bounds, n)
    lo = np.array([b[0] for b in bnds])
    hi = np.array([b[1] for b in bnds])
    dobj = float(bvec @ res.dual)
    for j in range(n):
        if res.dual_upper[j] > 0:
            dobj += res.dual_upper[j] * hi[j]
        if res.dual_lower[j] > 0:
            dobj -= res.dual_lower[j] * lo[j]
    feas = amat.T @ res.dual + res.dual_upper - res.dual_lower - cvec
    return dobj - res.objective, float(np.max(np.abs(feas))) if n else 0.0
