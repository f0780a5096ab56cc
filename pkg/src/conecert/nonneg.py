"""Non-negativity of beta_t = L^t beta_0 through its modal expansion.

With distinct positive eigenvalues l_1 > ... > l_n the solution is
beta_t = sum_i rho_i l_i^t.  Dividing by l_1^t, each coordinate becomes
phi(s) = z_1 + z_2 e^{-mu_2 s} + ... + z_k e^{-mu_k s} sampled at integer s,
with mu_i = -ln(l_i / l_1).  phi >= 0 on the half-line is decided exactly for
k <= 3 and by sufficient tests for k = 4 and beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NonConvergence, SpectrumUnsuitable
from .numerics import TOL_DISTINCT, as_mat, as_vec, real_spectrum

PROVED, UNKNOWN = "Proved", "Unknown"
ZERO_REL = 1e-13


@dataclass(frozen=True)
class SpectralData:
    """lambdas descending; V columns unit eigenvectors of L; rhos[i] = gammas[i] V[:, i]."""

    lambdas: np.ndarray
    V: np.ndarray
    gammas: np.ndarray
    rhos: np.ndarray
    mus: np.ndarray

    def beta(self, t: int) -> np.ndarray:
        return (self.lambdas ** t) @ self.rhos


def _check_spectrum(lams, tol_distinct):
    if np.any(lams <= 0):
        raise SpectrumUnsuitable("eigenvalues must be positive")
    gaps = -np.diff(lams)
    if np.any(gaps <= tol_distinct * lams[0]):
        raise SpectrumUnsuitable("eigenvalues are not distinct")


def _finish(lams, vecs, gammas):
    order = np.argsort(-lams, kind="stable")
    lams, vecs, gammas = lams[order], vecs[:, order], gammas[order]
    rhos = (vecs * gammas).T
    mus = -np.log(lams / lams[0])
    mus[0] = 0.0
    return SpectralData(lams, vecs, gammas, rhos, mus)


def _orient(u):
    nu = np.linalg.norm(u)
    v = u / nu
    k = int(np.argmax(np.abs(v)))
    sgn = -1.0 if v[k] < 0 else 1.0
    return sgn * v, sgn * nu


def modal_decompose(L, beta0, tol_distinct: float = TOL_DISTINCT) -> SpectralData:
    """Eigen-expansion of beta0 in the eigenbasis of L."""
    lm = as_mat(L, "L", square=True)
    b0 = as_vec(beta0, "beta0", lm.shape[0])
    try:
        spec = real_spectrum(lm, tol_distinct)
    except NonConvergence as exc:
        raise SpectrumUnsuitable(str(exc)) from exc
    if spec.complex_spectrum:
        raise SpectrumUnsuitable("complex eigenvalues")
    lams = spec.real
    _check_spectrum(lams, tol_distinct)
    if not spec.diagonalizable:
        raise SpectrumUnsuitable("eigenvector basis is degenerate")
    v = spec.eigenvectors
    g = np.linalg.solve(v, b0)
    return _finish(lams, v, g)


def modal_decompose_similar(A, X, c, tol_distinct: float = TOL_DISTINCT) -> SpectralData:
    """Expansion for L = X' A' X^{-T} and beta0 = X' c, computed through A.

    L is then similar to A'; its eigenvectors are X' w_i with w_i the left
    eigenvectors of A, and rho_i = (v_i . c) X' w_i.  Working with A avoids
    the conditioning of L, which can be far from normal.
    """
    am = as_mat(A, "A", square=True)
    xm = as_mat(X, "X", square=True)
    cv = as_vec(c, "c", am.shape[0])
    try:
        spec = real_spectrum(am, tol_distinct)
    except NonConvergence as exc:
        raise SpectrumUnsuitable(str(exc)) from exc
    if spec.complex_spectrum:
        raise SpectrumUnsuitable("complex eigenvalues")
    lams = spec.real
    _check_spectrum(lams, tol_distinct)
    if not spec.diagonalizable:
        raise SpectrumUnsuitable("eigenvector basis is degenerate")
    vr = spec.eigenvectors
    wl = np.linalg.inv(vr).T  # columns: left eigenvectors, w_i . v_j = delta_ij
    n = am.shape[0]
    vecs = np.empty((n, n))
    gam = np.empty(n)
    for i in range(n):
        v, scale = _orient(xm.T @ wl[:, i])
        vecs[:, i] = v
        gam[i] = (vr[:, i] @ cv) * scale
    return _finish(lams, vecs, gam)


# ---------------------------------------------------------------------------
# scalar exponential sums


@dataclass(frozen=True)
class PhiVerdict:
    verdict: str
    method: str
    detail: str = ""
    margin: float = math.nan

    @property
    def proved(self) -> bool:
        return self.verdict == PROVED


def phi_value(z, mus, s):
    z = np.asarray(z, float)
    mus = np.asarray(mus, float)
    s = np.asarray(s, float)
    return np.exp(-np.multiply.outer(s, mus)) @ z


def _k3(z, mu):
    z1, z2, z3 = z
    m2, m3 = mu[1], mu[2]
    if z2 >= 0:
        return PhiVerdict(PROVED, "ClosedForm3(i)")
    if z3 <= 0:
        return PhiVerdict(PROVED, "ClosedForm3(ii)")
    if m2 * z2 + m3 * z3 <= 0:
        return PhiVerdict(PROVED, "ClosedForm3(iii)")
    r = -m2 * z2 / (m3 * z3)
    val = z1 + z2 * r ** (m2 / (m3 - m2)) + z3 * r ** (m3 / (m3 - m2))
    if val >= 0:
        return PhiVerdict(PROVED, "ClosedForm3(iv)", f"stationary value {val:.6g}", val)
    return PhiVerdict(UNKNOWN, "ClosedForm3(iv)", f"stationary value {val:.6g} < 0 (exact: phi dips below zero)", val)


def _pow_term(ratio, m2, m3, m4):
    # (mu4/mu2) ((mu4-mu2)/(mu3-mu2) - 1) exp(((mu4-mu2)/(mu4-mu3)) ln ratio)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        e = (m4 - m2) / (m4 - m3) * math.log(ratio)
        return m4 / m2 * ((m4 - m2) / (m3 - m2) - 1.0) * (math.exp(e) if e < 700 else math.inf)


def _k4_items(z, mu):
    z1, z2, z3, z4 = z
    m2, m3, m4 = mu[1], mu[2], mu[3]
    if z4 <= 0 and z3 <= 0:
        return "ClosedForm4(i)"
    if z4 <= 0 and z3 > 0 and z2 >= 0:
        return "ClosedForm4(ii)"
    if z4 < 0 and z3 > 0 and z2 < 0:
        ratio = z3 / abs(z4) * m3 / m4 * (m3 - m2) / (m4 - m2)
        lhs = _pow_term(ratio, m2, m3, m4) * z4
        if lhs >= z2:
            return "ClosedForm4(iii)"
    if z4 > 0 and z3 >= 0 and z2 >= 0:
        return "ClosedForm4(v)"
    if z4 > 0 and z3 < 0 and z2 <= 0 and abs(z3) * m3 * (m3 - m2) >= z4 * m4 * (m4 - m2):
        return "ClosedForm4(vii)"
    if z4 > 0 and z3 < 0 and z2 > 0:
        ratio = abs(z3) / z4 * m3 / m4 * (m3 - m2) / (m4 - m2)
        lhs = _pow_term(ratio, m2, m3, m4) * z4
        if lhs <= z2:
            return "ClosedForm4(viii)"
    return None


def phi_nonneg(z, mus, budget: int = 4096) -> PhiVerdict:
    """Is z_1 + sum_{i>=2} z_i exp(-mu_i s) >= 0 for every s >= 0?

    Proved is always backed by a replayable inequality; Unknown is returned
    otherwise (for k <= 3 Unknown means the function does go negative).
    """
    z = np.array(z, dtype=float).reshape(-1)
    mu = np.array(mus, dtype=float).reshape(-1)
    if z.size != mu.size or z.size == 0:
        raise ValueError("z and mus must have the same positive length")
    if mu[0] != 0.0 or np.any(np.diff(mu) <= 0):
        raise ValueError("mus must start at 0 and increase strictly")
    return _phi(z, mu, [budget])


def _phi(z, mu, budget):
    budget[0] -= 1
    keep = np.concatenate([[True], z[1:] != 0.0])
    z, mu = z[keep], mu[keep]
    total = float(np.sum(z))
    margin = min(float(z[0]), total)
    if z[0] < 0:
        return PhiVerdict(UNKNOWN, "Endpoint", "z1 < 0: phi tends to a negative limit", margin)
    if total < 0:
        return PhiVerdict(UNKNOWN, "Endpoint", "phi(0) < 0", margin)
    k = z.size
    if k == 1 or np.all(z[1:] >= 0):
        return PhiVerdict(PROVED, "AllSameSign(i)", "", margin)
    if np.all(z[1:] <= 0):
        return PhiVerdict(PROVED, "AllSameSign(ii)", "", margin)
    if k == 3:
        v = _k3(z, mu)
        return PhiVerdict(v.verdict, v.method, v.detail, min(margin, v.margin) if v.proved and not math.isnan(v.margin) else margin)
    if k == 4:
        item = _k4_items(z, mu)
        if item:
            return PhiVerdict(PROVED, item, "", margin)
    # recursive chain: eliminate the stationary-point term j
    for j in range(1, k):
        if budget[0] <= 0:
            break
        others = [i for i in range(1, k) if i != j]
        zr = np.concatenate([[z[0]], [(1.0 - mu[i] / mu[j]) * z[i] for i in others]])
        mr = np.concatenate([[0.0], mu[others]])
        sub = _phi(zr, mr, budget)
        if sub.proved:
            inner = sub.method[6:-1] if sub.method.startswith("Chain(") else sub.method
            return PhiVerdict(PROVED, f"Chain({j + 1}>{inner})", "", margin)
    return PhiVerdict(UNKNOWN, "Exhausted", "no sufficient test applies", margin)


# ---------------------------------------------------------------------------
# vector trajectories


@dataclass
class NonnegEvidence:
    method: str
    per_component: list = field(default_factory=list)
    horizon_used: Optional[int] = None
    margin: float = math.nan
    note: str = ""


@dataclass
class NonnegResult:
    verdict: str
    evidence: NonnegEvidence
    spectral: Optional[SpectralData] = None

    @property
    def proved(self) -> bool:
        return self.verdict == PROVED


def _clean(rhos):
    scale = float(np.max(np.abs(rhos))) if rhos.size else 0.0
    out = rhos.copy()
    out[np.abs(out) <= ZERO_REL * scale] = 0.0
    return out


def _iterate_min(L, beta0, steps):
    b = beta0.copy()
    mins = np.empty(steps)
    for t in range(steps):
        mins[t] = b.min()
        b = L @ b
    return mins


def certify_beta_nonneg(L, beta0, spectral: Optional[SpectralData] = None, horizon: int = 2000,
                        orbit_min: Optional[Callable[[int], np.ndarray]] = None) -> NonnegResult:
    """Decide beta_t >= 0 for all t via the modal tests, else horizon plus tail.

    `orbit_min(T)` may supply min_l [beta_t]_l for t < T computed by a route
    more accurate than powering L.
    """
    lm = as_mat(L, "L", square=True)
    b0 = as_vec(beta0, "beta0", lm.shape[0])
    scale = float(np.max(np.abs(b0))) if b0.size else 0.0
    if np.any(b0 < 0):
        return NonnegResult(UNKNOWN, NonnegEvidence("Precondition", note="beta0 has a negative entry"))
    note = ""
    if spectral is None:
        try:
            spectral = modal_decompose(lm, b0)
        except SpectrumUnsuitable as exc:
            note = f"modal route unavailable: {exc}"
    if spectral is not None:
        rhos = _clean(spectral.rhos)
        if np.all(rhos[0] >= 0):
            per = [phi_nonneg(rhos[:, l], spectral.mus) for l in range(rhos.shape[1])]
            if all(p.proved for p in per) and orbit_min is not None:
                # the modal proof runs on computed rho; the direct orbit must agree
                direct = orbit_min(min(horizon, 400))
                if np.min(direct) < -1e-9 * max(scale, 1e-300):
                    per = []
                    note = f"modal proof contradicted by the direct orbit (min {np.min(direct):.3e})"
            if per and all(p.proved for p in per):
                methods = sorted({p.method for p in per})
                margin = min(p.margin for p in per)
                return NonnegResult(PROVED, NonnegEvidence("Modal:" + "+".join(methods), per, None, margin), spectral)
            elif per:
                note = "modal tests inconclusive for component(s) " + ",".join(
                    str(l + 1) for l, p in enumerate(per) if not p.proved)
        else:
            note = "rho_1 has a negative entry"
    return _horizon_plus_tail(lm, b0, spectral, horizon, orbit_min, note, scale)


def _horizon_plus_tail(L, b0, spectral, horizon, orbit_min, note, scale):
    if spectral is None:
        return NonnegResult(UNKNOWN, NonnegEvidence("HorizonPlusTail", note=note + "; no tail bound without a modal expansion"))
    rhos = spectral.rhos
    lam = spectral.lambdas
    r1min = float(np.min(rhos[0]))
    if r1min <= 0:
        return NonnegResult(UNKNOWN, NonnegEvidence("HorizonPlusTail", note=note + "; min rho_1 is not positive"), spectral)
    # sum_{i>=2} |rho_i|_inf (l_i/l_1)^T <= min rho_1 makes every t >= T safe
    tail = np.max(np.abs(rhos[1:]), axis=1) if lam.size > 1 else np.zeros(0)
    ratios = lam[1:] / lam[0]
    T = None
    for t in range(horizon + 1):
        if float(np.sum(tail * ratios ** t)) <= r1min:
            T = t
            break
    if T is None:
        return NonnegResult(UNKNOWN, NonnegEvidence("HorizonPlusTail", horizon_used=horizon,
                                                   note=note + "; tail bound not reached within horizon"), spectral)
    mins = orbit_min(T) if orbit_min is not None else _iterate_min(L, b0, T)
    if T and float(np.min(mins)) < -1e-12 * scale:
        bad = int(np.argmin(mins))
        return NonnegResult(UNKNOWN, NonnegEvidence("HorizonPlusTail", horizon_used=T,
                                                   note=note + f"; beta_{bad} has a negative entry"), spectral)
    margin = float(np.min(mins)) if T else r1min
    return NonnegResult(PROVED, NonnegEvidence("HorizonPlusTail", [], T, margin, note), spectral)
