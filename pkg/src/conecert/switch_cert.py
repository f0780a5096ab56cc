"""Certificates bounding the number of switches of a two-cone system.

For a starting cone i1 and dwell times (1, t2, ..., t_{n-1}) the catalog
holds one row per "the state is in the expected cone at this step"
constraint.  A tuple is harmless when those rows cut out only the origin; it
is certified when n catalog rows N and the post-switch mode give a
non-negative Farkas multiplier sequence beta_t for every later step, which
means no trajectory of that shape can switch again.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .cls import ConewiseSystem
from .errors import ConeCertError
from .nonneg import NonnegResult, SpectralData, certify_beta_nonneg, modal_decompose_similar
from .errors import SpectrumUnsuitable
from .cones import exact_cone_trivial
from .numerics import lp_maximize

TRIVIAL_TOL = 1e-9
BETA0_TOL = 1e-9
COND_MAX = 1e12
# sign of the recursion matrix relative to the dwell product, see docs
M_SIGN_SHIFT = 1

SIGMA_TRIVIAL, CERTIFIED, FAILED = "SigmaTrivial", "Certified", "Failed"


def bracket(i: int) -> int:
    """Cone label of block i: odd -> 1, even -> 2."""
    return 1 if i % 2 else 2


def thread_count(default: Optional[int] = None) -> int:
    env = os.environ.get("CLS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    if default is not None:
        return max(1, default)
    return max(1, min(8, os.cpu_count() or 1))


@dataclass(frozen=True)
class RowTag:
    block: int  # 1..n-1, or n for the terminal row
    tau: int

    def __str__(self):
        return f"b{self.block}t{self.tau}"


@dataclass(frozen=True)
class RowCatalog:
    i1: int
    times: tuple  # (1, t2, ..., t_{n-1})
    rows: np.ndarray
    tags: tuple
    prefix: np.ndarray  # A_[i1+n-2]^{t_{n-1}} ... A_[i1+1]^{t2} A_[i1]
    post: int  # label of the mode active after the last dwell
    K: np.ndarray

    @property
    def n(self) -> int:
        return self.rows.shape[1]

    def terminal_row(self, t: int, A_post: np.ndarray) -> np.ndarray:
        sign = (-1) ** (self.i1 + self.n)
        return sign * self.K @ np.linalg.matrix_power(A_post, t) @ self.prefix


def build_rows(sys: ConewiseSystem, i1: int, times: Sequence[int]) -> RowCatalog:
    """Rows for dwell times (1, *times); `times` lists t2..t_{n-1}."""
    if not sys.is_two_cone:
        raise ConeCertError("row catalogs are built for two-cone systems")
    if i1 not in (1, 2):
        raise ValueError("i1 must be 1 or 2")
    n = sys.n
    full = (1,) + tuple(int(t) for t in times)
    if len(full) != n - 1:
        raise ValueError(f"need {n - 2} free dwell times for n = {n}, got {len(times)}")
    if any(t < 1 for t in full):
        raise ValueError("dwell times are positive integers")
    K = sys.K
    rows, tags = [], []
    prefix = np.eye(n)
    for k, tk in enumerate(full, start=1):
        a = sys.A(bracket(i1 + k - 1))
        sign = (-1) ** (i1 + k)
        for tau in range(tk):
            rows.append(sign * K @ prefix)
            tags.append(RowTag(k, tau))
            prefix = a @ prefix
    rows.append((-1) ** (i1 + n) * K @ prefix)
    tags.append(RowTag(n, 0))
    return RowCatalog(i1, full, np.array(rows), tuple(tags), prefix, bracket(i1 + n - 1), K.copy())


# ---------------------------------------------------------------------------
# cone triviality


@dataclass(frozen=True)
class ConeTest:
    trivial: bool
    witness: Optional[np.ndarray]
    optima: tuple
    method: str = "exact"


EXACT_BUDGET = 400_000


def cone_is_trivial(rows, tol: float = TRIVIAL_TOL, method: str = "auto") -> ConeTest:
    """Is {x : rows x >= 0} = {0}?

    "exact" enumerates candidate extreme rays with integer arithmetic on the
    float rows; "lp" maximizes each +-x_j over the box |x| <= 1.  "auto"
    picks exact while the number of row subsets stays within EXACT_BUDGET.
    """
    g = np.atleast_2d(np.asarray(rows, float))
    if g.shape[0] == 0:
        raise ValueError("at least one row is required")
    n = g.shape[1]
    if method == "auto":
        method = "exact" if math.comb(g.shape[0], n - 1) <= EXACT_BUDGET else "lp"
    if method == "exact":
        res = exact_cone_trivial(g)
        return ConeTest(res.trivial, res.ray, (), "exact")
    if method != "lp":
        raise ValueError(f"unknown method {method!r}")
    norms = np.linalg.norm(g, axis=1)
    keep = norms > 0
    g = g[keep] / norms[keep, None]
    bounds = [(-1.0, 1.0)] * n
    optima = []
    for j in range(n):
        for sgn in (1.0, -1.0):
            c = np.zeros(n)
            c[j] = sgn
            res = lp_maximize(c, -g, np.zeros(g.shape[0]), bounds)
            if res.status != "Optimal":
                raise ConeCertError(f"cone LP returned {res.status}")
            optima.append(res.objective)
            if res.objective > tol:
                w = res.witness
                return ConeTest(False, w / np.max(np.abs(w)), tuple(optima), "lp")
    return ConeTest(True, None, tuple(optima), "lp")


# ---------------------------------------------------------------------------
# Farkas recursion


@dataclass(frozen=True)
class AuxiliaryRecursion:
    selection: tuple
    Nmat: np.ndarray
    Mmat: np.ndarray
    Lmat: np.ndarray
    beta0: np.ndarray
    post: int
    A_post: np.ndarray
    K: np.ndarray

    @property
    def X(self) -> np.ndarray:
        """M N^{-1}."""
        return np.linalg.solve(self.Nmat.T, self.Mmat.T).T

    def beta_direct(self, t: int) -> np.ndarray:
        """-(K A^{t+1} M N^{-1})'."""
        return -(self.K @ np.linalg.matrix_power(self.A_post, t + 1) @ self.X)

    def beta_recursive(self, t: int) -> np.ndarray:
        b = self.beta0.copy()
        for _ in range(t):
            b = self.Lmat @ b
        return b

    def orbit_min(self, steps: int) -> np.ndarray:
        mins, _ = kernels.row_orbit_extrema(self.K @ self.A_post, self.A_post, -self.X, steps)
        return mins


def recursion_matrices(cat: RowCatalog, sys: ConewiseSystem, selection: Sequence[int]):
    """(N, M, L, beta0, X) for a row selection, or None if N is singular."""
    N = cat.rows[list(selection)]
    try:
        cond = np.linalg.cond(N)
    except np.linalg.LinAlgError:
        return None
    if not np.isfinite(cond) or cond > COND_MAX:
        return None
    a = sys.A(cat.post)
    sign = (-1) ** (cat.i1 + cat.n + M_SIGN_SHIFT)
    M = sign * cat.prefix
    X = np.linalg.solve(N.T, M.T).T  # M N^{-1}
    # M is a product of mode matrices and can be very ill-conditioned; L is
    # only a fallback route (the certificate works from A and X directly)
    try:
        Lt = N @ np.linalg.solve(M, a @ X)  # N M^{-1} A M N^{-1}
    except np.linalg.LinAlgError:
        Lt = N @ np.linalg.lstsq(M, a @ X, rcond=None)[0]
    beta0 = -(cat.K @ a @ X)
    return N, M, Lt.T, beta0, X


@dataclass
class SelectionFailure:
    selection: tuple
    reason: str


@dataclass
class SearchResult:
    aux: Optional[AuxiliaryRecursion]
    nonneg: Optional[NonnegResult]
    tried: int
    failures: list

    @property
    def found(self) -> bool:
        return self.aux is not None

    def failure_summary(self) -> str:
        counts = {}
        for f in self.failures:
            key = f.reason.split(":")[0]
            counts[key] = counts.get(key, 0) + 1
        return "; ".join(f"{k} x{v}" for k, v in sorted(counts.items()))


def search_N(cat: RowCatalog, sys: ConewiseSystem, i1: Optional[int] = None,
             max_selections: Optional[int] = None, keep_failures: int = 200) -> SearchResult:
    """First lexicographic row selection whose beta sequence is proved non-negative."""
    if i1 is not None and i1 != cat.i1:
        raise ValueError("catalog was built for another starting cone")
    a = sys.A(cat.post)
    failures = []
    tried = 0
    for sel in itertools.combinations(range(cat.rows.shape[0]), cat.n):
        if max_selections is not None and tried >= max_selections:
            break
        tried += 1
        mats = recursion_matrices(cat, sys, sel)
        if mats is None:
            _note(failures, keep_failures, sel, "singular: selected rows are dependent")
            continue
        N, M, L, beta0, X = mats
        scale = float(np.max(np.abs(beta0)))
        if float(np.min(beta0)) < -BETA0_TOL * max(scale, 1e-300):
            _note(failures, keep_failures, sel, f"beta0: min entry {np.min(beta0):.3e}")
            continue
        b0 = np.maximum(beta0, 0.0)
        aux = AuxiliaryRecursion(tuple(sel), N, M, L, b0, cat.post, a, cat.K)
        try:
            spectral = modal_decompose_similar(a, X, -(a.T @ cat.K))
        except SpectrumUnsuitable:
            spectral = None
        res = certify_beta_nonneg(L, b0, spectral=spectral, orbit_min=aux.orbit_min)
        if res.proved:
            return SearchResult(aux, res, tried, failures)
        _note(failures, keep_failures, sel, f"nonneg: {res.evidence.note or res.evidence.method}")
    return SearchResult(None, None, tried, failures)


def _note(failures, cap, sel, reason):
    if len(failures) < cap:
        failures.append(SelectionFailure(tuple(sel), reason))


# ---------------------------------------------------------------------------
# enumeration


@dataclass
class TupleResult:
    times: tuple  # (t2, ..., t_{n-1})
    status: str
    sigma: ConeTest
    search: Optional[SearchResult] = None
    rows: int = 0

    @property
    def aux(self) -> Optional[AuxiliaryRecursion]:
        return None if self.search is None else self.search.aux

    @property
    def reason(self) -> str:
        if self.status == SIGMA_TRIVIAL:
            return "rows cut out only the origin"
        if self.status == CERTIFIED:
            return self.search.nonneg.evidence.method
        return self.search.failure_summary() or "no invertible selection"


@dataclass
class SwitchCertificate:
    i1: int
    n: int
    bound: int
    caps: tuple
    per_tuple: dict
    frontier_check: bool
    frontier_detail: str
    verdict: str  # "Certified" | "Inconclusive"
    alternatives: dict = field(default_factory=dict)

    @property
    def nontrivial(self) -> list:
        return [k for k, v in self.per_tuple.items() if v.status != SIGMA_TRIVIAL]

    @property
    def failed(self) -> list:
        return [k for k, v in self.per_tuple.items() if v.status == FAILED]

    @property
    def all_tuples_ok(self) -> bool:
        return not self.failed

    @property
    def statement(self) -> str:
        if self.verdict == CERTIFIED:
            if not self.caps:
                return f"every solution switches at most {self.bound} times"
            return (f"every solution switches at most {self.bound} times, for dwell tuples up to the "
                    f"caps; frontier clean (heuristic, not a proof beyond the caps)")
        if self.all_tuples_ok:
            return (f"all tuples up to the caps are harmless or certified (bound {self.bound}), "
                    f"but the frontier is not clean: {self.frontier_detail}")
        return f"{len(self.failed)} tuple(s) could not be certified"


def _evaluate(sys, i1, times, search=True):
    cat = build_rows(sys, i1, times)
    sigma = cone_is_trivial(cat.rows)
    if sigma.trivial:
        return TupleResult(tuple(times), SIGMA_TRIVIAL, sigma, None, cat.rows.shape[0])
    if not search:
        return TupleResult(tuple(times), FAILED, sigma, None, cat.rows.shape[0])
    sr = search_N(cat, sys)
    return TupleResult(tuple(times), CERTIFIED if sr.found else FAILED, sigma, sr, cat.rows.shape[0])


def tuples_up_to(caps: Sequence[int]):
    """Dwell tuples (t2, ..., t_{n-1}) in the box, last entry slowest."""
    ranges = [range(1, c + 1) for c in caps]
    for combo in itertools.product(*reversed(ranges)):
        yield tuple(reversed(combo))


def frontier_tuples(caps: Sequence[int], margin: int = 1):
    """Tuples on the cap boundary plus `margin` layers outside it."""
    caps = tuple(caps)
    outer = tuple(c + margin for c in caps)
    for t in tuples_up_to(outer):
        if any(ti >= ci for ti, ci in zip(t, caps)):
            yield t


def certify(sys: ConewiseSystem, i1: int, caps: Sequence[int], workers: Optional[int] = None,
            margin: int = 1) -> SwitchCertificate:
    """Certify, for all dwell tuples up to `caps`, that no solution switches more than n times."""
    n = sys.n
    caps = tuple(int(c) for c in caps)
    if len(caps) != max(n - 2, 0):
        raise ValueError(f"need {n - 2} caps for n = {n}")
    todo = list(tuples_up_to(caps))
    nthreads = thread_count(workers)
    if nthreads > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            results = list(pool.map(lambda t: _evaluate(sys, i1, t), todo))
    else:
        results = [_evaluate(sys, i1, t) for t in todo]
    per = {r.times: r for r in results}

    if not caps:
        frontier_ok, detail = True, "no free dwell times"
    else:
        layer = [t for t in frontier_tuples(caps, margin) if t not in per or per[t].status != SIGMA_TRIVIAL]
        extra = [t for t in layer if t not in per]
        if nthreads > 1 and len(extra) > 1:
            with ThreadPoolExecutor(max_workers=nthreads) as pool:
                ext = list(pool.map(lambda t: _evaluate(sys, i1, t, search=False), extra))
        else:
            ext = [_evaluate(sys, i1, t, search=False) for t in extra]
        bad = [t for t in layer if t in per] + [r.times for r in ext if r.status != SIGMA_TRIVIAL]
        frontier_ok = not bad
        detail = "clean" if frontier_ok else (
            f"{len(bad)} tuple(s) on or beyond the cap boundary are not trivial, e.g. {sorted(bad)[:4]}")
    ok = all(r.status != FAILED for r in results)
    verdict = CERTIFIED if ok and frontier_ok else "Inconclusive"
    return SwitchCertificate(i1, n, n, caps, per, frontier_ok, detail, verdict)


def certify_auto(sys: ConewiseSystem, caps: Sequence[int], workers: Optional[int] = None,
                 margin: int = 1) -> SwitchCertificate:
    """Try i1 = 1, then i1 = 2 only if some tuple failed; keep the better result."""
    first = certify(sys, 1, caps, workers, margin)
    if first.all_tuples_ok:
        first.alternatives = {2: "not run (i1 = 1 had no failed tuple)"}
        return first
    second = certify(sys, 2, caps, workers, margin)
    pick, other = (second, first) if len(second.failed) < len(first.failed) else (first, second)
    pick.alternatives = {other.i1: f"{other.verdict}; {len(other.failed)} failed tuple(s)"}
    return pick


def farkas_residual(aux: AuxiliaryRecursion, steps: int = 200, source: str = "direct",
                    spectral: Optional[SpectralData] = None) -> float:
    """max_t |beta_t' N + K A^{t+1} M| / |K A^{t+1} M| for t = 0..steps.

    source selects how beta_t is formed: "direct" as -(K A^{t+1} M N^{-1})',
    "modal" from the eigen-expansion used by the certificate, "recursive" by
    iterating L (which amplifies rounding when L is far from normal).
    """
    if source == "modal" and spectral is None:
        raise ValueError("modal residual needs the spectral data")
    x = aux.X
    worst = 0.0
    b = aux.beta0.copy()
    r = aux.K @ aux.A_post
    for t in range(steps + 1):
        nr = max(np.linalg.norm(r), 1e-300)
        rn = r / nr
        target = rn @ aux.Mmat
        den = max(np.linalg.norm(target), 1e-300)
        if source == "direct":
            beta = -(rn @ x)
        elif source == "modal":
            beta = spectral.beta(t) / nr
        elif source == "recursive":
            beta = b / nr
            b = aux.Lmat @ b
        else:
            raise ValueError(f"unknown source {source!r}")
        worst = max(worst, float(np.linalg.norm(beta @ aux.Nmat + target) / den))
        r = r @ aux.A_post
    return worst
