"""Global exponential stability verdicts and piecewise-quadratic Lyapunov checks.

A system with a finite switch bound is GES exactly when its restriction to
the set of states that never switch again is GES.  Two routes decide that
restriction here: every mode Schur (sufficient), or an eigenvector of a mode
with eigenvalue >= 1 lying in that mode's cone (a trajectory that never
decays, so not GES).  Anything else is left Inconclusive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cls import ConewiseSystem
from .errors import DimensionMismatch, NonConvergence
from .numerics import as_mat, eigenvalues, inverse_iteration
from .switch_cert import CERTIFIED, SwitchCertificate

GES, NOT_GES, INCONCLUSIVE = "GES", "NotGES", "Inconclusive"
VALID, INVALID = "Valid", "Invalid"

SCHUR_TOL = 1e-9
REAL_TOL = 1e-12
CONE_TOL = 1e-9
SYM_TOL = 1e-10
Y_NEG_TOL = 1e-12
DEF_MARGIN = 1e-9
DEF_FLOOR = 1e-14


@dataclass(frozen=True)
class ModeSpectrum:
    mode: int
    radius: float
    schur: bool


@dataclass(frozen=True)
class Eigenray:
    mode: int
    eigenvalue: float
    ray: np.ndarray


@dataclass
class GesReport:
    switch_bound: Optional[int]
    modes: list
    f_restriction_ges: bool
    tag: str  # AllModesSchur | EigenrayAnalysis | Unknown
    verdict: str
    witness: Optional[Eigenray] = None
    notes: list = field(default_factory=list)

    @property
    def modes_schur(self) -> list:
        return [(m.schur, m.radius) for m in self.modes]


def mode_spectra(sys: ConewiseSystem) -> list:
    out = []
    for i in range(1, sys.m + 1):
        rad = float(np.max(np.abs(eigenvalues(sys.A(i)))))
        out.append(ModeSpectrum(i, rad, rad < 1.0 - SCHUR_TOL))
    return out


def find_eigenray(sys: ConewiseSystem) -> Optional[Eigenray]:
    """A real eigenvalue >= 1 of some A_i whose eigenvector (or its negative) lies in cone i."""
    for i in range(1, sys.m + 1):
        a = sys.A(i)
        scale = max(np.linalg.norm(a), 1.0)
        rows = sys.cone_rows(i)
        rn = np.linalg.norm(rows, axis=1)
        for lam in eigenvalues(a):
            if abs(lam.imag) > REAL_TOL * scale or lam.real < 1.0:
                continue
            try:
                v = inverse_iteration(a, lam.real)
            except NonConvergence:
                continue
            for ray in (v, -v):
                if np.all(rows @ ray >= -CONE_TOL * rn):
                    return Eigenray(i, float(lam.real), ray)
    return None


def certify_ges(sys: ConewiseSystem, cert: Optional[SwitchCertificate]) -> GesReport:
    """Combine a switch certificate with the mode spectra into a GES verdict.

    `cert` may be any object with `verdict` and `bound`, such as a summary
    read back from a report file.
    """
    bound = cert.bound if cert is not None and cert.verdict == CERTIFIED else None
    modes = mode_spectra(sys)
    notes = []
    if cert is not None and bound is None:
        notes.append(f"switch certificate is {cert.verdict}: {getattr(cert, 'statement', 'no finite bound')}")
    ray = find_eigenray(sys)
    if ray is not None:
        return GesReport(bound, modes, False, "EigenrayAnalysis", NOT_GES, ray,
                         notes + [f"A{ray.mode} keeps the ray with eigenvalue {ray.eigenvalue:.6g} inside its cone"])
    if all(m.schur for m in modes):
        verdict = GES if bound is not None else INCONCLUSIVE
        return GesReport(bound, modes, True, "AllModesSchur", verdict, None, notes)
    notes.append("some mode is not Schur and no eigenray witness was found")
    return GesReport(bound, modes, False, "Unknown", INCONCLUSIVE, None, notes)


# ---------------------------------------------------------------------------
# piecewise quadratic candidates


def _as_y(y) -> np.ndarray:
    """A scalar y stands for the coupling [[0, y], [y, 0]] of the two row constraints."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 0 or arr.size == 1:
        v = float(arr.reshape(-1)[0])
        return np.array([[0.0, v], [v, 0.0]])
    return as_mat(arr, "Y", square=True)


@dataclass(frozen=True)
class PwqCandidate:
    P1: np.ndarray
    P2: np.ndarray
    Y: tuple  # four 2 x 2 matrices

    @classmethod
    def build(cls, P1, P2, Y1, Y2, Y3, Y4):
        return cls(as_mat(P1, "P1", square=True), as_mat(P2, "P2", square=True),
                   tuple(_as_y(y) for y in (Y1, Y2, Y3, Y4)))

    def value(self, sys: ConewiseSystem, x) -> float:
        """V(x) = x' P_i x with i the cone of x (cone 1 on the boundary)."""
        x = np.asarray(x, float)
        p = self.P1 if float(sys.K @ x) >= 0 else self.P2
        return float(x @ p @ x)


@dataclass(frozen=True)
class LmiCheck:
    index: int
    sense: str  # ">0" or "<0"
    extreme: float  # smallest eigenvalue for >0, largest for <0
    margin: float

    @property
    def ok(self) -> bool:
        return self.extreme > self.margin if self.sense == ">0" else self.extreme < -self.margin

    @property
    def residual(self) -> float:
        """How far the check is from passing (<= 0 when it passes)."""
        return self.margin - self.extreme if self.sense == ">0" else self.extreme + self.margin


@dataclass
class PwqResult:
    verdict: str
    checks: list
    reason: str = ""

    @property
    def failed(self) -> list:
        return [c for c in self.checks if not c.ok]


def pwq_matrices(sys: ConewiseSystem, cand: PwqCandidate) -> list:
    """The six symmetric matrices whose sign pattern certifies the candidate."""
    k = sys.K.reshape(1, -1)
    a1, a2 = sys.A(1), sys.A(2)
    p1, p2 = cand.P1, cand.P2
    y1, y2, y3, y4 = cand.Y
    g1 = np.vstack([k, k @ a1])
    g2 = np.vstack([k, k @ a2])
    g3 = np.vstack([-k, k @ a2])
    g4 = np.vstack([k, -k @ a1])
    mats = [
        (p1 - g1.T @ y1 @ g1, ">0"),
        (a1.T @ p1 @ a1 - p1 + g1.T @ y1 @ g1, "<0"),
        (p2 - g2.T @ y2 @ g2, ">0"),
        (a2.T @ p2 @ a2 - p2 + g2.T @ y2 @ g2, "<0"),
        (a2.T @ p1 @ a2 - p2 + g3.T @ y3 @ g3, "<0"),
        (a1.T @ p2 @ a1 - p1 + g4.T @ y4 @ g4, "<0"),
    ]
    return [(0.5 * (m + m.T), s) for m, s in mats]


def verify_pwq(sys: ConewiseSystem, cand: PwqCandidate) -> PwqResult:
    """Check the six matrix inequalities; Valid when all hold with margin."""
    if not sys.is_two_cone:
        raise DimensionMismatch("piecewise quadratic check needs a two-cone system")
    n = sys.n
    if cand.P1.shape != (n, n) or cand.P2.shape != (n, n):
        raise DimensionMismatch(f"P1, P2 must be {n} x {n}")
    if any(y.shape != (2, 2) for y in cand.Y):
        raise DimensionMismatch("Y1..Y4 must be 2 x 2 (or scalars)")
    for name, m in [("P1", cand.P1), ("P2", cand.P2)] + [(f"Y{i + 1}", y) for i, y in enumerate(cand.Y)]:
        asym = float(np.max(np.abs(m - m.T)))
        if asym > SYM_TOL * max(1.0, float(np.max(np.abs(m)))):
            return PwqResult(INVALID, [], f"{name} is not symmetric (max asymmetry {asym:.3e})")
    for i, y in enumerate(cand.Y, start=1):
        low = float(np.min(y))
        if low < -Y_NEG_TOL:
            return PwqResult(INVALID, [], f"Y{i} has a negative entry ({low:.6g})")
    checks = []
    for idx, (m, sense) in enumerate(pwq_matrices(sys, cand), start=1):
        ev = np.linalg.eigvalsh(m)
        margin = DEF_MARGIN * float(np.linalg.norm(m)) + DEF_FLOOR
        checks.append(LmiCheck(idx, sense, float(ev[0] if sense == ">0" else ev[-1]), margin))
    bad = [c for c in checks if not c.ok]
    if bad:
        worst = max(bad, key=lambda c: c.residual)
        return PwqResult(INVALID, checks,
                         f"inequality {worst.index} fails ({worst.sense}, residual {worst.residual:.6g})")
    return PwqResult(VALID, checks, "all six inequalities hold")
