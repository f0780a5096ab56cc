"""Conewise linear systems: representation, simulation, switch counting.

A system is a list of mode matrices together with a conic partition.  Two-cone
systems carry a single row K with cone 1 = {Kx >= 0} and cone 2 = {-Kx >= 0};
systems with more cones carry, for each cone, the rows G with G x >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatch, InvalidSystem
from .numerics import as_mat, as_vec, real_spectrum
from .errors import NonConvergence

TOL_BOUNDARY = 1e-9
TOL_CONTINUITY = 1e-9
TOL_REGULAR = 1e-12


@dataclass(frozen=True)
class ConewiseSystem:
    modes: tuple
    K: Optional[np.ndarray] = None
    cones: Optional[tuple] = None
    continuity_tol: float = TOL_CONTINUITY
    name: str = ""

    def __post_init__(self):
        modes = tuple(as_mat(a, f"A{i + 1}", square=True) for i, a in enumerate(self.modes))
        if not modes:
            raise DimensionMismatch("at least one mode is required")
        n = modes[0].shape[0]
        if any(a.shape != (n, n) for a in modes):
            raise DimensionMismatch("mode matrices must share one size")
        object.__setattr__(self, "modes", modes)
        if self.K is not None:
            object.__setattr__(self, "K", as_vec(self.K, "K", n))
            if len(modes) != 2:
                raise DimensionMismatch("a partition row K describes exactly two cones")
        elif self.cones is not None:
            cones = tuple(np.atleast_2d(as_mat(g, f"cone {i + 1}")) for i, g in enumerate(self.cones))
            if len(cones) != len(modes) or any(g.shape[1] != n for g in cones):
                raise DimensionMismatch("one row block per mode, each with n columns")
            object.__setattr__(self, "cones", cones)
        else:
            raise DimensionMismatch("either K or per-cone rows must be given")

    @classmethod
    def two_cone(cls, A1, A2, K, continuity_tol=TOL_CONTINUITY, name=""):
        return cls((A1, A2), K=K, continuity_tol=continuity_tol, name=name)

    @property
    def n(self) -> int:
        return self.modes[0].shape[0]

    @property
    def m(self) -> int:
        return len(self.modes)

    @property
    def is_two_cone(self) -> bool:
        return self.K is not None

    def A(self, i: int) -> np.ndarray:
        """Mode matrix, 1-based like the cone labels."""
        return self.modes[i - 1]

    def cone_rows(self, i: int) -> np.ndarray:
        if self.K is not None:
            return (self.K if i == 1 else -self.K).reshape(1, -1)
        return self.cones[i - 1]


@dataclass(frozen=True)
class Violation:
    assumption: str
    detail: str
    residual: float
    tol: float

    def __str__(self):
        return f"{self.assumption}: {self.detail} (residual {self.residual:.3e} > tol {self.tol:.1e})"


def continuity_residual(sys: ConewiseSystem) -> float:
    """Relative distance of A1 - A2 from the rank-one matrices v K."""
    d = sys.modes[0] - sys.modes[1]
    k = sys.K
    v = d @ k / (k @ k)
    scale = max(np.linalg.norm(sys.modes[0]), np.linalg.norm(sys.modes[1]), 1e-300)
    return float(np.linalg.norm(d - np.outer(v, k)) / scale)


def validate(sys: ConewiseSystem) -> list:
    """Diagnostics for continuity across cone boundaries and invertibility."""
    out = []
    n = sys.n
    if sys.is_two_cone:
        if not np.any(sys.K):
            out.append(Violation("partition", "K is zero, the cones are not proper half-spaces", 0.0, 0.0))
        else:
            res = continuity_residual(sys)
            if res > sys.continuity_tol:
                out.append(Violation("continuity", "A1 - A2 is not of the form v K", res, sys.continuity_tol))
    for i, a in enumerate(sys.modes, start=1):
        det = abs(np.linalg.det(a))
        ref = TOL_REGULAR * np.linalg.norm(a) ** n
        if not det > ref:
            out.append(Violation("regularity", f"A{i} is singular (|det| = {det:.3e})", ref, ref))
    return out


def require_valid(sys: ConewiseSystem):
    bad = validate(sys)
    if bad:
        raise InvalidSystem(bad)


@dataclass
class Trajectory:
    """States x_0..x_H with, per state, the tuple of cones that contain it."""

    states: np.ndarray
    compatible: list
    modes_used: list
    boundary: np.ndarray
    switch_times: list = field(default_factory=list)
    switch_count: int = 0
    assigned: list = field(default_factory=list)

    @property
    def labels(self) -> list:
        """1 or 2 in the interior of a cone, 0 on a boundary band (two cones)."""
        return [c[0] if len(c) == 1 else 0 for c in self.compatible]


def _compatible(sys: ConewiseSystem, x: np.ndarray, tol: float) -> tuple:
    nx = np.linalg.norm(x)
    if sys.is_two_cone:
        s = float(sys.K @ x)
        if s > tol * nx:
            return (1,)
        if s < -tol * nx:
            return (2,)
        return (1, 2)
    hits = tuple(i for i in range(1, sys.m + 1)
                 if np.all(sys.cone_rows(i) @ x >= -tol * nx * np.linalg.norm(sys.cone_rows(i), axis=1)))
    if not hits:
        # numerically outside every cone: take the least violated one
        worst = [np.min(sys.cone_rows(i) @ x) for i in range(1, sys.m + 1)]
        hits = (int(np.argmax(worst)) + 1,)
    return hits


def min_switch_assignment(compatible: Sequence[tuple]):
    """Minimum number of cone changes over label sequences drawn from `compatible`.

    Greedy: keep the current cone while it stays admissible; when it stops,
    jump to the admissible cone that remains admissible longest.  This is
    optimal for covering a sequence by runs.  Returns (count, times, labels).
    """
    T = len(compatible)
    if T == 0:
        return 0, [], []
    sets = [set(c) for c in compatible]
    reach = {}

    def run_end(label, start):
        key = (label, start)
        if key not in reach:
            t = start
            while t < T and label in sets[t]:
                t += 1
            reach[key] = t
        return reach[key]

    labels = []
    times = []
    t = 0
    cur = None
    while t < T:
        if cur is not None and cur in sets[t]:
            end = run_end(cur, t)
        else:
            best = max(sorted(sets[t]), key=lambda c: run_end(c, t))
            if cur is not None:
                times.append(t)
            cur = best
            end = run_end(cur, t)
        labels.extend([cur] * (end - t))
        t = end
    # switch time is reported at the first state strictly outside the old cone
    return len(times), times, labels


def count_switches(traj: Trajectory) -> int:
    return min_switch_assignment(traj.compatible)[0]


def count_switches_bounds(traj: Trajectory):
    """(lower, upper) switch counts: exact minimum and naive first-fit labelling."""
    lo = count_switches(traj)
    hi = 0
    cur = None
    for c in traj.compatible:
        if cur is None or cur not in c:
            if cur is not None:
                hi += 1
            cur = c[0]
    return lo, hi


def simulate(sys: ConewiseSystem, x0, horizon: int, tol_boundary: float = TOL_BOUNDARY,
             check: bool = True) -> Trajectory:
    """Iterate x_{t+1} = A_i x_t with i the cone containing x_t."""
    if check:
        require_valid(sys)
    if horizon < 1:
        raise ValueError("horizon must be positive")
    x = as_vec(x0, "x0", sys.n)
    states = np.empty((horizon + 1, sys.n))
    states[0] = x
    compat = []
    used = []
    cur = None
    for t in range(horizon + 1):
        c = _compatible(sys, x, tol_boundary)
        compat.append(c)
        if len(c) == 1:
            cur = c[0]
        if t == horizon:
            break
        mode = cur if (cur is not None and cur in c) else c[0]
        used.append(mode)
        x = sys.modes[mode - 1] @ x
        states[t + 1] = x
    count, times, labels = min_switch_assignment(compat)
    boundary = np.array([len(c) > 1 for c in compat])
    return Trajectory(states, compat, used, boundary, times, count, labels)


def switch_counts(sys: ConewiseSystem, X0, steps: int, tol_boundary: float = TOL_BOUNDARY,
                  backend=None) -> np.ndarray:
    """Switch counts for many initial states of a two-cone system."""
    if not sys.is_two_cone:
        return np.array([simulate(sys, x, steps, tol_boundary, check=False).switch_count for x in X0])
    return kernels.batch_switch_counts(sys.modes[0], sys.modes[1], sys.K, X0, steps,
                                       tol_boundary, backend=backend)


@dataclass(frozen=True)
class InFResult:
    verdict: str  # "Yes" | "No" | "Inconclusive"
    mode: Optional[int]
    reason: str

    def __str__(self):
        return self.verdict


def _tail_stays(rows: np.ndarray, a: np.ndarray, y: np.ndarray) -> Optional[bool]:
    """Do rows . A^t y stay >= 0 for every t >= 0?  None when undecided."""
    try:
        spec = real_spectrum(a)
    except NonConvergence:
        return None
    if spec.complex_spectrum or not spec.diagonalizable:
        return None
    lam = spec.real
    v = spec.eigenvectors
    c = np.linalg.solve(v, y)
    scale = max(np.linalg.norm(y), 1e-300)
    for g in rows:
        terms = c * (v.T @ g)
        live = np.abs(terms) > 1e-12 * scale * max(np.linalg.norm(g), 1e-300)
        if not live.any():
            continue
        idx = np.nonzero(live)[0]
        mags = np.abs(lam[idx])
        top = idx[int(np.argmax(mags))]
        others = [j for j in idx if j != top]
        if lam[top] <= 0 or terms[top] <= 0:
            return None
        if any(abs(lam[j]) >= lam[top] for j in others):
            return None
        if sum(abs(terms[j]) for j in others) > terms[top]:
            return None
    return True


def in_F(sys: ConewiseSystem, x, horizon: int, tol_boundary: float = TOL_BOUNDARY) -> InFResult:
    """Is x in the set of states from which some mode never leaves its cone?"""
    x = as_vec(x, "x", sys.n)
    if not np.any(x):
        return InFResult("Yes", 1, "origin")
    exits = 0
    for i in range(1, sys.m + 1):
        a = sys.A(i)
        rows = sys.cone_rows(i)
        y = x.copy()
        left = None
        for t in range(horizon + 1):
            val = rows @ y
            if np.any(val < -tol_boundary * np.linalg.norm(y) * np.linalg.norm(rows, axis=1)):
                left = t
                break
            if t < horizon:
                y = a @ y
        if left is not None:
            exits += 1
            continue
        if _tail_stays(rows, a, y):
            return InFResult("Yes", i, f"mode {i} stays for t <= {horizon} and its dominant eigenmode keeps the sign")
    if exits == sys.m:
        return InFResult("No", None, f"every mode leaves its cone within {horizon} steps")
    return InFResult("Inconclusive", None, "no mode exits within the horizon but no tail certificate")
