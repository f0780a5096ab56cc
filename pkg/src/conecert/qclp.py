"""Positive-input LQR closed loops (quadratic control-Lyapunov policy).

The policy is u = max(0, K x) with K the unconstrained LQR gain; the closed
loop is the two-cone system with A1 = A + B K on {Kx >= 0} and A2 = A on
{Kx <= 0}.  The insulin-infusion plant used throughout the tests is built
here from its transfer-function constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cls import ConewiseSystem, validate
from .errors import InvalidSystem, NotControllable
from .numerics import Discretization, as_mat, as_vec, expm, riccati_residual, solve_dare, zoh_discretize

CTRB_TOL = 1e-10


@dataclass(frozen=True)
class FoodChannel:
    """Third-order disturbance path K_F / ((b1 s + 1)(b2 s + 1)(b3 s + 1)).

    A food impulse of `grams` at t = 0 sets the channel state to grams * Bf;
    the channel output Cf xf adds to the plant output y = Cc x, and the sum
    drives the plant through `entry` (the column of Ac that receives y).
    """

    Af: np.ndarray
    Bf: np.ndarray
    Cf: np.ndarray
    entry: np.ndarray

    @classmethod
    def from_gain_and_lags(cls, gain, lags, entry):
        den = np.array([1.0])
        for b in lags:
            den = np.convolve(den, [float(b), 1.0])
        mon = den / den[0]
        k = len(lags)
        af = np.zeros((k, k))
        af[0, :] = -mon[1:]
        af[1:, :-1] = np.eye(k - 1)
        bf = np.zeros(k)
        bf[0] = 1.0
        cf = np.zeros(k)
        cf[-1] = float(gain) * mon[-1]
        return cls(af, bf, cf, as_vec(entry))


@dataclass(frozen=True)
class Plant:
    Ac: np.ndarray
    Bc: np.ndarray
    Qc: np.ndarray
    Rc: float
    T: float
    Cc: Optional[np.ndarray] = None
    food: Optional[FoodChannel] = None
    input_model: str = "impulse"
    name: str = ""


def insulin_plant(realization: str = "transfer") -> Plant:
    """Sampled-data insulin model: three insulin lags, a first-order output filter.

    realization="transfer" builds Ac at full precision from K_I = 600,
    a = (60, 100, 120) min and tau = 0.015, as a companion form whose
    internal states are scaled by 64 and 128 (the scaling that reproduces the
    published 4-decimal matrix).  realization="printed" uses that 4-decimal
    matrix verbatim.
    """
    k_i, lags, tau = 600.0, (60.0, 100.0, 120.0), 0.015
    den = np.array([1.0])
    for a in lags:
        den = np.convolve(den, [a, 1.0])
    c = den / den[0]
    s1, s2 = 64.0, 128.0
    gain_in = 2.0
    out = k_i * c[3] * s1 * s2 / gain_in
    ac = np.array([
        [-c[1], -c[2] * s1, -c[3] * s1 * s2, 0.0],
        [1.0 / s1, 0.0, 0.0, 0.0],
        [0.0, 1.0 / s2, 0.0, 0.0],
        [0.0, 0.0, -out, -tau],
    ])
    if realization == "printed":
        ac = np.array([
            [-0.0350, -0.0249, -0.0114, 0.0],
            [0.0156, 0.0, 0.0, 0.0],
            [0.0, 0.0078, 0.0, 0.0],
            [0.0, 0.0, -3.4133, -0.0150],
        ])
        out = 3.4133
    elif realization != "transfer":
        raise ValueError(f"unknown realization {realization!r}")
    cc = np.array([0.0, 0.0, -out, 0.0])
    entry = np.array([0.0, 0.0, 0.0, 1.0])
    food = FoodChannel.from_gain_and_lags(50.0, (70.0, 110.0, 125.0), entry)
    return Plant(ac, np.array([gain_in, 0.0, 0.0, 0.0]), np.diag([1.0, 1.0, 1.0, 70.0]), 1.0, 5.0,
                 Cc=cc, food=food, name=f"insulin ({realization})")


@dataclass(frozen=True)
class QclpDesign:
    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    S: np.ndarray
    R: float
    P: np.ndarray
    K: np.ndarray
    closed_loop: ConewiseSystem
    plant: Optional[Plant] = None

    @property
    def riccati_residual(self) -> float:
        res = riccati_residual(self.A, self.B, self.Q, self.S, self.R, self.P)
        return float(np.linalg.norm(res) / np.linalg.norm(self.P))


def controllability_rank(A, B, tol=CTRB_TOL) -> int:
    n = A.shape[0]
    blocks = [B.reshape(n, -1)]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    sv = np.linalg.svd(np.hstack(blocks), compute_uv=False)
    return int(np.sum(sv > tol * sv[0])) if sv[0] > 0 else 0


def design_discrete(disc: Discretization, plant: Optional[Plant] = None) -> QclpDesign:
    A, B, Q, S, R = disc
    if controllability_rank(A, B) < A.shape[0]:
        raise NotControllable("the sampled pair (A, B) is not controllable")
    P, K = solve_dare(A, B, Q, S, R)
    K = np.ravel(K)
    sys = ConewiseSystem.two_cone(A + np.outer(B, K), A, K, name="closed loop")
    bad = validate(sys)
    if bad:
        raise InvalidSystem(bad)
    return QclpDesign(A, B, Q, S, float(R), P, K, sys, plant)


def design(Ac, Bc, Qc, Rc, T, *, Cc=None, food=None, input_model="impulse") -> QclpDesign:
    """Discretize, solve the Riccati equation, and form the two-cone closed loop."""
    plant = Plant(as_mat(Ac, "Ac", square=True), as_vec(Bc, "Bc"), as_mat(Qc, "Qc", square=True),
                  float(Rc), float(T), None if Cc is None else as_vec(Cc, "Cc"), food, input_model)
    return design_plant(plant)


def design_plant(plant: Plant) -> QclpDesign:
    disc = zoh_discretize(plant.Ac, plant.Bc, plant.Qc, plant.Rc, plant.T, plant.input_model)
    return design_discrete(disc, plant)


def policy(d: QclpDesign, x) -> float:
    return max(0.0, float(d.K @ np.asarray(x, float)))


def stage_cost(d: QclpDesign, x, u) -> float:
    x = np.asarray(x, float)
    return float(x @ d.Q @ x + 2.0 * u * (x @ d.S) + d.R * u * u)


def kkt_residuals(d: QclpDesign, x):
    """(u, y, u*y) for the complementarity form of the positive-input argmin."""
    h = d.R + float(d.B @ d.P @ d.B)
    u = policy(d, x)
    y = -h * float(d.K @ x) + h * u
    return u, y, u * y


@dataclass
class Rollout:
    cost: float
    rows: list
    peak_output: Optional[float]
    header: list


@dataclass(frozen=True)
class FoodImpulse:
    grams: float = 60.0


def rollout_cost(d: QclpDesign, x0, horizon: int, disturbance: Optional[FoodImpulse] = None) -> Rollout:
    """Closed-loop cost sum_{t < horizon} l(x_t, u_t) and the trajectory rows.

    With a FoodImpulse the plant is augmented by the food channel, sampled
    with the same period, and the impulse is an initial offset of the
    channel state; the policy still sees only the plant state.
    """
    n = d.A.shape[0]
    x = as_vec(x0, "x0", n)
    plant = d.plant
    cc = None if plant is None else plant.Cc
    if disturbance is not None:
        if plant is None or plant.food is None or cc is None:
            raise ValueError("this design has no food channel")
        f = plant.food
        k = f.Af.shape[0]
        aug = np.zeros((n + k, n + k))
        aug[:n, :n] = plant.Ac
        aug[:n, n:] = np.outer(f.entry, f.Cf)
        aug[n:, n:] = f.Af
        phi = expm(aug * plant.T)
        bu = np.concatenate([d.B, np.zeros(k)])
        z = np.concatenate([x, disturbance.grams * f.Bf])
        cf = f.Cf
    else:
        phi, bu, z, cf, k = None, None, None, None, 0
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + ["u", "y_output", "stage_cost"]
    rows = []
    total = 0.0
    peak = None
    for t in range(horizon + 1):
        xs = z[:n] if z is not None else x
        u = policy(d, xs)
        y = None
        if cc is not None:
            y = float(cc @ xs) + (float(cf @ z[n:]) if z is not None else 0.0)
            peak = y if peak is None else max(peak, y)
        ell = stage_cost(d, xs, u) if t < horizon else 0.0
        rows.append([t] + list(xs) + [u, y if y is not None else float("nan"), ell])
        if t == horizon:
            break
        total += ell
        if z is not None:
            z = phi @ z + bu * u
        else:
            x = d.A @ x + d.B * u
    return Rollout(total, rows, peak, header)
