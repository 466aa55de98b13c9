"""Geodesic motion on a ring torus with metric
(c + a cos v)^2 du^2 + a^2 dv^2, its constants of motion, the reduced
radial equation and the empirical check of which radial constant is
actually conserved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .numerics import Trajectory, rk4_integrate


class Convention(str, Enum):
    # printed:  dv^2 = q1^2 / (a^2 rho^2) + q2
    PAPER = "paper"
    # conserved: dv^2 = q2 - q1^2 / (a^2 rho^2)
    ENERGY = "energy"


@dataclass(frozen=True)
class TorusParams:
    a: float
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.c)):
            raise ValueError("torus radii must be finite")
        if not self.a > 0:
            raise ValueError("minor radius a must be positive")
        if not self.c > self.a:
            raise ValueError("ring torus requires c > a")

    def rho(self, v):
        """Distance to the symmetry axis, c + a cos v."""
        return self.c + self.a * np.cos(v)


@dataclass(frozen=True)
class FullState:
    u: float
    v: float
    du: float
    dv: float

    def as_tuple(self):
        return (self.u, self.v, self.du, self.dv)


@dataclass(frozen=True)
class MotionConstants:
    q1: float
    q2: float
    convention: Convention


@dataclass(frozen=True)
class SignVerdict:
    plus_drift: float
    minus_drift: float
    conserved: str  # "energy", "paper" or "inconclusive"
    eq9_residual: float
    note: str


def metric_coefficient(v, p: TorusParams):
    return p.rho(v) ** 2


def lagrangian_value(s: FullState, p: TorusParams) -> float:
    return float(p.rho(s.v) ** 2 * s.du ** 2 + p.a ** 2 * s.dv ** 2)


def full_accel(s: FullState, p: TorusParams) -> tuple[float, float]:
    a = p.a
    rho = p.c + a * math.cos(s.v)
    sv = math.sin(s.v)
    ddu = 2.0 * a * sv * s.du * s.dv / rho
    ddv = -rho * sv * s.du ** 2 / a
    return ddu, ddv


def q1_of(s: FullState, p: TorusParams) -> float:
    return float(s.du * p.rho(s.v) ** 2)


def _q2(dv, v, q1, p: TorusParams, convention):
    centrifugal = q1 ** 2 / (p.a ** 2 * p.rho(v) ** 2)
    if Convention(convention) is Convention.ENERGY:
        return dv ** 2 + centrifugal
    return dv ** 2 - centrifugal


def q2_of(s: FullState, p: TorusParams, convention=Convention.ENERGY) -> float:
    return float(_q2(s.dv, s.v, q1_of(s, p), p, convention))


def constants_of(s: FullState, p: TorusParams,
                 convention=Convention.ENERGY) -> MotionConstants:
    conv = Convention(convention)
    return MotionConstants(q1_of(s, p), q2_of(s, p, conv), conv)


def reduced_accel(v, q1: float, p: TorusParams):
    return -(q1 ** 2 / p.a) * np.sin(v) / p.rho(v) ** 3


def integrate_full(s0: FullState, p: TorusParams, t1: float, dt: float,
                   t0: float = 0.0) -> Trajectory:
    a, c = p.a, p.c
    sin, cos = math.sin, math.cos

    def rhs(t, y):
        _, v, du, dv = y
        rho = c + a * cos(v)
        sv = sin(v)
        return (du, dv, 2.0 * a * sv * du * dv / rho, -rho * sv * du * du / a)

    traj = rk4_integrate(rhs, s0.as_tuple(), t0, t1, dt)
    v, du, dv = traj.states[:, 1], traj.states[:, 2], traj.states[:, 3]
    q1 = du * p.rho(v) ** 2
    return Trajectory(
        traj.times, traj.states,
        {
            "q1": q1,
            "q2_energy": _q2(dv, v, q1, p, Convention.ENERGY),
            "q2_paper": _q2(dv, v, q1, p, Convention.PAPER),
            "lagrangian": p.rho(v) ** 2 * du ** 2 + a ** 2 * dv ** 2,
        },
        {"model": "torus-full", "a": a, "c": c},
    )


def integrate_reduced(v0: float, dv0: float, q1: float, p: TorusParams,
                      t1: float, dt: float, t0: float = 0.0) -> Trajectory:
    a, c = p.a, p.c
    k = q1 * q1 / a
    sin, cos = math.sin, math.cos

    def rhs(t, y):
        v, dv = y
        rho = c + a * cos(v)
        return (dv, -k * sin(v) / (rho * rho * rho))

    traj = rk4_integrate(rhs, (v0, dv0), t0, t1, dt)
    v, dv = traj.states[:, 0], traj.states[:, 1]
    return Trajectory(
        traj.times, traj.states,
        {"q2_energy": _q2(dv, v, q1, p, Convention.ENERGY)},
        {"model": "torus-reduced", "a": a, "c": c, "q1": q1},
    )


def _peak_to_peak(x: np.ndarray) -> float:
    return float(np.max(x) - np.min(x))


def sign_audit(traj: Trajectory, conserved_tol: float = 1e-6,
               violated_tol: float = 1e-3) -> SignVerdict:
    """Decide which radial combination is a constant of motion.

    ``traj`` must come from :func:`integrate_full`.  The plus combination
    dv^2 + q1^2/(a^2 rho^2) and the printed minus combination are compared
    by their peak-to-peak variation.  Also reports how far the u-equation
    derived under "q2 = 0 in the printed form" is from the integrated
    u-acceleration.
    """
    plus = _peak_to_peak(traj.diagnostics["q2_energy"])
    minus = _peak_to_peak(traj.diagnostics["q2_paper"])
    if plus <= conserved_tol and minus > violated_tol:
        verdict = "energy"
    elif minus <= conserved_tol and plus > violated_tol:
        verdict = "paper"
    else:
        verdict = "inconclusive"

    eq9 = math.nan
    if traj.meta.get("model") == "torus-full":
        p = TorusParams(traj.meta["a"], traj.meta["c"])
        _, v, du, dv = traj.states.T
        rho = p.rho(v)
        q1 = traj.diagnostics["q1"]
        ddu = 2.0 * p.a * np.sin(v) * du * dv / rho
        eq9 = float(np.max(np.abs(ddu - 2.0 * q1 ** 2 * np.sin(v) / rho ** 4)))
    note = (
        "plus combination conserved; the q2=0 premise of the printed "
        "u-equation cannot hold on a moving trajectory"
        if verdict == "energy" else
        "no single combination singled out"
        if verdict == "inconclusive" else
        "printed minus combination conserved"
    )
    return SignVerdict(plus, minus, verdict, eq9, note)


def relative_drift(series: np.ndarray) -> float:
    ref = abs(series[0])
    scale = ref if ref > 0 else 1.0
    return float(np.max(np.abs(series - series[0])) / scale)
