"""Position-dependent-mass Lienard systems and nonlocal point transformations.

A :class:`PdmSystem` bundles a mass profile ``m``, potential ``V`` and the
two scaling maps ``f = dtau/dt`` and ``g = (dq/dx)^2``.  Its Lienard
equation

    x'' + (1/2)(m'/m) x'^2 + (f^2/g) V'(x) = 0

maps to ``d^2q/dtau^2 + dV/dq = 0`` under ``q(x) = int sqrt(m) f dx``.
The two oscillator cases (quadratic and Mathews-Lakshmanan) are matched to
the reduced torus equation both by the printed closed forms
(:func:`match_paper`) and by a root-finding oracle (:func:`match_numeric`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, RangeError, SingularityError, UnsupportedParameter
from .numerics import (Trajectory, central_diff, rk4_integrate, rk4_second_order,
                       simpson_to_tolerance)
from .specfun import principal_arccos, principal_sqrt
from .torus import TorusParams

CASES = ("quadratic", "ml")


@dataclass(frozen=True)
class PdmSystem:
    m: Callable
    V: Callable
    f: Callable
    g: Callable
    C1: float
    domain: tuple[float, float]
    dm: Callable | None = None
    dV: Callable | None = None
    # q(x_ref) = q_ref anchors the coordinate map
    x_ref: float = 0.0
    q_ref: float = 0.0
    q_map: Callable | None = None
    name: str = "custom"
    # closed-form x''(x, x') for the built-in cases; integrate_lienard uses it
    # instead of assembling the Lienard right-hand side from m, V, f, g
    accel: Callable | None = None

    def contains(self, x) -> bool:
        lo, hi = self.domain
        x = np.asarray(x)
        return bool(np.all((x > lo) & (x < hi)))

    def require(self, x) -> None:
        if not self.contains(x):
            raise DomainError(f"x={x!r} outside the domain {self.domain} of {self.name}", x)

    def mass_slope(self, x):
        if self.dm is not None:
            return self.dm(x)
        return central_diff(self.m, x, 1e-6 * max(1.0, abs(float(x))))

    def force_gradient(self, x):
        if self.dV is not None:
            return self.dV(x)
        return central_diff(self.V, x, 1e-6 * max(1.0, abs(float(x))))


@dataclass(frozen=True)
class QuadraticParams:
    lam: float
    alpha: float
    C1: float
    C2: float = 0.0

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("lambda must be non-zero")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.C1 > 0:
            raise ValueError("C1 must be positive")

    @property
    def domain(self) -> tuple[float, float]:
        edge = -1.0 / self.lam
        return (edge, math.inf) if self.lam > 0 else (-math.inf, edge)


@dataclass(frozen=True)
class MLParams:
    lam: float
    omega: complex
    C1: float
    C2: float = 0.0

    def __post_init__(self):
        if self.lam == 0:
            raise ValueError("lambda must be non-zero")
        if not self.C1 > 0:
            raise ValueError("C1 must be positive")

    @classmethod
    def from_omega2(cls, lam, omega2, C1, C2=0.0) -> "MLParams":
        omega = math.sqrt(omega2) if omega2 >= 0 else 1j * math.sqrt(-omega2)
        return cls(lam, omega, C1, C2)

    @property
    def omega2(self) -> complex:
        return complex(self.omega) ** 2

    def real_omega2(self) -> float:
        w = complex(self.omega)
        if w.real != 0 and w.imag != 0:
            raise UnsupportedParameter(f"omega={w!r} gives a non-real omega^2")
        return w.real ** 2 - w.imag ** 2

    @property
    def domain(self) -> tuple[float, float]:
        if self.lam > 0:
            return (-math.inf, math.inf)
        edge = 1.0 / math.sqrt(-self.lam)
        return (-edge, edge)


@dataclass(frozen=True)
class BranchId:
    case: str
    label: str

    QUADRATIC = ("1", "2", "3", "4")
    ML = ("++", "+-", "-+", "--")

    def __post_init__(self):
        allowed = self.QUADRATIC if self.case == "quadratic" else self.ML
        if self.case not in CASES or self.label not in allowed:
            raise ValueError(f"no branch {self.label!r} for case {self.case!r}")

    @classmethod
    def all_for(cls, case: str) -> list["BranchId"]:
        labels = cls.QUADRATIC if case == "quadratic" else cls.ML
        return [cls(case, lab) for lab in labels]


# --------------------------------------------------------------------------
# generic PDM machinery


def mass_from_fg(g: Callable, f: Callable, C1: float, x_ref: float) -> Callable:
    """Solution of m'/m = g'/g - 2 f'/f normalised to m(x_ref) = C1."""

    def ratio(x):
        gx, fx = g(x), f(x)
        if np.any(np.asarray(fx) == 0):
            raise DomainError(f"f vanishes at x={x!r}", x)
        if np.any(np.asarray(gx) <= 0):
            raise DomainError(f"g is not positive at x={x!r}", x)
        return gx / fx ** 2

    ref = ratio(x_ref)

    def m(x):
        return C1 * ratio(x) / ref

    return m


def consistency_variation(sys: PdmSystem, xs) -> float:
    """Relative spread of m f^2 / g over ``xs`` (zero for a consistent system)."""
    xs = np.asarray(xs, dtype=float)
    k = sys.m(xs) * sys.f(xs) ** 2 / sys.g(xs)
    return float((np.max(k) - np.min(k)) / abs(np.mean(k)))


def lienard_accel(x: float, dx: float, sys: PdmSystem) -> float:
    sys.require(x)
    drift = 0.5 * sys.mass_slope(x) / sys.m(x)
    return float(-drift * dx * dx - sys.f(x) ** 2 / sys.g(x) * sys.force_gradient(x))


def lienard_rhs(sys: PdmSystem) -> Callable:
    m, f, g = sys.m, sys.f, sys.g
    dm = sys.dm or (lambda x: central_diff(m, x, 1e-6 * max(1.0, abs(x))))
    dV = sys.dV or (lambda x: central_diff(sys.V, x, 1e-6 * max(1.0, abs(x))))

    if f is _unit and g is m:
        # f^2/g = 1/m; saves two calls per stage on the hot path
        def rhs(t, y):
            x, v = y
            mx = m(x)
            return (v, -(0.5 * dm(x) * v * v + dV(x)) / mx)

        return rhs

    def rhs(t, y):
        x, v = y
        fx = f(x)
        return (v, -0.5 * dm(x) / m(x) * v * v - fx * fx / g(x) * dV(x))

    return rhs


def case_energy(x, dx, sys: PdmSystem):
    sys.require(x)
    return 0.5 * sys.m(x) * dx ** 2 + sys.V(x)


def integrate_lienard(sys: PdmSystem, x0: float, dx0: float, t1: float,
                      dt: float, t0: float = 0.0) -> Trajectory:
    sys.require(x0)
    if sys.accel is not None:
        traj = rk4_second_order(sys.accel, x0, dx0, t0, t1, dt)
    else:
        traj = rk4_integrate(lienard_rhs(sys), (x0, dx0), t0, t1, dt)
    x, dx = traj.states[:, 0], traj.states[:, 1]
    sys.require(x)
    return traj.with_diagnostics(energy=0.5 * sys.m(x) * dx ** 2 + sys.V(x))


def q_of_x(sys: PdmSystem, x0: float, x: float, tol: float = 1e-10) -> float:
    """int_{x0}^{x} sqrt(m) f dx'."""
    sys.require(x0)
    sys.require(x)
    return simpson_to_tolerance(lambda s: np.sqrt(sys.m(s)) * sys.f(s), x0, x, tol)


def q_along(sys: PdmSystem, xs: np.ndarray) -> np.ndarray:
    if sys.q_map is not None:
        return np.asarray(sys.q_map(xs), dtype=float)
    q0 = sys.q_ref + q_of_x(sys, sys.x_ref, float(xs[0]))

    def integrand(s):
        return np.sqrt(sys.m(s)) * sys.f(s)

    mid = 0.5 * (xs[1:] + xs[:-1])
    ends = integrand(xs)
    pieces = (xs[1:] - xs[:-1]) / 6.0 * (ends[:-1] + 4.0 * integrand(mid) + ends[1:])
    return q0 + np.concatenate(([0.0], np.cumsum(pieces)))


def tau_of_t(traj: Trajectory, f: Callable) -> np.ndarray:
    """Cumulative trapezoid of f(x(t)) dt with tau(t0) = 0."""
    t = traj.times
    fx = np.broadcast_to(np.asarray(f(traj.states[:, 0]), dtype=float), t.shape)
    return np.concatenate(([0.0], np.cumsum(np.diff(t) * 0.5 * (fx[1:] + fx[:-1]))))


def pullback_residual(traj: Trajectory, sys: PdmSystem, V_of_q: Callable,
                      trim: float = 0.05, n_resample: int | None = None,
                      dV_of_q: Callable | None = None) -> float:
    """Max interior |d^2q/dtau^2 + dV/dq| along a Lienard trajectory.

    q(tau) is resampled on a uniform tau grid by a natural cubic spline and
    differentiated with the three-point stencil.  ``trim`` is the fraction
    of the tau range discarded at each end.
    """
    x = traj.states[:, 0]
    q = q_along(sys, x)
    tau = tau_of_t(traj, sys.f)
    steps = np.diff(tau)
    if np.all(steps < 0):
        tau = -tau
    elif not np.all(steps > 0):
        raise DomainError("tau is not strictly monotone along the trajectory")
    n = n_resample or tau.size
    grid = np.linspace(tau[0], tau[-1], n)
    h = grid[1] - grid[0]
    qs = CubicSpline(tau, q, bc_type="natural")(grid)
    qdd = (qs[2:] - 2.0 * qs[1:-1] + qs[:-2]) / (h * h)
    qi = qs[1:-1]
    if dV_of_q is None:
        step = 1e-4 * np.maximum(1.0, np.abs(qi))
        force = (V_of_q(qi + step) - V_of_q(qi - step)) / (2.0 * step)
    else:
        force = dV_of_q(qi)
    span = grid[-1] - grid[0]
    keep = (grid[1:-1] >= grid[0] + trim * span) & (grid[1:-1] <= grid[-1] - trim * span)
    return float(np.max(np.abs(qdd + force)[keep]))


# --------------------------------------------------------------------------
# the two oscillator cases


def _quadratic_parts(p: QuadraticParams):
    lam, al, C1, C2 = p.lam, p.alpha, p.C1, p.C2
    k = C1 * al * al / (2.0 * lam * lam)

    def m(x):
        return C1 / (1.0 + lam * x) ** 4

    def dm(x):
        return -4.0 * lam * C1 / (1.0 + lam * x) ** 5

    def V(x):
        s = 1.0 + lam * x
        return C2 - k * (1.0 + 2.0 * lam * x) / (s * s)

    def dV(x):
        return C1 * al * al * x / (1.0 + lam * x) ** 3

    return m, dm, V, dV


def _ml_parts(p: MLParams):
    lam, C1, C2 = p.lam, p.C1, p.C2
    w2 = p.real_omega2()

    def m(x):
        return C1 / (1.0 + lam * x * x)

    def dm(x):
        u = 1.0 + lam * x * x
        return -2.0 * lam * C1 * x / (u * u)

    def V(x):
        return -C1 * w2 / (2.0 * lam * (1.0 + lam * x * x)) + C2

    def dV(x):
        u = 1.0 + lam * x * x
        return C1 * w2 * x / (u * u)

    return m, dm, V, dV


def _unit(x):
    return x * 0.0 + 1.0


def quadratic_system(p: QuadraticParams) -> PdmSystem:
    """Quadratic oscillator in the gauge f = 1, g = m."""
    m, dm, V, dV = _quadratic_parts(p)
    lam, a2 = p.lam, p.alpha ** 2

    def accel(x, v):
        s = 1.0 + lam * x
        return 2.0 * lam * v * v / s - a2 * x * s

    return PdmSystem(m=m, V=V, f=_unit, g=m, C1=p.C1, domain=p.domain, dm=dm,
                     dV=dV, name="quadratic", accel=accel)


def ml_system(p: MLParams) -> PdmSystem:
    """Mathews-Lakshmanan oscillator in the gauge f = 1, g = m."""
    m, dm, V, dV = _ml_parts(p)
    lam, w2 = p.lam, p.real_omega2()

    def accel(x, v):
        u = 1.0 + lam * x * x
        return (lam * v * v - w2) * x / u

    return PdmSystem(m=m, V=V, f=_unit, g=m, C1=p.C1, domain=p.domain, dm=dm,
                     dV=dV, name="ml", accel=accel)


def system_for(case: str, params) -> PdmSystem:
    if case == "quadratic":
        return quadratic_system(params)
    if case == "ml":
        return ml_system(params)
    raise ValueError(f"unknown case {case!r}")


def quadratic_rhs_direct(x, dx, p: QuadraticParams):
    """Right-hand side of x'' = 2 lam x'^2/(1+lam x) - alpha^2 x (1+lam x)."""
    s = 1.0 + p.lam * x
    return 2.0 * p.lam * dx * dx / s - p.alpha ** 2 * x * s


def ml_rhs_direct(x, dx, p: MLParams):
    u = 1.0 + p.lam * x * x
    return p.lam * x * dx * dx / u - p.real_omega2() * x / u


def potential_in_q(case: str, params) -> Callable:
    """V expressed in the transformed coordinate q = int sqrt(m) dx (f = 1,
    q(0) = 0), by composing V with the inverse coordinate map."""
    if case == "quadratic":
        _, _, V, _ = _quadratic_parts(params)
        rc, lam = math.sqrt(params.C1), params.lam

        def x_of_q(q):
            z = q / rc
            return z / (1.0 - lam * z)
    else:
        _, _, V, _ = _ml_parts(params)
        rc, lam = math.sqrt(params.C1), params.lam
        r = math.sqrt(abs(lam))

        def x_of_q(q):
            if lam > 0:
                return np.sinh(r * q / rc) / r
            return np.sin(r * q / rc) / r

    return lambda q: V(x_of_q(q))


# --------------------------------------------------------------------------
# matching to the reduced torus equation


def torus_target_potential(q, torus: TorusParams, q1: float):
    """Potential of the reduced torus equation, additive constant 0."""
    return q1 ** 2 / (2.0 * torus.a ** 2 * torus.rho(q) ** 2)


def torus_target_slope(q, torus: TorusParams, q1: float):
    return q1 ** 2 * np.sin(q) / (torus.a * torus.rho(q) ** 3)


@dataclass(frozen=True)
class PaperMatch:
    q: complex
    f: complex
    m: complex


@dataclass(frozen=True)
class NumericMatch:
    q: float
    dq_dx: float
    f: float
    potential_residual: float
    offset: float


def _finite_or_raise(values, x, what):
    for v in values:
        if not np.isfinite(v):
            raise SingularityError(f"{what} is singular at x={x!r}", x)


def _match_paper_quadratic(x, branch, p: QuadraticParams, torus, q1):
    lam, al, C1 = p.lam, p.alpha, p.C1
    a, c = torus.a, torus.c
    s1 = 1.0 + lam * x
    s2 = 1.0 + 2.0 * lam * x
    if s2 == 0 or s1 == 0:
        raise SingularityError(f"quadratic matching maps are singular at x={x!r}", x)
    with np.errstate(all="ignore"):
        root = principal_sqrt(-a * a * C1 * al * al * s2 / (q1 * q1 * lam * lam * s1 * s1))
        F = -1.0 + 2.0 * c * root
        arg20 = -c / a + (1j * lam * q1 / (al * a * a)) * s1 / principal_sqrt(-C1 * s2)
        arg21 = ((-a * a * c * C1 * al * al * s2 + q1 * q1 * lam * lam * s1 * s1 * root)
                 / (a ** 3 * al * al * (C1 + 2.0 * C1 * lam * x)))
        inner23 = a * a * (a * a - c * c) * C1 * al * al * s2 - q1 * q1 * lam * lam * F
        f23 = (q1 * lam ** 3 * x * s1 ** 4 / (C1 * al * al * s2)) / principal_sqrt(inner23)
        f24 = (a * x * lam * lam * al * al * s1 ** 3
               / principal_sqrt(-a * a * (a * a - c * c) * C1 * al * al * s2
                                - q1 * q1 * lam * lam * s1 * s1 * (F + 2.0)))
        inner25 = -c / a + (1j * q1 * lam * s1 / (a * a * al)) * principal_sqrt(-C1 * s2)
        m25 = (C1 * s1 ** 8 / (a ** 4 * s2) / principal_sqrt(inner23)
               / (1.0 - inner25 ** 2))
        label = branch.label
        if label in ("1", "2"):
            sign = 1.0 if label == "1" else -1.0
            q = sign * principal_arccos(arg20)
            f = sign * f23
        else:
            sign = 1.0 if label == "3" else -1.0
            q = sign * principal_arccos(arg21)
            f = -sign * f24
    _finite_or_raise((q, f, m25), x, "quadratic matching")
    return PaperMatch(complex(q), complex(f), complex(m25))


def _match_paper_ml(x, branch, p: MLParams, torus, q1):
    lam, C1 = p.lam, p.C1
    w = complex(p.omega)
    a, c = torus.a, torus.c
    u = 1.0 + lam * x * x
    if u == 0 or w == 0:
        raise SingularityError(f"ML matching maps are singular at x={x!r}", x)
    s_out = 1.0 if branch.label[0] == "+" else -1.0
    s_in = 1.0 if branch.label[1] == "+" else -1.0
    with np.errstate(all="ignore"):
        arg29 = -c / a + s_in * principal_sqrt(lam / C1) * q1 / (a * a * w) * principal_sqrt(u)
        q = s_out * principal_arccos(arg29)
        base = -1.0 / a ** 2 + C1 * w * w * (c * c - a * a) / (q1 * q1 * lam * u)
        inner30 = base + s_in * (2.0 * c / a ** 2) * principal_sqrt(
            -a * a * C1 * w * w / (q1 * q1 * lam * u))
        f = -s_out * lam * x * principal_sqrt(C1 / u) / (C1 * a) / principal_sqrt(inner30)
        num31 = base + (2.0 * c * w / q1) * principal_sqrt(-C1 / (lam * u))
        den31 = 1.0 - (-c / a + (q1 / (a * a * w)) * principal_sqrt(lam * u / C1)) ** 2
        m31 = q1 * q1 * lam / (a * a * w * w) * num31 / den31
    _finite_or_raise((q, f, m31), x, "ML matching")
    return PaperMatch(complex(q), complex(f), complex(m31))


def match_paper(case: str, x: float, branch: BranchId, params, torus: TorusParams,
                q1: float) -> PaperMatch:
    """Closed-form q(x), f(x), m(x) exactly as printed, evaluated in complex
    arithmetic on principal branches.  No typo is corrected here."""
    if branch.case != case:
        raise ValueError("branch belongs to another case")
    if case == "quadratic":
        return _match_paper_quadratic(x, branch, params, torus, q1)
    return _match_paper_ml(x, branch, params, torus, q1)


_Q_LO, _Q_HI = 1e-9, math.pi - 1e-9


def _case_potential(case, params):
    parts = _quadratic_parts(params) if case == "quadratic" else _ml_parts(params)
    return parts[0], parts[2]


def _torus_roots(targets, torus: TorusParams, q1: float) -> np.ndarray:
    """q in (0, pi) with V_torus(q) = target, vectorised bisection + Newton."""
    if q1 == 0:
        raise DomainError("q1 = 0 makes the torus potential constant")
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    vlo = torus_target_potential(_Q_LO, torus, q1)
    vhi = torus_target_potential(_Q_HI, torus, q1)
    bad = (targets < vlo) | (targets > vhi) | ~np.isfinite(targets)
    if np.any(bad):
        raise RangeError(
            f"potential {targets[np.argmax(bad)]!r} outside the attainable "
            f"interval [{vlo!r}, {vhi!r}]", (vlo, vhi))
    lo = np.full(targets.shape, _Q_LO)
    hi = np.full(targets.shape, _Q_HI)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = torus_target_potential(mid, torus, q1) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 2.0 * np.finfo(float).eps * hi):
            break
    q = 0.5 * (lo + hi)
    for _ in range(3):
        slope = torus_target_slope(q, torus, q1)
        step = (torus_target_potential(q, torus, q1) - targets) / slope
        q = np.clip(q - step, lo, hi)
    return q


@dataclass(frozen=True)
class _Matcher:
    case: str
    params: object
    torus: TorusParams
    q1: float
    q_seed: float
    x_ref: float = 0.0
    h: float = 1e-5
    offset: float = field(init=False)

    def __post_init__(self):
        if not 0 < self.q_seed < math.pi:
            raise ValueError("q_seed must lie in (0, pi)")
        _, V = _case_potential(self.case, self.params)
        off = float(torus_target_potential(self.q_seed, self.torus, self.q1) - V(self.x_ref))
        object.__setattr__(self, "offset", off)

    def target(self, x):
        _, V = _case_potential(self.case, self.params)
        return V(np.asarray(x, dtype=float)) + self.offset

    def q(self, x):
        x = np.asarray(x, dtype=float)
        return _torus_roots(self.target(x), self.torus, self.q1).reshape(x.shape)

    def dq_dx(self, x):
        x = np.asarray(x, dtype=float)
        return (self.q(x + self.h) - self.q(x - self.h)) / (2.0 * self.h)

    def f(self, x):
        m, _ = _case_potential(self.case, self.params)
        return self.dq_dx(x) / np.sqrt(m(np.asarray(x, dtype=float)))


def match_numeric(case: str, x: float, params, torus: TorusParams, q1: float,
                  q_seed: float = math.pi / 2, x_ref: float = 0.0) -> NumericMatch:
    """Root-finding oracle for the torus matching.

    Solves V_torus(q) = V_case(x) + C for q on (0, pi), where C is fixed so
    that q(x_ref) = q_seed.  dq/dx is a central difference of the root
    curve and f = (dq/dx) / sqrt(m).
    """
    mt = _Matcher(case, params, torus, q1, q_seed, x_ref)
    q = float(mt.q(x))
    resid = abs(float(torus_target_potential(q, torus, q1)) - float(mt.target(x)))
    dq = float(mt.dq_dx(x))
    return NumericMatch(q, dq, float(mt.f(x)), resid, mt.offset)


def matched_system(case: str, params, torus: TorusParams, q1: float,
                   q_seed: float = math.pi / 2, x_ref: float = 0.0) -> PdmSystem:
    """Lienard system whose (q, f) come from the numeric matching oracle, so
    that its pullback obeys the reduced torus equation."""
    mt = _Matcher(case, params, torus, q1, q_seed, x_ref)
    base = system_for(case, params)

    def g(x):
        return mt.dq_dx(x) ** 2

    return PdmSystem(m=base.m, V=mt.target, f=mt.f, g=g, C1=base.C1,
                     domain=base.domain, dm=base.dm, dV=base.dV, x_ref=x_ref,
                     q_ref=q_seed, q_map=mt.q, name=f"{case}-torus")


@dataclass(frozen=True)
class MatchRow:
    x: float
    branch: str
    q: complex
    f: complex
    m: complex
    identity_residual: float
    oracle_q: float
    oracle_f: float
    potential_residual: float
    q_delta: float
    oracle_identity_residual: float
    flag: str


@dataclass(frozen=True)
class MatchReport:
    case: str
    rows: list
    summary: dict


def _q_distance(q_printed: complex, q_num: float) -> float:
    best = math.inf
    for s in (1.0, -1.0):
        for k in (-1, 0, 1):
            best = min(best, abs(s * q_printed + 2.0 * math.pi * k - q_num))
    return best


def compare_match(case: str, xs, params, torus: TorusParams, q1: float,
                  q_seed: float = math.pi / 2, h: float = 1e-5) -> MatchReport:
    """Tabulate every printed branch against the numeric oracle on ``xs``.

    Informational only: failures become flagged rows, never exceptions.
    """
    xs = [float(x) for x in np.asarray(xs, dtype=float)]
    mt = _Matcher(case, params, torus, q1, q_seed)
    m_case, _ = _case_potential(case, params)
    oracle = {}
    for x in xs:
        try:
            q = float(mt.q(x))
            dq = float(mt.dq_dx(x))
            f = dq / math.sqrt(m_case(x))
            pres = abs(float(torus_target_potential(q, torus, q1)) - float(mt.target(x)))
            dq_again = (float(mt.q(x + h)) - float(mt.q(x - h))) / (2.0 * h)
            ident = abs(dq_again - math.sqrt(m_case(x)) * f)
            oracle[x] = (q, f, pres, ident)
        except DomainError:
            oracle[x] = None

    rows = []
    for br in BranchId.all_for(case):
        for x in xs:
            o = oracle[x]
            oq, of, pres, oid = o if o is not None else (math.nan,) * 4
            try:
                pm = match_paper(case, x, br, params, torus, q1)
            except DomainError:
                rows.append(MatchRow(x, br.label, complex(math.nan, math.nan),
                                     complex(math.nan, math.nan),
                                     complex(math.nan, math.nan), math.nan, oq, of,
                                     pres, math.nan, oid, "singular"))
                continue
            try:
                qp = match_paper(case, x + h, br, params, torus, q1).q
                qm = match_paper(case, x - h, br, params, torus, q1).q
                ident = abs((qp - qm) / (2.0 * h) - principal_sqrt(pm.m) * pm.f)
            except DomainError:
                ident = math.nan
            delta = _q_distance(pm.q, oq) if o is not None else math.nan
            if abs(pm.q.imag) > 1e-9 * max(1.0, abs(pm.q)):
                flag = "non-physical branch"
            elif o is None:
                flag = "oracle-out-of-range"
            else:
                flag = "ok"
            rows.append(MatchRow(x, br.label, pm.q, pm.f, pm.m, float(ident), oq, of,
                                 pres, float(delta), oid, flag))

    summary = {"branches": {}}
    for br in BranchId.all_for(case):
        mine = [r for r in rows if r.branch == br.label]
        deltas = [r.q_delta for r in mine if np.isfinite(r.q_delta)]
        idents = [r.identity_residual for r in mine if np.isfinite(r.identity_residual)]
        summary["branches"][br.label] = {
            "median_q_delta": float(np.median(deltas)) if deltas else math.nan,
            "max_identity_residual": float(np.max(idents)) if idents else math.nan,
            "non_physical_rows": sum(r.flag == "non-physical branch" for r in mine),
        }
    ranked = [(v["median_q_delta"], k) for k, v in summary["branches"].items()
              if np.isfinite(v["median_q_delta"])]
    summary["best_branch"] = min(ranked)[1] if ranked else None
    pres = [o[2] for o in oracle.values() if o is not None]
    oid = [o[3] for o in oracle.values() if o is not None]
    summary["oracle_max_potential_residual"] = float(max(pres)) if pres else math.nan
    summary["oracle_max_identity_residual"] = float(max(oid)) if oid else math.nan
    summary["offset"] = mt.offset
    return MatchReport(case, rows, summary)
