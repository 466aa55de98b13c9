"""Numerical kernels: fixed-step RK4, Simpson quadrature, central differences
and a bisection / inverse-iteration eigensolver for symmetric tridiagonal
(optionally cyclic) matrices.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import DomainError, IntegrationDiverged, SolverError

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Grid:
    nodes: np.ndarray
    spacing: float | None = None
    periodic: bool = False

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("a grid needs at least 3 nodes")
        steps = np.diff(nodes)
        if not np.all(steps > 0):
            raise ValueError("grid nodes must be strictly increasing")
        if self.spacing is not None:
            tol = 1e-12 * self.spacing + 8.0 * EPS * np.max(np.abs(nodes))
            if np.max(np.abs(steps - self.spacing)) > tol:
                raise ValueError("grid is not uniform at the declared spacing")

    @classmethod
    def uniform(cls, lo: float, hi: float, n: int) -> "Grid":
        """``n`` nodes on [lo, hi], both endpoints included."""
        if n < 3:
            raise ValueError("a grid needs at least 3 nodes")
        h = (hi - lo) / (n - 1)
        nodes = lo + h * np.arange(n)
        nodes[-1] = hi
        return cls(nodes, h)

    @classmethod
    def periodic_grid(cls, lo: float, period: float, n: int) -> "Grid":
        """``n`` nodes covering one period; the node at ``lo + period`` is
        identified with ``lo`` and omitted."""
        if n < 3:
            raise ValueError("a grid needs at least 3 nodes")
        h = period / n
        return cls(lo + h * np.arange(n), h, periodic=True)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        if times.ndim != 1 or states.shape[0] != times.size:
            raise ValueError("one state per time is required")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(states))):
            raise ValueError("trajectory entries must be finite")
        diags = {k: np.asarray(v, dtype=float) for k, v in self.diagnostics.items()}
        for name, series in diags.items():
            if series.shape != times.shape:
                raise ValueError(f"diagnostic {name!r} needs one value per time")
        object.__setattr__(self, "diagnostics", diags)

    def component(self, i: int) -> np.ndarray:
        return self.states[:, i]

    def with_diagnostics(self, **series) -> "Trajectory":
        merged = dict(self.diagnostics)
        merged.update(series)
        return Trajectory(self.times, self.states, merged, dict(self.meta))


def _step_count(t0: float, t1: float, dt: float) -> int:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    span = (t1 - t0) / dt
    nsteps = int(round(span))
    if abs(span - nsteps) > 1e-9 * max(1.0, span):
        nsteps = int(math.ceil(span))
    nsteps = max(nsteps, 1)
    return nsteps


def rk4_integrate(rhs: Callable, y0: Sequence[float], t0: float, t1: float,
                  dt: float) -> Trajectory:
    """Classical fixed-step RK4 from ``t0`` to ``t1``.

    Every step is recorded; the last step is shortened so the final sample
    sits exactly on ``t1``.  ``rhs(t, y)`` receives ``y`` as a tuple of
    floats and must return a sequence of the same length.
    """
    nsteps = _step_count(t0, t1, dt)

    y = tuple(float(v) for v in y0)
    if not math.isfinite(sum(y)):
        raise IntegrationDiverged("initial state is not finite", t0)
    if len(y) == 2:
        return _rk4_planar(rhs, y, t0, t1, dt, nsteps)
    times = [t0]
    states = [y]
    t = t0
    try:
        for i in range(nsteps):
            t_next = t1 if i == nsteps - 1 else t0 + (i + 1) * dt
            h = t_next - t
            h2 = 0.5 * h
            k1 = rhs(t, y)
            k2 = rhs(t + h2, tuple([a + h2 * b for a, b in zip(y, k1)]))
            k3 = rhs(t + h2, tuple([a + h2 * b for a, b in zip(y, k2)]))
            k4 = rhs(t_next, tuple([a + h * b for a, b in zip(y, k3)]))
            h6 = h / 6.0
            y_new = tuple([a + h6 * (b + 2.0 * c + 2.0 * d + e)
                           for a, b, c, d, e in zip(y, k1, k2, k3, k4)])
            if not math.isfinite(sum(y_new)):
                raise IntegrationDiverged(f"non-finite state after t={t!r}", t)
            y = y_new
            t = t_next
            times.append(t)
            states.append(y)
    except OverflowError:
        raise IntegrationDiverged(f"overflow after t={t!r}", t) from None
    return Trajectory(np.array(times), np.array(states))


def _rk4_planar(rhs, y, t0, t1, dt, nsteps):
    # same scheme as rk4_integrate, unrolled for second-order scalar ODEs
    x, v = y
    xs = [x]
    vs = [v]
    times = [t0]
    t = t0
    isfinite = math.isfinite
    try:
        for i in range(nsteps):
            t_next = t1 if i == nsteps - 1 else t0 + (i + 1) * dt
            h = t_next - t
            h2 = 0.5 * h
            a1, b1 = rhs(t, (x, v))
            a2, b2 = rhs(t + h2, (x + h2 * a1, v + h2 * b1))
            a3, b3 = rhs(t + h2, (x + h2 * a2, v + h2 * b2))
            a4, b4 = rhs(t_next, (x + h * a3, v + h * b3))
            h6 = h / 6.0
            xn = x + h6 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            vn = v + h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            if not isfinite(xn + vn):
                raise IntegrationDiverged(f"non-finite state after t={t!r}", t)
            x, v, t = xn, vn, t_next
            xs.append(x)
            vs.append(v)
            times.append(t)
    except OverflowError:
        raise IntegrationDiverged(f"overflow after t={t!r}", t) from None
    return Trajectory(np.array(times), np.column_stack((xs, vs)))


def rk4_second_order(accel: Callable, x0: float, v0: float, t0: float, t1: float,
                     dt: float) -> Trajectory:
    """RK4 for the autonomous equation x'' = accel(x, x').

    Same scheme as :func:`rk4_integrate` on the state (x, x'), with one call
    of ``accel`` per stage; states are columns (x, x').
    """
    nsteps = _step_count(t0, t1, dt)
    x, v = float(x0), float(v0)
    if not math.isfinite(x + v):
        raise IntegrationDiverged("initial state is not finite", t0)
    xs = [x]
    vs = [v]
    isfinite = math.isfinite
    h = dt
    i = 0
    try:
        for i in range(nsteps):
            if i == nsteps - 1:
                h = t1 - (t0 + i * dt)
            h2 = 0.5 * h
            a1 = accel(x, v)
            v2 = v + h2 * a1
            a2 = accel(x + h2 * v, v2)
            v3 = v + h2 * a2
            a3 = accel(x + h2 * v2, v3)
            v4 = v + h * a3
            a4 = accel(x + h * v3, v4)
            h6 = h / 6.0
            x = x + h6 * (v + 2.0 * v2 + 2.0 * v3 + v4)
            v = v + h6 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            if not isfinite(x + v):
                raise IntegrationDiverged(f"non-finite state after t={t0 + i * dt!r}",
                                          t0 + i * dt)
            xs.append(x)
            vs.append(v)
    except OverflowError:
        raise IntegrationDiverged(f"overflow after t={t0 + i * dt!r}", t0 + i * dt) from None
    times = t0 + dt * np.arange(nsteps + 1)
    times[-1] = t1
    return Trajectory(times, np.column_stack((xs, vs)))


def _evaluate(fn, xs: np.ndarray) -> np.ndarray:
    """Evaluate ``fn`` on an array, vectorised when ``fn`` allows it."""
    try:
        with np.errstate(all="ignore"):
            vals = np.asarray(fn(xs))
        if vals.shape != xs.shape:
            vals = np.broadcast_to(vals, xs.shape)
        return np.array(vals)
    except (TypeError, ValueError):
        return np.array([fn(float(x)) for x in xs])


def quadrature(fn: Callable, a: float, b: float, n: int) -> float:
    """Composite Simpson rule with ``n`` (even) panels."""
    if n < 2 or n % 2:
        raise ValueError("Simpson quadrature needs an even n >= 2")
    xs = np.linspace(a, b, n + 1)
    vals = _evaluate(fn, xs)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        x_bad = float(xs[np.argmax(bad)])
        raise DomainError(f"integrand not finite at x={x_bad!r}", x_bad)
    h = (b - a) / n
    return float(h / 3.0 * (vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum()
                            + 2.0 * vals[2:-1:2].sum()))


def simpson_to_tolerance(fn: Callable, a: float, b: float, tol: float = 1e-10,
                         n0: int = 16, n_max: int = 2 ** 20) -> float:
    """Simpson with panel doubling until the Richardson error estimate
    drops below ``tol``."""
    if a == b:
        return 0.0
    n = n0
    prev = quadrature(fn, a, b, n)
    while n < n_max:
        n *= 2
        cur = quadrature(fn, a, b, n)
        if abs(cur - prev) <= 15.0 * tol:
            return cur + (cur - prev) / 15.0
        prev = cur
    raise SolverError(f"Simpson did not reach tol={tol} with {n_max} panels")


def central_diff(fn: Callable, x, h: float, order: int = 1):
    """Second-order central difference of order 1 or 2."""
    if not h > 0:
        raise ValueError("h must be positive")
    if order == 1:
        fp, fm = fn(x + h), fn(x - h)
        out = (fp - fm) / (2.0 * h)
    elif order == 2:
        fp, f0, fm = fn(x + h), fn(x), fn(x - h)
        out = (fp - 2.0 * f0 + fm) / (h * h)
    else:
        raise ValueError("order must be 1 or 2")
    if not np.all(np.isfinite(out)):
        raise DomainError(f"non-finite difference quotient near x={x!r}", x)
    return out


# --------------------------------------------------------------------------
# symmetric tridiagonal eigensolver


@dataclass(frozen=True)
class TridiagSym:
    """Symmetric tridiagonal matrix.  With ``cyclic=True`` the ``corner``
    entry couples the first and last rows (periodic stencils)."""

    diag: np.ndarray
    offdiag: np.ndarray
    corner: float = 0.0
    cyclic: bool = False

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)
        if d.ndim != 1 or d.size < 2:
            raise ValueError("need at least a 2x2 matrix")
        if e.shape != (d.size - 1,):
            raise ValueError("offdiag must have length N-1")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))
                and math.isfinite(self.corner)):
            raise ValueError("matrix entries must be finite")
        if self.cyclic and d.size < 3:
            raise ValueError("cyclic matrices need N >= 3")

    @property
    def size(self) -> int:
        return self.diag.size

    def norm_inf(self) -> float:
        rows = np.abs(self.diag).copy()
        rows[:-1] += np.abs(self.offdiag)
        rows[1:] += np.abs(self.offdiag)
        if self.cyclic:
            rows[0] += abs(self.corner)
            rows[-1] += abs(self.corner)
        return float(rows.max())

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag[:, None] * v if v.ndim == 2 else self.diag * v
        e = self.offdiag if v.ndim == 1 else self.offdiag[:, None]
        out[:-1] += e * v[1:]
        out[1:] += e * v[:-1]
        if self.cyclic:
            out[0] += self.corner * v[-1]
            out[-1] += self.corner * v[0]
        return out

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        if self.cyclic:
            m[0, -1] += self.corner
            m[-1, 0] += self.corner
        return m

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros_like(self.diag)
        r[:-1] += np.abs(self.offdiag)
        r[1:] += np.abs(self.offdiag)
        if self.cyclic:
            r[0] += abs(self.corner)
            r[-1] += abs(self.corner)
        return float(np.min(self.diag - r)), float(np.max(self.diag + r))


@dataclass(frozen=True)
class TridiagEigs:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray


class _SturmCounter:
    """Counts eigenvalues below a shift from the LDL^T pivot signs.

    For a cyclic matrix the last row is eliminated against the leading
    tridiagonal block and its Schur complement supplies one extra sign
    (Haynsworth inertia additivity).
    """

    def __init__(self, m: TridiagSym):
        self.d = m.diag.tolist()
        self.e = m.offdiag.tolist()
        self.e2 = (m.offdiag ** 2).tolist()
        self.cyclic = m.cyclic
        self.corner = m.corner
        scale = max(1.0, max(self.e2) if self.e2 else 1.0)
        self.pivmin = 1e-300 * scale
        self.scale = m.norm_inf() or 1.0

    def __call__(self, sigma: float) -> int:
        d, e2, pivmin = self.d, self.e2, self.pivmin
        n = len(d)
        if not self.cyclic:
            count = 0
            q = d[0] - sigma
            if abs(q) < pivmin:
                q = -pivmin
            if q < 0.0:
                count += 1
            for i in range(1, n):
                q = d[i] - sigma - e2[i - 1] / q
                if abs(q) < pivmin:
                    q = -pivmin
                if q < 0.0:
                    count += 1
            return count

        return self._cyclic_count(sigma, 0)

    def _cyclic_count(self, sigma: float, depth: int) -> int:
        # A vanishing pivot would blow up the coupling r to the last row, so
        # instead of the -pivmin substitution the shift is nudged by a few ulps.
        d, e, e2 = self.d, self.e, self.e2
        n = len(d)
        nl = n - 1
        tiny = 64.0 * EPS * self.scale
        nudged = sigma + tiny
        if depth > 8:
            raise SolverError(f"Sturm count undefined near shift {sigma!r}")
        count = 0
        q = d[0] - sigma
        if abs(q) < tiny:
            return self._cyclic_count(nudged, depth + 1)
        if q < 0.0:
            count += 1
        r = self.corner
        if nl == 1:
            r = r + e[0]
        schur = r * r / q
        for i in range(1, nl):
            r = -(e[i - 1] / q) * r
            q = d[i] - sigma - e2[i - 1] / q
            if abs(q) < tiny:
                return self._cyclic_count(nudged, depth + 1)
            if q < 0.0:
                count += 1
            if i == nl - 1:
                r = r + e[nl - 1]
            schur += r * r / q
        s = d[n - 1] - sigma - schur
        if not math.isfinite(s):
            return self._cyclic_count(nudged, depth + 1)
        if s < 0.0:
            count += 1
        return count


def _bisect_eigenvalues(m: TridiagSym, k: int) -> np.ndarray:
    count = _SturmCounter(m)
    lo0, hi0 = m.gershgorin()
    pad = 2.0 * EPS * max(abs(lo0), abs(hi0), 1.0)
    lo0 -= pad
    hi0 += pad
    probes = [(lo0, 0), (hi0, m.size)]
    values = np.empty(k)
    for j in range(k):
        lo = max(s for s, c in probes if c <= j)
        hi = min(s for s, c in probes if c > j)
        for it in range(400):
            if hi - lo <= 4.0 * EPS * max(abs(lo), abs(hi)) or hi - lo <= 1e-300:
                break
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            c = count(mid)
            probes.append((mid, c))
            if c > j:
                hi = mid
            else:
                lo = mid
        else:
            raise SolverError("bisection did not converge", j)
        values[j] = 0.5 * (lo + hi)
    return values


def _shifted_solver(m: TridiagSym, sigma: float):
    n = m.size
    if not m.cyclic:
        ab = np.zeros((3, n))
        ab[0, 1:] = m.offdiag
        ab[1] = m.diag - sigma
        ab[2, :-1] = m.offdiag

        def solve(b):
            return scipy.linalg.solve_banded((1, 1), ab, b, check_finite=False)

        solve(np.ones(n))
        return solve
    a = scipy.sparse.diags([m.offdiag, m.diag - sigma, m.offdiag], [-1, 0, 1],
                           format="lil")
    a[0, n - 1] += m.corner
    a[n - 1, 0] += m.corner
    lu = scipy.sparse.linalg.splu(a.tocsc())
    return lu.solve


def tridiag_eigs(m: TridiagSym, k: int, max_iter: int = 8) -> TridiagEigs:
    """The ``k`` smallest eigenpairs of ``m``.

    Eigenvalues come from Sturm-sequence bisection, eigenvectors from
    inverse iteration with re-orthogonalisation inside clusters.  Vectors
    are scaled to max-norm 1 with their largest entry positive.
    """
    n = m.size
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}]")
    values = _bisect_eigenvalues(m, k)
    norm = m.norm_inf()
    tol = 1e-10 * norm
    cluster_gap = 1e-3 * norm
    rng = np.random.default_rng(20240611)
    vectors = np.empty((n, k))
    residuals = np.empty(k)
    for j, lam in enumerate(values):
        sigma = lam
        solve = None
        for bump in range(6):
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    solve = _shifted_solver(m, sigma)
                break
            except (np.linalg.LinAlgError, RuntimeError):
                sigma = lam + (10.0 ** bump) * EPS * max(norm, 1.0)
        if solve is None:
            raise SolverError("shifted matrix is singular", j)
        cluster = [i for i in range(j) if abs(values[i] - lam) <= cluster_gap]
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)
        res = math.inf
        for _ in range(max_iter):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                x = solve(x)
            for i in cluster:
                v = vectors[:, i]
                x -= (v @ x) / (v @ v) * v
            nrm = np.linalg.norm(x)
            if not np.isfinite(nrm) or nrm == 0.0:
                raise SolverError("inverse iteration broke down", j)
            x /= nrm
            xm = x / np.max(np.abs(x))
            res = float(np.max(np.abs(m.matvec(xm) - lam * xm)))
            if res <= 1e-13 * norm:
                break
        if res > tol:
            raise SolverError(f"eigenvector residual {res:.3e} exceeds {tol:.3e}", j)
        x = x / np.max(np.abs(x))
        if x[np.argmax(np.abs(x))] < 0:
            x = -x
        vectors[:, j] = x
        residuals[j] = res
    return TridiagEigs(values, vectors, residuals)

