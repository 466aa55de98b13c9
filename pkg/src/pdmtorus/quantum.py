"""Quantum operators for the torus and the two PDM oscillators, their
closed-form spectra, and a finite-difference eigensolver that arbitrates
between formula variants.

Operators are H = a2 d^2/dx^2 + a1 d/dx + a0 with hbar = 1.  Discretisation
goes through the Sturm-Liouville form H = -(1/w)(p psi')' + a0 so that the
matrix is symmetric after scaling by sqrt(w).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, SolverError
from .numerics import Grid, TridiagSym, tridiag_eigs
from .pdm import MLParams, QuadraticParams
from .specfun import PolyEval, hermite, legendre, principal_sqrt
from .torus import TorusParams

FORMULAS = ("paper", "audited", "direct")


@dataclass(frozen=True)
class Operator1D:
    a2: Callable
    a1: Callable
    a0: Callable
    domain: tuple[float, float]
    boundary: str = "dirichlet"
    period: float | None = None
    da2: Callable | None = None
    name: str = "operator"

    def __post_init__(self):
        lo, hi = self.domain
        if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
            raise ValueError("operator domain must be a finite interval")
        if self.boundary not in ("dirichlet", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.boundary == "periodic" and self.period is None:
            object.__setattr__(self, "period", hi - lo)
        xs = np.linspace(lo, hi, 203)[1:-1]
        a2 = np.asarray(self.a2(xs), dtype=float)
        if not np.all(np.isfinite(a2)) or np.any(a2 >= 0):
            raise ValueError("a2 must be finite and negative on the interior")

    def coefficients(self, x):
        x = np.asarray(x, dtype=float)
        b = np.broadcast_to
        return (b(self.a2(x), x.shape)[()], b(self.a1(x), x.shape)[()],
                b(self.a0(x), x.shape)[()])

    def slope_a2(self, x):
        if self.da2 is not None:
            return self.da2(x)
        x = np.asarray(x, dtype=float)
        h = 1e-6 * np.maximum(1.0, np.abs(x))
        return (self.a2(x + h) - self.a2(x - h)) / (2.0 * h)


@dataclass(frozen=True)
class EigenPair:
    energy: float
    function: np.ndarray | None
    residual: float
    source: str  # numeric, analytic_paper, analytic_audited, analytic_direct


@dataclass(frozen=True)
class SpectrumReport:
    pairs: tuple
    analytic: dict = field(default_factory=dict)
    deltas: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)

    @property
    def energies(self) -> np.ndarray:
        return np.array([p.energy for p in self.pairs])

    def with_analytic(self, source: str, energies) -> "SpectrumReport":
        energies = np.asarray(energies, dtype=float)[: len(self.pairs)]
        analytic = dict(self.analytic)
        deltas = dict(self.deltas)
        analytic[source] = energies
        deltas[source] = np.abs(self.energies[: energies.size] - energies)
        return SpectrumReport(self.pairs, analytic, deltas, dict(self.grid))


# --------------------------------------------------------------------------
# operator builders


def torus_hamiltonian(p: TorusParams, q1: float, q2: float) -> Operator1D:
    a, c = p.a, p.c

    def a2(x):
        return -0.5 / (c + a * np.cos(x)) ** 2

    def da2(x):
        return -a * np.sin(x) / (c + a * np.cos(x)) ** 3

    def a1(x):
        return -0.5 * a * np.sin(x) / (c + a * np.cos(x)) ** 3

    def a0(x):
        return q1 ** 2 / (2.0 * a * a) + 0.5 * q2 * (c + a * np.cos(x)) ** 2

    return Operator1D(a2, a1, a0, (-math.pi, math.pi), "periodic", 2.0 * math.pi,
                      da2, "torus")


def z_of_x(x, lam: float):
    """z = x / (1 + lam x), the antiderivative of (1 + lam x)^-2 with z(0) = 0."""
    s = 1.0 + lam * np.asarray(x, dtype=float)
    if np.any(s == 0):
        raise DomainError(f"z(x) is singular at x = {-1.0 / lam!r}", -1.0 / lam)
    return (np.asarray(x) / s)[()]


def x_of_z(z, lam: float):
    s = 1.0 - lam * np.asarray(z, dtype=float)
    if np.any(s == 0):
        raise DomainError(f"x(z) is singular at z = {1.0 / lam!r}", 1.0 / lam)
    return (np.asarray(z) / s)[()]


def _quadratic_default_domain(p: QuadraticParams) -> tuple[float, float]:
    width = 10.0 / math.sqrt(p.C1 * p.alpha)
    edge = 0.5 / abs(p.lam)
    if p.lam > 0:
        zs = (-width, min(width, edge))
    else:
        zs = (max(-width, -edge), width)
    return (float(x_of_z(zs[0], p.lam)), float(x_of_z(zs[1], p.lam)))


def quadratic_hamiltonian(p: QuadraticParams, domain=None) -> Operator1D:
    """Position-space operator built with the momentum rule
    p -> -i sqrt((1 + lam x)^4 / C1) d/dx."""
    lam, al, C1, C2 = p.lam, p.alpha, p.C1, p.C2

    def a2(x):
        return -(1.0 + lam * x) ** 4 / (2.0 * C1)

    def da2(x):
        return -2.0 * lam * (1.0 + lam * x) ** 3 / C1

    def a1(x):
        return -lam * (1.0 + lam * x) ** 3 / C1

    def a0(x):
        s = 1.0 + lam * x
        return C2 - C1 * al * al * (1.0 + 2.0 * lam * x) / (2.0 * lam * lam * s * s)

    dom = domain or _quadratic_default_domain(p)
    edge = -1.0 / lam
    if not (1.0 + lam * dom[0] > 0 and 1.0 + lam * dom[1] > 0):
        raise DomainError(f"domain {dom!r} must lie on the side of x = {edge!r} "
                          "where 1 + lambda x > 0", edge)
    return Operator1D(a2, a1, a0, tuple(dom), "dirichlet", None, da2, "quadratic-x")


def quadratic_schrodinger_potential(z, p: QuadraticParams, shifted: bool = False):
    """E-independent part of the transformed equation.

    Unshifted: 2 C1 C2 + C1^2 a^2 z^2 + (C1^2 a^2 / lam) z.
    Shifted (argument is zeta = z + 1/(2 lam)):
    2 C1 C2 + C1^2 a^2 zeta^2 - C1^2 a^2 / (4 lam^2).
    """
    lam, al, C1, C2 = p.lam, p.alpha, p.C1, p.C2
    k = C1 * C1 * al * al
    z = np.asarray(z, dtype=float)
    if shifted:
        return (2.0 * C1 * C2 + k * z * z - k / (4.0 * lam * lam))[()]
    return (2.0 * C1 * C2 + k * z * z + k / lam * z)[()]


def quadratic_zeta_hamiltonian(p: QuadraticParams, domain=(-12.0, 12.0)) -> Operator1D:
    """The shifted equation written as H psi = E psi in zeta."""
    C1 = p.C1

    def a2(x):
        return -0.5 / C1 + 0.0 * x

    def a1(x):
        return 0.0 * x

    def a0(x):
        return quadratic_schrodinger_potential(x, p, shifted=True) / (2.0 * C1)

    return Operator1D(a2, a1, a0, tuple(domain), "dirichlet", None,
                      lambda x: 0.0 * x, "quadratic-zeta")


def harmonic_core_operator(p: QuadraticParams, domain=(-12.0, 12.0)) -> Operator1D:
    """-d^2/dzeta^2 + C1^2 alpha^2 zeta^2, eigenvalues C1 alpha (2n + 1)."""
    k = (p.C1 * p.alpha) ** 2
    return Operator1D(lambda x: -1.0 + 0.0 * x, lambda x: 0.0 * x,
                      lambda x: k * x * x, tuple(domain), "dirichlet", None,
                      lambda x: 0.0 * x, "harmonic-core")


def ml_hamiltonian(p: MLParams, domain=(-30.0, 30.0)) -> Operator1D:
    lam, C1, C2 = p.lam, p.C1, p.C2
    w2 = p.real_omega2()
    if lam < 0:
        edge = 1.0 / math.sqrt(-lam)
        lo, hi = domain
        if lo <= -edge or hi >= edge:
            raise DomainError("ML operator needs |x| < 1/sqrt(-lambda)", (lo, hi))

    def a2(x):
        return -(1.0 + lam * x * x) / (2.0 * C1)

    def da2(x):
        return -lam * x / C1

    def a1(x):
        return -lam * x / (2.0 * C1)

    def a0(x):
        return -C1 * w2 / (2.0 * lam * (1.0 + lam * x * x)) + C2

    return Operator1D(a2, a1, a0, tuple(domain), "dirichlet", None, da2, "ml")


# --------------------------------------------------------------------------
# closed-form spectra and eigenfunctions


def quadratic_energy(n: int, p: QuadraticParams, formula: str = "audited") -> float:
    """Quadratic-oscillator level n.

    ``paper``   : alpha (n + 1/2) + 2 C2 - C1 alpha^2 / (4 lam^2), as printed.
    ``audited`` : alpha (n + 1/2) + C2 - C1 alpha^2 / (8 lam^2), the value the
                  shifted harmonic equation actually implies.
    ``direct``  : alpha (n + 1/2) + C2 - C1 alpha^2 / (2 lam^2), obtained by
                  transforming the position-space operator with
                  z = x/(1 + lam x) (oscillator centred at z = 0).
    """
    lam, al, C1, C2 = p.lam, p.alpha, p.C1, p.C2
    base = al * (n + 0.5)
    if formula == "paper":
        return base + 2.0 * C2 - C1 * al * al / (4.0 * lam * lam)
    if formula == "audited":
        return base + C2 - C1 * al * al / (8.0 * lam * lam)
    if formula == "direct":
        return base + C2 - C1 * al * al / (2.0 * lam * lam)
    raise ValueError(f"unknown formula {formula!r}; expected one of {FORMULAS}")


@lru_cache(maxsize=None)
def _hermite_function_peak(n: int) -> float:
    """max over xi of |exp(-xi^2/2) H_n(xi)|."""
    if n == 0:
        return 1.0
    span = math.sqrt(2 * n + 1) + 4.0
    xi = np.linspace(0.0, span, 8001)
    vals = np.abs(np.exp(-0.5 * xi * xi) * hermite(n, xi).value)
    i = int(np.argmax(vals))

    def slope(t):
        h = hermite(n, t)
        return float(h.d1 - t * h.value)

    lo, hi = xi[max(i - 1, 0)], xi[min(i + 1, xi.size - 1)]
    if lo == 0.0 or slope(lo) * slope(hi) > 0:
        t = float(xi[i])
    else:
        t = brentq(slope, lo, hi, xtol=1e-15)
    return float(abs(math.exp(-0.5 * t * t) * hermite(n, t).value))


def quadratic_wavefunction(n: int, z, p: QuadraticParams) -> PolyEval:
    """exp(-xi^2/2) H_n(xi) with xi = sqrt(C1 alpha) (z + 1/(2 lam)),
    scaled to max-norm 1; derivatives are taken in z."""
    s = math.sqrt(p.C1 * p.alpha)
    xi = s * (np.asarray(z, dtype=float) + 0.5 / p.lam)
    h = hermite(n, xi)
    k = 1.0 / _hermite_function_peak(n)
    gauss = k * np.exp(-0.5 * xi * xi)
    value = gauss * h.value
    d1 = gauss * (h.d1 - xi * h.value)
    d2 = gauss * (h.d2 - 2.0 * xi * h.d1 + (xi * xi - 1.0) * h.value)
    return PolyEval(value[()], (s * d1)[()], (s * s * d2)[()])


@dataclass(frozen=True)
class OmegaConstraint:
    plus: complex
    minus: complex
    omega2: float
    degenerate: bool


def ml_omega_constraint(lam: float, C1: float) -> OmegaConstraint:
    """omega = +-i lam / (2 C1), the value that turns the ML equation into
    Legendre's equation."""
    if C1 == 0:
        raise DomainError("C1 must be non-zero")
    w = 1j * lam / (2.0 * C1)
    return OmegaConstraint(w, -w, -(lam * lam) / (4.0 * C1 * C1), lam == 0)


def ml_energy(nu: int, p: MLParams) -> float:
    """E_nu = C2 - lam (2 nu + 1)^2 / (8 C1)."""
    lam, C1, C2 = p.lam, p.C1, p.C2
    e = C2 - lam / (8.0 * C1) * (2 * nu + 1) ** 2
    lhs = nu * (nu + 1) + 0.25
    rhs = 2.0 * C1 * (C2 - e) / lam
    if abs(lhs - rhs) > 1e-12 * max(1.0, abs(lhs)):
        raise SolverError("energy is inconsistent with nu(nu+1) = -1/4 + 2C1(C2-E)/lam")
    return e


def ml_wavefunction(nu: int, x, lam: float) -> PolyEval:
    """(1 + lam x^2)^(1/4) P_nu(-i sqrt(lam) x) with unit prefactor;
    derivatives in x."""
    x = np.asarray(x, dtype=float)
    u = 1.0 + lam * x * x
    if lam < 0 and np.any(u <= 0):
        raise DomainError("ML eigenfunction needs |x| < 1/sqrt(-lambda)")
    kappa = -1j * principal_sqrt(lam)
    leg = legendre(nu, kappa * x)
    s = u ** 0.25
    ds = 0.5 * lam * x * u ** -0.75
    dds = 0.5 * lam * u ** -0.75 - 0.75 * (lam * x) ** 2 * u ** -1.75
    value = s * leg.value
    d1 = ds * leg.value + s * kappa * leg.d1
    d2 = dds * leg.value + 2.0 * ds * kappa * leg.d1 + s * kappa * kappa * leg.d2
    return PolyEval(np.asarray(value)[()], np.asarray(d1)[()], np.asarray(d2)[()])


# --------------------------------------------------------------------------
# symmetrisation and discretisation


@dataclass(frozen=True)
class SturmLiouville:
    """w, p = -a2 w and q = a0 w for an operator; w(x_mid) = 1."""

    op: Operator1D
    x_mid: float

    def log_weight(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        flat = xs.ravel()
        lo = min(flat.min(), self.x_mid)
        hi = max(flat.max(), self.x_mid)
        background = np.linspace(lo, hi, 4097)
        pts = np.unique(np.concatenate((flat, background, [self.x_mid])))
        mids = 0.5 * (pts[1:] + pts[:-1])
        g_pts, g_mid = self._log_slope(pts), self._log_slope(mids)
        pieces = np.diff(pts) / 6.0 * (g_pts[:-1] + 4.0 * g_mid + g_pts[1:])
        cum = np.concatenate(([0.0], np.cumsum(pieces)))
        cum -= cum[np.searchsorted(pts, self.x_mid)]
        return cum[np.searchsorted(pts, flat)].reshape(xs.shape)

    def _log_slope(self, x):
        a2 = np.asarray(self.op.a2(x), dtype=float)
        a1 = np.broadcast_to(np.asarray(self.op.a1(x), dtype=float), x.shape)
        g = (a1 - self.op.slope_a2(x)) / a2
        if not np.all(np.isfinite(g)):
            bad = x[np.argmax(~np.isfinite(g))]
            raise SolverError(f"weight has a non-integrable singularity near x={bad!r}")
        return g

    def weight(self, xs):
        return np.exp(self.log_weight(xs))[()]

    def p(self, xs):
        xs = np.asarray(xs, dtype=float)
        return (-np.asarray(self.op.a2(xs)) * self.weight(xs))[()]

    def q(self, xs):
        xs = np.asarray(xs, dtype=float)
        return (np.broadcast_to(self.op.a0(xs), xs.shape) * self.weight(xs))[()]


def symmetrize(op: Operator1D) -> SturmLiouville:
    """Weight with (ln w)' = (a1 - a2')/a2, normalised at the domain centre."""
    lo, hi = op.domain
    sl = SturmLiouville(op, 0.5 * (lo + hi))
    if op.boundary == "periodic":
        ends = sl.log_weight(np.array([lo, lo + op.period]))
        if abs(ends[1] - ends[0]) > 1e-8:
            raise SolverError("operator admits no periodic symmetrising weight")
    return sl


@dataclass(frozen=True)
class _Discretization:
    matrix: TridiagSym
    x: np.ndarray
    w: np.ndarray
    p_half: np.ndarray
    h: float


def _discretize(op: Operator1D, grid: Grid) -> _Discretization:
    if grid.spacing is None:
        raise ValueError("a uniform grid is required")
    h = grid.spacing
    sl = symmetrize(op)
    if op.boundary == "periodic":
        if not grid.periodic:
            raise ValueError("periodic operator needs a periodic grid")
        x = grid.nodes
        half = x + 0.5 * h
        wx = sl.weight(np.concatenate((x, half)))
        w, w_half = wx[: x.size], wx[x.size:]
        p_half = -np.asarray(op.a2(half)) * w_half
        p_left = np.roll(p_half, 1)
        a0 = np.broadcast_to(op.a0(x), x.shape)
        diag = (p_half + p_left) / (h * h * w) + a0
        off = -p_half / (h * h * np.sqrt(w * np.roll(w, -1)))
        m = TridiagSym(diag, off[:-1], corner=float(off[-1]), cyclic=True)
        return _Discretization(m, x, w, p_half, h)
    x = grid.nodes[1:-1]
    half = grid.nodes[:-1] + 0.5 * h
    wx = sl.weight(np.concatenate((x, half)))
    w, w_half = wx[: x.size], wx[x.size:]
    p_half = -np.asarray(op.a2(half)) * w_half
    a0 = np.broadcast_to(op.a0(x), x.shape)
    diag = (p_half[:-1] + p_half[1:]) / (h * h * w) + a0
    off = -p_half[1:-1] / (h * h * np.sqrt(w[:-1] * w[1:]))
    return _Discretization(TridiagSym(diag, off), x, w, p_half, h)


def _coarse_grid(grid: Grid) -> Grid:
    if grid.periodic:
        n = grid.size // 2
        period = grid.spacing * grid.size
        return Grid.periodic_grid(grid.lo, period, n)
    intervals = (grid.size - 1) // 2
    return Grid.uniform(grid.lo, grid.hi, intervals + 1)


def _lowest(op, grid, k):
    disc = _discretize(op, grid)
    eig = tridiag_eigs(disc.matrix, k)
    return disc, eig


def solve_spectrum(op: Operator1D, grid: Grid, k: int,
                   richardson: bool = True) -> SpectrumReport:
    """The ``k`` lowest eigenpairs of ``op`` by second-order finite differences.

    With ``richardson`` the eigenvalues are extrapolated from ``grid`` and a
    grid with twice the spacing, cancelling the h^2 error term.  Eigenvectors
    always come from ``grid``; they are returned on all its nodes (zero at
    Dirichlet ends) with max-norm 1.
    """
    n_unknown = grid.size if op.boundary == "periodic" else grid.size - 2
    if not 1 <= k <= n_unknown:
        raise ValueError(f"k must lie in [1, {n_unknown}]")
    disc, eig = _lowest(op, grid, k)
    energies = eig.values.copy()
    meta = {"n": grid.size, "lo": grid.lo, "hi": grid.hi, "spacing": grid.spacing,
            "boundary": op.boundary, "richardson": richardson, "operator": op.name}
    if richardson:
        coarse = _coarse_grid(grid)
        _, ceig = _lowest(op, coarse, k)
        r2 = (coarse.spacing / grid.spacing) ** 2
        energies = (r2 * eig.values - ceig.values) / (r2 - 1.0)
        meta["coarse_n"] = coarse.size
        meta["unextrapolated"] = eig.values.tolist()
    norm = disc.matrix.norm_inf()
    pairs = []
    for j in range(k):
        psi = eig.vectors[:, j] / np.sqrt(disc.w)
        if op.boundary == "dirichlet":
            psi = np.concatenate(([0.0], psi, [0.0]))
        psi = psi / np.max(np.abs(psi))
        if psi[np.argmax(np.abs(psi))] < 0:
            psi = -psi
        pairs.append(EigenPair(float(energies[j]), psi.astype(complex),
                               float(eig.residuals[j] / norm), "numeric"))
    return SpectrumReport(tuple(pairs), grid=meta)


def residual(op: Operator1D, psi: Callable, E: float, xs) -> float:
    """max |a2 psi'' + a1 psi' + a0 psi - E psi| / (1 + max |psi|) over ``xs``.

    ``psi(xs)`` must return value and analytic first and second derivatives
    (a :class:`PolyEval`)."""
    xs = np.asarray(xs, dtype=float)
    ev = psi(xs)
    a2, a1, a0 = op.coefficients(xs)
    r = a2 * ev.d2 + a1 * ev.d1 + a0 * ev.value - E * ev.value
    return float(np.max(np.abs(r)) / (1.0 + np.max(np.abs(ev.value))))


def hermiticity_check(op: Operator1D, grid: Grid, symmetrized: bool = True) -> float:
    """Max asymmetry of the sqrt(w)-scaled difference matrix relative to its
    infinity norm.  ``symmetrized=False`` discretises a2, a1 with plain
    central stencils instead (a negative control)."""
    h = grid.spacing
    periodic = op.boundary == "periodic"
    if symmetrized:
        disc = _discretize(op, grid)
        w = disc.w
        p_half = disc.p_half if periodic else disc.p_half[1:-1]
        wn = np.roll(w, -1) if periodic else w[1:]
        wc = w if periodic else w[:-1]
        # operator matrix entries H[i,i+1], H[i+1,i], then similarity scaling
        upper = -p_half / (h * h * wc)
        lower = -p_half / (h * h * wn)
        s_upper = np.sqrt(wc) * upper / np.sqrt(wn)
        s_lower = np.sqrt(wn) * lower / np.sqrt(wc)
        norm = disc.matrix.norm_inf()
    else:
        x = grid.nodes if periodic else grid.nodes[1:-1]
        a2, a1, a0 = op.coefficients(x)
        up = a2 / (h * h) + a1 / (2.0 * h)
        down = a2 / (h * h) - a1 / (2.0 * h)
        if periodic:
            s_upper, s_lower = up, np.roll(down, -1)
        else:
            s_upper, s_lower = up[:-1], down[1:]
        rows = np.abs(-2.0 * a2 / (h * h) + a0) + np.abs(up) + np.abs(down)
        norm = float(np.max(rows))
    return float(np.max(np.abs(s_upper - s_lower)) / norm)


# --------------------------------------------------------------------------
# eigenfunction diagnostics


def sign_changes(psi: np.ndarray, floor: float = 1e-8) -> int:
    v = np.real(np.asarray(psi))
    v = v[np.abs(v) > floor * np.max(np.abs(v))]
    return int(np.count_nonzero(np.sign(v[1:]) != np.sign(v[:-1])))


def parity_error(psi: np.ndarray) -> float:
    """Distance from definite parity for a function on a periodic grid
    symmetric about its midpoint index (node j <-> node N - j)."""
    v = np.real(np.asarray(psi))
    n = v.size
    mirrored = v[(-np.arange(n)) % n]
    scale = np.max(np.abs(v))
    return float(min(np.max(np.abs(mirrored - v)), np.max(np.abs(mirrored + v))) / scale)
