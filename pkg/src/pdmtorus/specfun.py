"""Hermite and Legendre polynomials with analytic derivatives, and
principal-branch complex elementary functions.

Polynomial routines accept scalars or numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_ORDER = 200


@dataclass(frozen=True)
class PolyEval:
    value: complex | np.ndarray
    d1: complex | np.ndarray
    d2: complex | np.ndarray


def _check_order(n: int, name: str) -> None:
    if int(n) != n or n < 0:
        raise ValueError(f"{name} must be a non-negative integer")
    if n > MAX_ORDER:
        raise OverflowError(f"{name}={n} exceeds the cap of {MAX_ORDER}")


def _hermite_values(n: int, xi):
    """H_0..H_n at ``xi`` by the physicists' recurrence."""
    h_prev = np.ones_like(xi)
    if n == 0:
        return [h_prev]
    out = [h_prev, 2.0 * xi]
    for k in range(1, n):
        out.append(2.0 * xi * out[k] - 2.0 * k * out[k - 1])
    return out


def hermite(n: int, xi) -> PolyEval:
    """Physicists' Hermite polynomial H_n and its first two derivatives."""
    _check_order(n, "n")
    xi = np.asarray(xi, dtype=float)
    hs = _hermite_values(n, xi)
    zero = np.zeros_like(xi)
    d1 = 2.0 * n * hs[n - 1] if n >= 1 else zero
    d2 = 4.0 * n * (n - 1) * hs[n - 2] if n >= 2 else zero
    return PolyEval(hs[n][()], np.asarray(d1)[()], np.asarray(d2)[()])


def _legendre_values(nu: int, z):
    p_prev = np.ones_like(z)
    if nu == 0:
        return [p_prev]
    out = [p_prev, z.copy()]
    for k in range(1, nu):
        out.append(((2 * k + 1) * z * out[k] - k * out[k - 1]) / (k + 1))
    return out


def _legendre_derivs_by_recurrence(nu: int, z):
    """P', P'' from the differentiated three-term recurrence; valid at z=+-1."""
    p = _legendre_values(nu, z)
    dp = [np.zeros_like(z), np.ones_like(z)]
    ddp = [np.zeros_like(z), np.zeros_like(z)]
    for k in range(1, nu):
        dp.append(((2 * k + 1) * (p[k] + z * dp[k]) - k * dp[k - 1]) / (k + 1))
        ddp.append(((2 * k + 1) * (2.0 * dp[k] + z * ddp[k]) - k * ddp[k - 1]) / (k + 1))
    return dp[nu], ddp[nu]


def legendre(nu: int, z) -> PolyEval:
    """Legendre polynomial P_nu at real or complex ``z`` with derivatives.

    P' comes from (z^2-1) P'_nu = nu (z P_nu - P_{nu-1}) and P'' from the
    Legendre equation.  Near z = +-1, where both identities degenerate,
    the differentiated recurrence is used instead.
    """
    _check_order(nu, "nu")
    z = np.asarray(z, dtype=complex)
    ps = _legendre_values(nu, z)
    value = ps[nu]
    if nu == 0:
        zero = np.zeros_like(z)
        return PolyEval(value[()], zero[()], zero[()])
    one_minus = 1.0 - z * z
    near = np.abs(one_minus) < 1e-2
    safe = np.where(near, 1.0, one_minus)
    d1 = nu * (z * value - ps[nu - 1]) / (-safe)
    d2 = (2.0 * z * d1 - nu * (nu + 1) * value) / safe
    if np.any(near):
        rd1, rd2 = _legendre_derivs_by_recurrence(nu, z)
        d1 = np.where(near, rd1, d1)
        d2 = np.where(near, rd2, d2)
    return PolyEval(value[()], d1[()], d2[()])


def _on_cut(w):
    # map a negative zero imaginary part to +0 so branch cuts are approached
    # from the conventional (counter-clockwise) side
    return np.asarray(w, dtype=complex) + 0j


def principal_sqrt(w):
    return np.sqrt(_on_cut(w))[()]


def principal_log(w):
    return np.log(_on_cut(w))[()]


def principal_arccos(w):
    """arccos w = -i log(w + i sqrt(1 - w^2)) on principal branches.

    For real w in [-1, 1] the result is real (zero imaginary part) in [0, pi].
    """
    w = np.asarray(w, dtype=complex)
    root = np.sqrt(_on_cut(1.0 - w * w))
    return (-1j * np.log(_on_cut(w + 1j * root)))[()]
