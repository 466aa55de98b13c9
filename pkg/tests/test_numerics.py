import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import eigh_tridiagonal, eigvalsh

from pdmtorus.errors import DomainError, IntegrationDiverged
from pdmtorus.numerics import (Grid, TridiagSym, central_diff, quadrature,
                               rk4_integrate, rk4_second_order, simpson_to_tolerance,
                               tridiag_eigs)


def test_rk4_growth_and_decay():
    up = rk4_integrate(lambda t, y: (y[0],), (1.0,), 0.0, 1.0, 1e-3)
    down = rk4_integrate(lambda t, y: (-y[0],), (1.0,), 0.0, 1.0, 1e-3)
    assert abs(up.states[-1, 0] - math.e) < 1e-9
    assert abs(down.states[-1, 0] - math.exp(-1.0)) < 1e-9
    assert up.times[-1] == 1.0


def test_rk4_zero_field_is_constant():
    tr = rk4_integrate(lambda t, y: (0.0,), (7.0,), 0.0, 2.0, 0.1)
    assert np.all(tr.states == 7.0)


def test_rk4_last_step_lands_on_t1():
    tr = rk4_integrate(lambda t, y: (1.0, 0.0), (0.0, 0.0), 0.0, 1.05, 0.1)
    assert tr.times[-1] == 1.05
    assert abs(tr.states[-1, 0] - 1.05) < 1e-14


def test_rk4_planar_path_matches_generic():
    def rhs(t, y):
        return (y[1], -math.sin(y[0]))

    def rhs3(t, y):
        return (y[1], -math.sin(y[0]), 0.0)

    a = rk4_integrate(rhs, (1.0, 0.0), 0.0, 5.0, 1e-2)
    b = rk4_integrate(rhs3, (1.0, 0.0, 0.0), 0.0, 5.0, 1e-2)
    assert np.max(np.abs(a.states - b.states[:, :2])) < 1e-13


def test_second_order_stepper_matches_generic():
    a = rk4_second_order(lambda x, v: -math.sin(x) - 0.1 * v, 1.0, 0.0, 0.0, 5.05, 1e-2)
    b = rk4_integrate(lambda t, y: (y[1], -math.sin(y[0]) - 0.1 * y[1], 0.0),
                      (1.0, 0.0, 0.0), 0.0, 5.05, 1e-2)
    assert a.times[-1] == 5.05 and a.times.size == b.times.size
    assert np.max(np.abs(a.states - b.states[:, :2])) < 1e-12
    with pytest.raises(IntegrationDiverged):
        rk4_second_order(lambda x, v: x ** 3, 1.0, 0.0, 0.0, 10.0, 1e-2)


def test_rk4_divergence_raises():
    with pytest.raises(IntegrationDiverged) as info:
        rk4_integrate(lambda t, y: (y[0] ** 2,), (1.0,), 0.0, 2.0, 1e-2)
    assert info.value.last_time < 1.1


def test_quadrature_examples():
    assert abs(quadrature(lambda x: x * x, 0.0, 1.0, 100) - 1 / 3) < 1e-12
    assert quadrature(lambda x: 0.0 * x, 0.0, 1.0, 10) == 0.0
    assert abs(quadrature(np.sin, 0.0, math.pi, 1000) - 2.0) < 1e-10


def test_quadrature_rejects_odd_panels_and_singularities():
    with pytest.raises(ValueError):
        quadrature(np.sin, 0.0, 1.0, 7)
    with pytest.raises(DomainError):
        quadrature(lambda x: 1.0 / x, 0.0, 1.0, 10)


def test_simpson_to_tolerance():
    assert abs(simpson_to_tolerance(lambda x: 1.0 / (1.0 + x * x), 0.0, 1.0) - math.pi / 4) < 1e-10


def test_central_diff_examples():
    assert abs(central_diff(lambda x: x * x, 3.0, 1e-5, 1) - 6.0) < 1e-8
    assert central_diff(lambda x: 5.0, 1.3, 1e-3, 1) == 0.0
    assert abs(central_diff(np.sin, 0.0, 1e-4, 2)) < 1e-8


def test_grid_shapes():
    g = Grid.uniform(-1.0, 1.0, 5)
    assert g.nodes[0] == -1.0 and g.nodes[-1] == 1.0 and g.spacing == 0.5
    p = Grid.periodic_grid(-math.pi, 2 * math.pi, 4)
    assert p.size == 4 and p.periodic and p.hi < math.pi
    with pytest.raises(ValueError):
        Grid(np.array([0.0, 1.0, 1.0]))


def test_laplacian_spectrum():
    n = 50
    m = TridiagSym(np.full(n, 2.0), np.full(n - 1, -1.0))
    got = tridiag_eigs(m, 3).values
    k = np.arange(1, 4)
    assert np.max(np.abs(got - (2 - 2 * np.cos(k * np.pi / 51)))) < 1e-10


def test_diagonal_and_two_by_two():
    d = np.array([3.0, -1.0, 2.0, 0.5])
    m = TridiagSym(d, np.zeros(3))
    assert np.allclose(tridiag_eigs(m, 4).values, np.sort(d), atol=1e-14)
    got = tridiag_eigs(TridiagSym(np.zeros(2), np.ones(1)), 2).values
    assert np.allclose(got, [-1.0, 1.0], atol=1e-14)


def test_k_out_of_range():
    m = TridiagSym(np.ones(3), np.zeros(2))
    with pytest.raises(ValueError):
        tridiag_eigs(m, 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=2, max_value=40), st.integers(min_value=0, max_value=2**31 - 1))
def test_tridiag_matches_lapack(n, seed):
    rng = np.random.default_rng(seed)
    d, e = rng.normal(size=n), rng.normal(size=n - 1)
    k = min(n, 5)
    got = tridiag_eigs(TridiagSym(d, e), k)
    ref = eigh_tridiagonal(d, e, eigvals_only=True)[:k]
    scale = max(1.0, np.max(np.abs(ref)))
    assert np.max(np.abs(got.values - ref)) < 1e-11 * scale
    gram = got.vectors.T @ got.vectors
    norms = np.sqrt(np.diag(gram))
    cos = gram / np.outer(norms, norms)
    assert np.max(np.abs(cos - np.eye(k))) < 1e-8


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=3, max_value=30), st.integers(min_value=0, max_value=2**31 - 1))
def test_cyclic_matches_dense(n, seed):
    rng = np.random.default_rng(seed)
    m = TridiagSym(rng.normal(size=n), rng.normal(size=n - 1), corner=float(rng.normal()),
                   cyclic=True)
    k = min(n, 4)
    got = tridiag_eigs(m, k)
    ref = eigvalsh(m.to_dense())[:k]
    assert np.max(np.abs(got.values - ref)) < 1e-10 * max(1.0, np.max(np.abs(ref)))
    for j in range(k):
        v = got.vectors[:, j]
        assert np.max(np.abs(m.matvec(v) - got.values[j] * v)) < 1e-9 * m.norm_inf()


def test_cyclic_count_with_shift_on_a_pivot():
    # bisection probes sigma == d[0] here, which zeroes the first pivot
    m = TridiagSym(np.array([0.88721519, 0.9955737, 1.7730425]),
                   np.array([1.45950897, 0.09798775]), corner=0.3480019882829664, cyclic=True)
    got = tridiag_eigs(m, 3).values
    assert np.max(np.abs(got - eigvalsh(m.to_dense()))) < 1e-12
