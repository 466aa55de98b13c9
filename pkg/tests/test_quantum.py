import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdmtorus import quantum as qm
from pdmtorus.errors import DomainError, UnsupportedParameter
from pdmtorus.numerics import Grid
from pdmtorus.pdm import MLParams, QuadraticParams
from pdmtorus.torus import TorusParams

T = TorusParams(1.0, 2.0)
Q1 = QuadraticParams(1.0, 1.0, 1.0, 0.0)
ML = MLParams.from_omega2(1.0, -0.25, 1.0, 0.0)


def coeffs(op, x):
    return tuple(float(c) for c in op.coefficients(np.array(x)))


def test_coefficient_examples():
    assert np.allclose(coeffs(qm.torus_hamiltonian(T, 1.0, 0.0), 0.0), (-1 / 18, 0.0, 0.5))
    assert np.allclose(coeffs(qm.quadratic_hamiltonian(Q1), 0.0), (-0.5, -1.0, -0.5))
    assert np.allclose(coeffs(qm.ml_hamiltonian(ML), 0.0), (-0.5, 0.0, 0.125))


def test_torus_a1_parity():
    op = qm.torus_hamiltonian(T, 1.0, 1.0)
    assert op.a1(0.0) == 0.0 and abs(op.a1(math.pi)) < 1e-16
    x = np.linspace(0.1, 3.0, 9)
    assert np.allclose(op.a1(-x), -op.a1(x), atol=1e-16)


def test_asymptotics():
    quad = qm.quadratic_hamiltonian(QuadraticParams(1.0, 1.0, 1.0, 0.3), domain=(0.0, 10.0))
    assert abs(quad.a0(1e7) - 0.3) < 1e-6
    ml = qm.ml_hamiltonian(MLParams.from_omega2(1.0, -0.25, 1.0, 0.3))
    assert abs(ml.a0(1e7) - 0.3) < 1e-12
    with pytest.raises(ValueError):
        qm.quadratic_hamiltonian(Q1, domain=(-2.0, 1.0))
    with pytest.raises(UnsupportedParameter):
        qm.ml_hamiltonian(MLParams(1.0, 1 + 1j, 1.0))
    with pytest.raises(DomainError):
        qm.ml_hamiltonian(MLParams.from_omega2(-1.0, -0.25, 1.0), domain=(-2.0, 2.0))


def test_point_transformation():
    assert qm.z_of_x(0.0, 0.7) == 0.0
    assert qm.z_of_x(1.0, 1.0) == 0.5
    for x in (-0.4, 0.3, 2.0):
        assert abs(qm.x_of_z(qm.z_of_x(x, 1.0), 1.0) - x) < 1e-14
    with pytest.raises(DomainError):
        qm.z_of_x(-1.0, 1.0)


def test_schrodinger_potential():
    assert qm.quadratic_schrodinger_potential(0.0, Q1, shifted=True) == -0.25
    p = QuadraticParams(0.4, 1.3, 0.8, 0.2)
    assert qm.quadratic_schrodinger_potential(0.0, p) == 2 * 0.8 * 0.2
    z = np.linspace(-3, 3, 31)
    a = qm.quadratic_schrodinger_potential(z, p)
    b = qm.quadratic_schrodinger_potential(z + 1 / (2 * p.lam), p, shifted=True)
    assert np.max(np.abs(a - b)) < 1e-12


def test_energy_formulas():
    assert qm.quadratic_energy(0, Q1, "paper") == 0.25
    assert qm.quadratic_energy(0, Q1, "audited") == 0.375
    assert qm.quadratic_energy(0, Q1, "direct") == 0.0
    for f in qm.FORMULAS:
        assert abs(qm.quadratic_energy(4, Q1, f) - qm.quadratic_energy(3, Q1, f) - 1.0) < 1e-15
    with pytest.raises(ValueError):
        qm.quadratic_energy(0, Q1, "other")


def test_quadratic_wavefunction_shape():
    centre = -0.5 / Q1.lam
    g = qm.quadratic_wavefunction(0, centre, Q1)
    assert abs(g.value - 1.0) < 1e-15 and abs(g.d1) < 1e-15
    assert abs(qm.quadratic_wavefunction(1, centre, Q1).value) < 1e-15
    z = np.linspace(-8, 8, 2001)
    for n in range(6):
        peak = np.max(np.abs(qm.quadratic_wavefunction(n, z, Q1).value))
        assert 1.0 - 1e-4 < peak <= 1.0 + 1e-12


def test_harmonic_core_residual():
    zeta = np.linspace(-8.0, 8.0, 801)
    op = qm.harmonic_core_operator(Q1)
    for n in range(6):
        eps = Q1.C1 * Q1.alpha * (2 * n + 1)
        r = qm.residual(op, lambda s: qm.quadratic_wavefunction(n, s - 0.5, Q1), eps, zeta)
        assert r <= 1e-10


def test_omega_constraint():
    w = qm.ml_omega_constraint(1.0, 1.0)
    assert w.plus == 0.5j and w.minus == -0.5j and w.omega2 == -0.25
    assert qm.ml_omega_constraint(0.0, 1.0).degenerate


@given(st.floats(-5, 5).filter(lambda v: abs(v) > 1e-6), st.floats(0.1, 5))
def test_omega_squared_negative(lam, c1):
    assert qm.ml_omega_constraint(lam, c1).omega2 < 0


def test_ml_energies_and_wavefunctions():
    assert [qm.ml_energy(n, ML) for n in range(3)] == [-0.125, -1.125, -3.125]
    assert qm.ml_wavefunction(0, 0.0, 1.0).value == 1.0
    v = qm.ml_wavefunction(1, 1.0, 1.0).value
    assert abs(v - 2 ** 0.25 * (-1j)) < 1e-15
    x = np.linspace(0.1, 4.0, 17)
    for n in range(7):
        a = qm.ml_wavefunction(n, x, 1.0).value
        b = qm.ml_wavefunction(n, -x, 1.0).value
        assert np.max(np.abs(b - (-1) ** n * a)) < 1e-12 * np.max(np.abs(a))


def test_residual_linearity():
    op = qm.ml_hamiltonian(ML, (-5.0, 5.0))
    xs = np.linspace(-5, 5, 1001)
    psi = lambda x: qm.ml_wavefunction(2, x, 1.0)
    e = qm.ml_energy(2, ML)
    assert qm.residual(op, psi, e, xs) <= 1e-10
    big = np.max(np.abs(psi(xs).value))
    assert abs(qm.residual(op, psi, e + 1.0, xs) - big / (1 + big)) < 1e-10


def test_weights_in_closed_form():
    x = np.linspace(-2.5, 2.5, 11)
    cases = [
        (qm.torus_hamiltonian(T, 1.0, 1.0), lambda s: 2.0 + np.cos(s)),
        (qm.quadratic_hamiltonian(QuadraticParams(0.2, 1.0, 1.0)), lambda s: (1 + 0.2 * s) ** -2.0),
        (qm.ml_hamiltonian(ML, (-3.0, 3.0)), lambda s: (1 + s * s) ** -0.5),
    ]
    for op, w in cases:
        sl = qm.symmetrize(op)
        xs = x[(x > op.domain[0]) & (x < op.domain[1])]
        ratio = sl.weight(xs) / w(xs)
        assert np.max(np.abs(ratio / ratio[0] - 1.0)) < 1e-10


def test_oscillator_spectrum():
    op = qm.Operator1D(lambda x: -1.0 + 0 * x, lambda x: 0 * x, lambda x: x * x, (-10.0, 10.0))
    rep = qm.solve_spectrum(op, Grid.uniform(-10, 10, 4001), 3)
    assert abs(rep.energies[0] - 1.0) < 2e-5
    raw = qm.solve_spectrum(op, Grid.uniform(-10, 10, 4001), 3, richardson=False)
    assert abs(raw.energies[0] - 1.0) < 2e-5
    assert np.max(np.abs(rep.energies - [1, 3, 5])) < np.max(np.abs(raw.energies - [1, 3, 5]))
    assert [qm.sign_changes(p.function) for p in rep.pairs] == [0, 1, 2]
    assert qm.hermiticity_check(op, Grid.uniform(-10, 10, 501)) <= 1e-15


def test_raw_second_order_convergence():
    op = qm.Operator1D(lambda x: -1.0 + 0 * x, lambda x: 0 * x, lambda x: x * x, (-8.0, 8.0))
    errs = [abs(qm.solve_spectrum(op, Grid.uniform(-8, 8, n), 1, richardson=False).energies[0] - 1)
            for n in (401, 801)]
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_quadratic_zeta_ground_state():
    op = qm.quadratic_zeta_hamiltonian(Q1)
    rep = qm.solve_spectrum(op, Grid.uniform(-12, 12, 8001), 1)
    assert abs(rep.energies[0] - 0.375) < 1e-5
    rep = rep.with_analytic("paper", [0.25])
    assert abs(rep.deltas["paper"][0] - 0.125) < 1e-5


def test_position_form_follows_direct_formula():
    p = QuadraticParams(0.1, 1.0, 1.0, 0.0)
    op = qm.quadratic_hamiltonian(p)
    rep = qm.solve_spectrum(op, Grid.uniform(*op.domain, 6001), 3)
    direct = [qm.quadratic_energy(n, p, "direct") for n in range(3)]
    assert np.max(np.abs(rep.energies - direct)) < 1e-5


def test_torus_properties():
    op = qm.torus_hamiltonian(T, 1.0, 1.0)
    g = Grid.periodic_grid(-math.pi, 2 * math.pi, 1000)
    assert qm.hermiticity_check(op, g) <= 1e-12
    assert qm.hermiticity_check(op, g, symmetrized=False) > 1e-6
    rep = qm.solve_spectrum(op, g, 4)
    assert np.all(np.diff(rep.energies) > 0)
    assert max(qm.parity_error(p.function) for p in rep.pairs) < 1e-8


def test_solve_spectrum_validation():
    op = qm.harmonic_core_operator(Q1)
    with pytest.raises(ValueError):
        qm.solve_spectrum(op, Grid.uniform(-12, 12, 11), 10)
    with pytest.raises(ValueError):
        qm.solve_spectrum(qm.torus_hamiltonian(T, 1, 1), Grid.uniform(-3, 3, 11), 2)
