import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pdmtorus import pdm
from pdmtorus.errors import DomainError, RangeError, SingularityError, UnsupportedParameter
from pdmtorus.numerics import Trajectory
from pdmtorus.pdm import BranchId, MLParams, QuadraticParams
from pdmtorus.torus import TorusParams

T = TorusParams(1.0, 2.0)
QUAD1 = QuadraticParams(1.0, 1.0, 1.0, 0.0)
ML1 = MLParams(1.0, 1.0, 1.0, 0.0)


def test_mass_from_fg_examples():
    lam = 0.3
    m = pdm.mass_from_fg(lambda x: (1 + lam * x) ** -4, lambda x: 1.0, 1.0, 0.0)
    assert abs(m(0.7) - (1 + lam * 0.7) ** -4) < 1e-15
    m = pdm.mass_from_fg(lambda x: (2 + x) ** 2, lambda x: 2 + x, 2.5, 0.0)
    assert m(3.0) == 2.5
    m = pdm.mass_from_fg(lambda x: 1 / (1 + lam * x * x), lambda x: 1.0, 1.0, 0.0)
    assert abs(m(1.3) - 1 / (1 + lam * 1.69)) < 1e-15


def test_lienard_accel_examples():
    quad = pdm.quadratic_system(QUAD1)
    assert abs(pdm.lienard_accel(0.0, 0.0, quad)) < 1e-15
    assert abs(pdm.lienard_accel(1.0, 0.0, quad) + 2.0) < 1e-14
    assert abs(pdm.lienard_accel(0.5, 1.0, quad) - 7 / 12) < 1e-14
    assert abs(pdm.lienard_accel(1.0, 1.0, pdm.ml_system(ML1))) < 1e-15


@settings(max_examples=50)
@given(st.floats(-0.8, 3.0), st.floats(-2.0, 2.0))
def test_lienard_matches_direct_equations(x, dx):
    quad = pdm.quadratic_system(QUAD1)
    assert abs(pdm.lienard_accel(x, dx, quad) - pdm.quadratic_rhs_direct(x, dx, QUAD1)) < 1e-10 * (1 + dx * dx + abs(x) ** 2)
    ml = pdm.ml_system(ML1)
    assert abs(pdm.lienard_accel(x, dx, ml) - pdm.ml_rhs_direct(x, dx, ML1)) < 1e-12 * (1 + dx * dx)


@settings(max_examples=50)
@given(st.floats(-0.8, 3.0), st.floats(-2.0, 2.0))
def test_closed_form_accel_matches_lienard(x, dx):
    for sys in (pdm.quadratic_system(QUAD1), pdm.ml_system(ML1),
                pdm.ml_system(MLParams.from_omega2(1.0, -0.25, 1.0))):
        assert abs(sys.accel(x, dx) - pdm.lienard_accel(x, dx, sys)) < 1e-12 * (1 + dx * dx + x * x)


def test_generic_and_closed_form_paths_agree():
    sys = pdm.quadratic_system(QuadraticParams(0.1, 1.0, 1.0))
    fast = pdm.integrate_lienard(sys, 0.2, 0.0, 5.0, 1e-3)
    generic = pdm.integrate_lienard(dataclasses.replace(sys, accel=None), 0.2, 0.0, 5.0, 1e-3)
    assert np.max(np.abs(fast.states - generic.states)) < 1e-12


def test_case_values():
    quad = pdm.quadratic_system(QuadraticParams(0.5, 2.0, 1.5, 0.25))
    assert quad.m(0.0) == 1.5
    assert abs(quad.V(0.0) - (0.25 - 1.5 * 4.0 / (2 * 0.25))) < 1e-14
    ml = pdm.ml_system(MLParams(2.0, 3.0, 1.5, 0.25))
    assert ml.m(0.0) == 1.5
    assert abs(ml.V(0.0) - (0.25 - 1.5 * 9.0 / 4.0)) < 1e-14
    assert abs(ml.V(1e8) - 0.25) < 1e-12


def test_energy_examples():
    quad = pdm.quadratic_system(QUAD1)
    assert pdm.case_energy(0.3, 0.0, quad) == quad.V(0.3)
    assert abs(pdm.case_energy(0.0, 1.0, quad)) < 1e-15


def test_domain_and_parameters():
    quad = pdm.quadratic_system(QUAD1)
    with pytest.raises(DomainError):
        pdm.case_energy(-1.0, 0.0, quad)
    with pytest.raises(ValueError):
        QuadraticParams(0.0, 1.0, 1.0)
    with pytest.raises(UnsupportedParameter):
        MLParams(1.0, 1 + 1j, 1.0).real_omega2()
    assert MLParams.from_omega2(1.0, -0.25, 1.0).real_omega2() == -0.25


def test_q_of_x_examples():
    quad = pdm.quadratic_system(QUAD1)
    assert abs(pdm.q_of_x(quad, 0.0, 1.0) - 0.5) < 1e-10
    assert pdm.q_of_x(quad, 0.4, 0.4) == 0.0
    assert abs(pdm.q_of_x(pdm.ml_system(ML1), 0.0, 1.0) - math.asinh(1.0)) < 1e-10


def test_tau_examples():
    t = np.linspace(1.0, 3.0, 21)
    tr = Trajectory(t, np.column_stack((np.sin(t), np.cos(t))))
    assert np.allclose(pdm.tau_of_t(tr, lambda x: x * 0 + 1.0), t - 1.0, atol=1e-14)
    assert np.allclose(pdm.tau_of_t(tr, lambda x: x * 0 + 2.0), 2 * (t - 1.0), atol=1e-14)


def test_pullback_at_equilibrium():
    sys = pdm.quadratic_system(QUAD1)
    tr = pdm.integrate_lienard(sys, 0.0, 0.0, 2.0, 1e-2)
    assert pdm.pullback_residual(tr, sys, pdm.potential_in_q("quadratic", QUAD1)) <= 1e-10


def test_pullback_reference_runs():
    q = QuadraticParams(0.1, 1.0, 1.0, 0.0)
    for case, params, x0 in (("quadratic", q, 0.2), ("ml", ML1, 0.3)):
        sys = pdm.system_for(case, params)
        tr = pdm.integrate_lienard(sys, x0, 0.0, 10.0, 1e-3)
        assert np.all(np.diff(pdm.tau_of_t(tr, sys.f)) > 0)
        assert pdm.pullback_residual(tr, sys, pdm.potential_in_q(case, params)) <= 1e-4


def test_torus_target_potential():
    assert abs(pdm.torus_target_potential(0.0, T, 3.0) - 0.5) < 1e-15
    assert pdm.torus_target_potential(1.1, T, 0.0) == 0.0
    assert abs(pdm.torus_target_potential(math.pi, T, 3.0) - 4.5) < 1e-14


def test_printed_match_singular_and_ml_seed():
    p = QuadraticParams(0.1, 1.0, 1.0)
    with pytest.raises(SingularityError):
        pdm.match_paper("quadratic", -5.0, BranchId("quadratic", "1"), p, T, 1.0)
    # at omega = 1 the inner argument -c/a + q1/(a^2 omega) is exactly -1:
    # q = pi and the printed mass divides by sin q = 0
    with pytest.raises(SingularityError):
        pdm.match_paper("ml", 0.0, BranchId("ml", "++"), ML1, T, 1.0)
    got = pdm.match_paper("ml", 0.0, BranchId("ml", "++"), MLParams(1.0, 2.0, 1.0), T, 1.0)
    assert abs(np.cos(got.q) - (-2.0 + 0.5)) < 1e-12
    with pytest.raises(ValueError):
        pdm.match_paper("ml", 0.0, BranchId("quadratic", "1"), ML1, T, 1.0)


def test_branch_labels():
    assert [b.label for b in BranchId.all_for("quadratic")] == ["1", "2", "3", "4"]
    assert len(BranchId.all_for("ml")) == 4
    with pytest.raises(ValueError):
        BranchId("ml", "5")


def test_match_numeric_seed_and_grid():
    p = QuadraticParams(0.1, 1.0, 1.0)
    at_ref = pdm.match_numeric("quadratic", 0.0, p, T, 1.0)
    assert abs(at_ref.q - math.pi / 2) < 1e-12 and at_ref.potential_residual <= 1e-12
    for x in np.linspace(-0.5, 0.5, 11):
        nm = pdm.match_numeric("ml", x, ML1, T, 1.0)
        assert nm.potential_residual <= 1e-10
        assert 0 < nm.q < math.pi


def test_match_numeric_out_of_range():
    with pytest.raises(RangeError) as info:
        pdm.match_numeric("quadratic", 5.0, QuadraticParams(0.1, 1.0, 1.0), T, 1.0)
    lo, hi = info.value.interval
    assert lo < hi


def test_compare_match_report():
    xs = np.linspace(-0.5, 0.5, 21)
    rep = pdm.compare_match("quadratic", xs, QuadraticParams(0.1, 1.0, 1.0), T, 1.0)
    assert len(rep.rows) == 4 * xs.size
    assert all(r.flag == "non-physical branch" for r in rep.rows)
    assert rep.summary["oracle_max_identity_residual"] <= 1e-6
    rep = pdm.compare_match("ml", xs, ML1, T, 1.0)
    assert len(rep.rows) == 4 * xs.size
    assert rep.summary["oracle_max_potential_residual"] <= 1e-10


def test_matched_system_chain():
    p = QuadraticParams(0.1, 1.0, 1.0)
    base = pdm.quadratic_system(p)
    chain = pdm.matched_system("quadratic", p, T, 1.0)
    tr = pdm.integrate_lienard(base, 0.2, 0.0, 1.2, 1e-3)
    r = pdm.pullback_residual(tr, chain, lambda q: pdm.torus_target_potential(q, T, 1.0))
    assert r <= 1e-4
