import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgorder.errors import ExtrapolationUnstable, FitDegenerate, RepresentationMismatch, Unsupported, WrongRegime
from qgorder.extensions import (
    HALF_PI,
    BCKind,
    BoundaryCondition,
    DeficiencySolution,
    beta_from_theta,
    branch_state,
    check_robin_support,
    deficiency_indices,
    fit_theta,
    gamma_functional,
    make_reference_modes,
    theta_from_beta,
    verify_deficiency_integrability,
)
from qgorder.ordering import CurvedL, PhysicalConstants, WaveFunction, ordering_from_jplus

C = PhysicalConstants(1.0, 4.0)
CRIT = make_reference_modes(ordering_from_jplus(0.5), C)
Y_FINE = np.geomspace(1e-4, 6.0, 4000)


def _mp_c1(nu):
    """lim y^{2nu - 1/2} sqrt(y/2) K_nu(y^2/2) at hbar = 1, Lambda = 4, by mpmath at tiny y."""
    mp.mp.dps = 60
    y = mp.mpf("1e-120")  # relative corrections are O(y^{4 nu})
    return float(y ** (2 * nu - 0.5) * mp.sqrt(y / 2) * mp.besselk(nu, y * y / 2))


def test_reference_coefficients():
    assert abs(CRIT.c1 - _mp_c1(0.25)) < 1e-12
    assert abs(CRIT.c1 - 1.8128) < 1e-4
    assert CRIT.c2 == pytest.approx(1 / math.sqrt(2) / math.gamma(1.25) * 0.25 ** 0.25, rel=1e-15)
    assert CRIT.mu_mix == pytest.approx(math.pi / (2 * math.sin(math.pi / 4)), rel=1e-15)
    m0 = make_reference_modes(ordering_from_jplus(0.0), C)
    assert m0.c1 is None and m0.k == pytest.approx(math.log(4) / math.sqrt(2), rel=1e-15)
    assert abs(m0.k - 0.9803) < 1e-4


@pytest.mark.parametrize("jp", [0.2, 0.5, 0.9])
def test_reference_coefficients_positive(jp):
    m = make_reference_modes(ordering_from_jplus(jp), C)
    assert m.c1 > 0 and m.c2 > 0 and m.k is None
    assert m.c1 == pytest.approx(_mp_c1(jp / 2), rel=1e-11)


@pytest.mark.parametrize("jp", [0.0, 0.5, 0.9, 0.3, 1.5])
def test_wronskian_is_one(jp):
    m = make_reference_modes(ordering_from_jplus(jp), C)
    y = np.linspace(0.05, 5.0, 400)
    assert np.max(np.abs(m.wronskian(y) - 1.0)) <= 1e-8


def test_wronskian_other_constants():
    m = make_reference_modes(ordering_from_jplus(0.5), PhysicalConstants(0.7, 2.3))
    y = np.linspace(0.05, 5.0, 200)
    assert np.max(np.abs(m.wronskian(y) - 1.0)) <= 1e-8


@pytest.mark.parametrize("jp", [0.0, 0.5, 0.8])
def test_branches_are_leading_terms(jp):
    m = make_reference_modes(ordering_from_jplus(jp), C)
    y = np.array([1e-6, 1e-7])
    b1, b2 = m.modes_to_branches(1.0, 0.0)
    # phi1 - B1 = -mu B2 + o(B2) and phi2 / B2 -> 1
    assert np.allclose(m.phi2(y) / m.branch2(y), 1.0, rtol=1e-9)
    resid = (m.phi1(y) - m.branch1(y)) / m.branch2(y)
    # next correction to phi1 is relatively O(y^{2 - 4 nu})
    assert np.allclose(resid, b2, rtol=10 * y[0] ** (2 - 4 * m.nu))


# ---------------------------------------------------------- boundary conditions


def test_bc_constructors():
    d, n = BoundaryCondition.dirichlet(), BoundaryCondition.neumann()
    assert d.kind is BCKind.DIRICHLET and d.L == 0.0
    assert n.kind is BCKind.NEUMANN and math.isinf(n.L)
    assert BoundaryCondition.from_L(math.inf).theta == HALF_PI
    assert BoundaryCondition(-HALF_PI).theta == HALF_PI
    g = BoundaryCondition.from_L(0.3)
    assert g.kind is BCKind.GENERAL and g.L == pytest.approx(0.3, rel=1e-15)
    r = BoundaryCondition.robin(1.0, CRIT)
    assert r.kind is BCKind.ROBIN and r.describe() == "Robin(beta=1.0)"
    assert r.beta == pytest.approx(CRIT.c1 / CRIT.c2 * math.tan(r.theta), rel=1e-10)
    assert BoundaryCondition(0.4).with_modes(CRIT).beta == pytest.approx(beta_from_theta(CRIT, 0.4))


def test_beta_theta_examples():
    assert beta_from_theta(CRIT, 0.0) == 0.0
    assert math.isinf(beta_from_theta(CRIT, HALF_PI))
    assert beta_from_theta(CRIT, math.pi / 4) == pytest.approx(CRIT.c1 / CRIT.c2, rel=1e-15)
    assert theta_from_beta(CRIT, math.inf) == HALF_PI


@settings(max_examples=200, deadline=None)
@given(st.floats(-HALF_PI + 1e-6, HALF_PI - 1e-6))
def test_beta_theta_roundtrip(theta):
    assert abs(theta_from_beta(CRIT, beta_from_theta(CRIT, theta)) - theta) <= 1e-12


def test_beta_theta_wrong_regime():
    m = make_reference_modes(ordering_from_jplus(0.7), C)
    with pytest.raises(WrongRegime):
        beta_from_theta(m, 0.3)
    with pytest.raises(WrongRegime):
        theta_from_beta(m, 0.3)


def test_negative_robin_unsupported():
    with pytest.raises(Unsupported):
        check_robin_support(-0.1)
    check_robin_support(0.0)


# -------------------------------------------------------------- deficiency


@pytest.mark.parametrize("jp,expected", [(2.0, (0, 0)), (1.0, (0, 0)), (0.5, (1, 1)), (0.0, (1, 1)), (0.7, (1, 1))])
def test_deficiency_indices(jp, expected):
    assert deficiency_indices(ordering_from_jplus(jp)) == expected


@pytest.mark.parametrize("sign", ["plus", "minus"])
def test_deficiency_residual(sign):
    sol = DeficiencySolution(ordering_from_jplus(0.5), C, sign)
    assert sol.residual(np.linspace(0.1, 4.0, 60)) <= 1e-6


def test_deficiency_conjugate_pair():
    o = ordering_from_jplus(0.7)
    y = np.linspace(0.2, 3, 11)
    np.testing.assert_allclose(DeficiencySolution(o, C, "minus")(y), np.conj(DeficiencySolution(o, C, "plus")(y)),
                               rtol=1e-12)


def test_deficiency_solution_against_mpmath():
    o = ordering_from_jplus(0.5)
    sol = DeficiencySolution(o, C)
    mp.mp.dps = 30
    for y in (0.3, 1.0, 2.5):
        z = mp.mpf(y) ** 2  # sqrt(Lambda) y^2 / (2 hbar)
        ref = z ** 0.5 * mp.exp(-z / 2) * mp.hyperu(sol.alpha, 1.5, z)
        assert abs(sol(y) - complex(ref)) < 1e-11 * abs(complex(ref))


EPS = 10.0 ** -np.arange(1, 8)


def test_integrability_critical_converges():
    t = verify_deficiency_integrability(ordering_from_jplus(0.5), C, EPS)
    assert t.convergent and np.all(t.shrink_factors >= 4.0)


def test_integrability_log_divergence():
    eps = np.geomspace(1e-2, 1e-6, 9)
    t = verify_deficiency_integrability(ordering_from_jplus(1.0), C, eps)
    assert not t.convergent
    assert t.log_r2 >= 0.999 and t.log_slope > 0


def test_integrability_power_divergence():
    t = verify_deficiency_integrability(ordering_from_jplus(1.5), C, EPS)
    assert abs(t.density_slope + 2.0) <= 0.2
    assert abs(t.power_slope + 1.0) <= 0.1  # the integral itself diverges as 1/eps


def test_integrability_input_validation():
    with pytest.raises(ValueError):
        verify_deficiency_integrability(ordering_from_jplus(0.5), C, [1e-2, 1e-1, 1e-3])
    with pytest.raises(ValueError):
        verify_deficiency_integrability(ordering_from_jplus(0.5), C, [1e-2, 1e-3])


# ---------------------------------------------------------------- functionals


def _flat(values, grid=Y_FINE):
    return WaveFunction(grid, values)


def test_gamma_on_reference_modes():
    g1 = gamma_functional(1, CRIT, _flat(CRIT.phi2(Y_FINE)))
    g2 = gamma_functional(2, CRIT, _flat(CRIT.phi1(Y_FINE)))
    assert abs(g1.value - 1.0) < 1e-6
    assert abs(g2.value + 1.0) < 1e-6


def test_gamma_on_exact_ground_state_at_jplus_one():
    # u0 = y^{3/2} e^{-y^2/2} solves the |J+| = 1 problem with E = 4 (hbar = 1, Lambda = 4)
    m = make_reference_modes(ordering_from_jplus(1.0), C)
    u0 = Y_FINE ** 1.5 * np.exp(-Y_FINE ** 2 / 2)
    g2 = gamma_functional(2, m, _flat(u0))
    g1 = gamma_functional(1, m, _flat(u0))
    assert abs(g2.value) < 1e-6
    assert abs(g1.value - 1.0 / m.c2) < 1e-4 / m.c2


def test_gamma_requires_flat_state():
    with pytest.raises(RepresentationMismatch):
        gamma_functional(1, CRIT, WaveFunction(Y_FINE, CRIT.phi2(Y_FINE), CurvedL(0.0)))


def test_gamma_unstable_for_state_outside_domain():
    # y^{-0.9} lies outside the maximal domain: W[phi2, psi] ~ y^{-1/2-0.9+1/2} grows without bound
    with pytest.raises(ExtrapolationUnstable):
        gamma_functional(2, CRIT, _flat(Y_FINE ** -0.9))


def test_fit_theta_modes_basis_examples():
    assert abs(fit_theta(CRIT, _flat(CRIT.phi2(Y_FINE)), basis="modes")) < 1e-8
    assert abs(fit_theta(CRIT, _flat(CRIT.phi1(Y_FINE)), basis="modes") - HALF_PI) < 1e-8
    mix = (CRIT.phi1(Y_FINE) + CRIT.phi2(Y_FINE)) / math.sqrt(2)
    assert abs(fit_theta(CRIT, _flat(mix), basis="modes") - math.pi / 4) < 1e-3


@pytest.mark.parametrize("theta", [0.0, 0.3, -0.7, 1.2, HALF_PI])
def test_fit_theta_branch_basis_recovers_branch_state(theta):
    psi = _flat(branch_state(CRIT, theta, Y_FINE))
    assert abs(fit_theta(CRIT, psi) - theta) < 1e-6


def test_fit_theta_scale_invariant():
    psi = _flat(branch_state(CRIT, 0.4, Y_FINE))
    t = fit_theta(CRIT, psi)
    for c in (1e-8, -3.0, 2j, 1e6 * (1 - 1j)):
        assert fit_theta(CRIT, psi.with_values(c * psi.values)) == pytest.approx(t, abs=1e-12)


def test_fit_theta_at_jplus_zero():
    m = make_reference_modes(ordering_from_jplus(0.0), C)
    psi = _flat(branch_state(m, 0.5, Y_FINE))
    assert abs(fit_theta(m, psi) - 0.5) < 1e-6


def test_fit_theta_errors():
    with pytest.raises(FitDegenerate):
        fit_theta(CRIT, _flat(CRIT.phi2(Y_FINE)), window=(1e-3, 1.001e-3))
    with pytest.raises(WrongRegime):
        fit_theta(make_reference_modes(ordering_from_jplus(1.0), C), _flat(CRIT.phi2(Y_FINE)))
    with pytest.raises(ValueError):
        fit_theta(CRIT, _flat(CRIT.phi2(Y_FINE)), basis="other")
