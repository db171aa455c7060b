import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from qgorder.errors import DomainError, NoConvergence, PoleError
from qgorder.specfun import (
    EULER_GAMMA,
    SeriesControl,
    bessel_i,
    bessel_ie,
    bessel_k,
    bessel_ke,
    digamma,
    digamma_complex,
    erfc_complex,
    erfcx,
    gamma,
    gamma_complex,
    kummer_m,
    laguerre,
    loggamma_complex,
    tricomi_u,
    wronskian_ki,
)

mp.mp.dps = 30


def rel(a, b):
    return abs(a - b) / abs(b)


# ---------------------------------------------------------------- gamma


def test_gamma_half_is_sqrt_pi():
    assert rel(gamma(0.5), math.sqrt(math.pi)) < 1e-14


def test_abs_gamma_one_plus_i():
    ref = float(abs(mp.gamma(1 + 1j)))
    assert abs(ref - math.sqrt(math.pi / math.sinh(math.pi))) < 1e-15
    assert rel(abs(gamma_complex(1 + 1j)), ref) < 1e-13


def test_digamma_one():
    assert rel(digamma(1.0), -EULER_GAMMA) < 1e-14
    assert abs(digamma(1.0) + 0.577216) < 1e-6


@pytest.mark.parametrize("z", [0.1 + 0.2j, 3.7 - 2.1j, -2.5 + 0.5j, 12.0 + 30.0j, 0.5 - 8.0j, -7.3 + 0.01j])
def test_loggamma_against_mpmath(z):
    ref = complex(mp.loggamma(z))
    assert abs(loggamma_complex(z) - ref) < 1e-12 * max(1.0, abs(ref))
    assert rel(gamma_complex(z), complex(mp.gamma(z))) < 1e-12


@pytest.mark.parametrize("z", [0.3 + 0.1j, 5.0 + 2.0j, -1.5 + 0.7j])
def test_digamma_complex_against_mpmath(z):
    assert rel(digamma_complex(z), complex(mp.digamma(z))) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(-6.0, 8.0), st.floats(-6.0, 6.0))
def test_gamma_recurrence(x, y):
    z = complex(x, y)
    if abs(z - round(x)) < 1e-3 and round(x) <= 0:
        return
    if abs(z + 1 - round(x + 1)) < 1e-3 and round(x + 1) <= 0:
        return
    lhs = gamma_complex(z + 1)
    rhs = z * gamma_complex(z)
    assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


@pytest.mark.parametrize("x", [0.0, -1.0, -4.0])
def test_gamma_poles(x):
    with pytest.raises(PoleError):
        gamma(x)
    with pytest.raises(PoleError):
        gamma_complex(complex(x, 0.0))


def test_gamma_negative_noninteger():
    assert rel(gamma(-1.5), float(mp.gamma(-1.5))) < 1e-14


# --------------------------------------------------------------- bessel


def test_bessel_half_integer_closed_forms():
    assert rel(bessel_i(0.5, 1.0), math.sqrt(2 / math.pi) * math.sinh(1.0)) < 1e-14
    assert rel(bessel_k(0.5, 1.0), math.sqrt(math.pi / 2) * math.exp(-1.0)) < 1e-14
    assert abs(bessel_i(0.5, 1.0) - 0.937674) < 1e-6
    assert abs(bessel_k(0.5, 1.0) - 0.461068) < 1e-6


NUS = [0.0, 1e-5, 1e-4, 0.25, 0.375, 0.45, 0.5, 0.9, 0.999, 1.0, 1.5, 2.3]
XS = [1e-6, 1e-4, 1e-2, 0.3, 1.0, 2.0, 5.0, 11.0, 25.0, 30.0]


@pytest.mark.parametrize("nu", NUS)
def test_bessel_i_against_mpmath(nu):
    for x in XS:
        assert rel(bessel_i(nu, x), float(mp.besseli(nu, x))) < 1e-12, x


@pytest.mark.parametrize("nu", NUS)
def test_bessel_k_against_mpmath(nu):
    for x in XS:
        assert rel(bessel_k(nu, x), float(mp.besselk(nu, x))) < 1e-10, x


def test_scaled_bessel_large_argument():
    for nu in (0.25, 1.0):
        for x in (100.0, 800.0):
            assert rel(bessel_ie(nu, x), float(mp.besseli(nu, x) * mp.exp(-x))) < 1e-12
            assert rel(bessel_ke(nu, x), float(mp.besselk(nu, x) * mp.exp(x))) < 1e-12


def test_bessel_vectorized_and_positive():
    x = np.logspace(-3, 1.4, 50)
    for nu in (0.0, 0.25, 0.9):
        assert np.all(bessel_i(nu, x) > 0)
        assert np.all(bessel_k(nu, x) > 0)


def test_bessel_i0_small_argument():
    assert abs(bessel_i(0.0, 1e-8) - 1.0) < 1e-15


def test_bessel_k_small_argument_asymptote():
    nu, x = 0.25, 1e-12
    asym = 0.5 * math.pi / math.sin(nu * math.pi) / gamma(1 - nu) * (x / 2) ** (-nu)
    assert abs(bessel_k(nu, x) / asym - 1.0) < 1e-3


def test_bessel_k0_log_asymptote():
    x = 1e-6
    assert abs(bessel_k(0.0, x) + math.log(x / 2)) < 1.0


def test_bessel_k_continuous_through_integer_order():
    x = 0.7
    vals = [bessel_k(nu, x) for nu in (1.0 - 2e-3, 1.0 - 1e-3, 1.0 - 5e-4, 1.0, 1.0 + 5e-4, 1.0 + 1e-3)]
    refs = [float(mp.besselk(nu, x)) for nu in (1.0 - 2e-3, 1.0 - 1e-3, 1.0 - 5e-4, 1.0, 1.0 + 5e-4, 1.0 + 1e-3)]
    assert max(rel(a, b) for a, b in zip(vals, refs)) < 1e-12


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel_i(0.5, 0.0)
    with pytest.raises(DomainError):
        bessel_k(0.5, -1.0)


@pytest.mark.parametrize("nu,w,expected", [(0.25, 1.0, 1.0), (0.0, 0.5, 2.0), (0.45, 3.0, 1.0 / 3.0)])
def test_wronskian_examples(nu, w, expected):
    assert rel(wronskian_ki(nu, w), expected) < 1e-8


@pytest.mark.parametrize("nu", [0.0, 0.25, 0.45])
def test_wronskian_identity_grid(nu):
    w = np.logspace(-3, 1, 60)
    assert np.max(np.abs(wronskian_ki(nu, w) * w - 1.0)) < 1e-8


# ------------------------------------------------------------ hypergeometric


def test_series_control_validation():
    with pytest.raises(ValueError):
        SeriesControl(rel_tol=1e-3)
    with pytest.raises(ValueError):
        SeriesControl(max_terms=10)


def test_kummer_at_zero():
    for a, b in [(0.3, 1.7), (-2.5 + 1j, 0.4), (5.0, 3.0 - 2j)]:
        assert kummer_m(a, b, 0.0) == 1.0


def test_kummer_exponential_identity():
    z = 1 + 0.5j
    assert abs(kummer_m(1, 1, z) - cmath.exp(z)) < 1e-10 * abs(cmath.exp(z))


def test_kummer_terminates_for_negative_integer_a():
    z = np.array([0.3, 2.0, 17.0, -9.0])
    expected = 1 - 2 * z + z * z / 2
    np.testing.assert_allclose(kummer_m(-2, 1, z), expected, rtol=1e-14)


@pytest.mark.parametrize("a,b,z", [(0.4, 1.3, 3.0), (1.5 - 0.5j, 2.25, -4.0 + 1j), (-3.3, 0.6, 12.0),
                                   (0.75 + 0.25j, 1.5, 30.0), (2.0, 5.5, -40.0)])
def test_kummer_against_mpmath(a, b, z):
    assert rel(kummer_m(a, b, z), complex(mp.hyp1f1(a, b, z))) < 1e-10


def test_kummer_poles():
    for b in (0, -1, -3):
        with pytest.raises(PoleError):
            kummer_m(0.5, b, 1.0)


def test_kummer_no_convergence():
    with pytest.raises(NoConvergence):
        kummer_m(0.5, 0.7, 45.0, SeriesControl(max_terms=64))


def test_kummer_large_z_rejected():
    with pytest.raises(DomainError):
        kummer_m(0.5, 0.7, 60.0)


def _u_integral(a, b, z):
    """Independent oracle: U = 1/Gamma(a) int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt."""
    f = lambda t: math.exp(-z * t) * t ** (a - 1) * (1 + t) ** (b - a - 1)
    val = integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13, limit=200)[0]
    val += integrate.quad(f, 1, np.inf, epsabs=0, epsrel=1e-13, limit=200)[0]
    return val / math.gamma(a)


def test_tricomi_matches_quadrature_oracle():
    ref = _u_integral(0.75, 1.5, 2.0)
    assert rel(tricomi_u(0.75, 1.5, 2.0), ref) < 1e-10


@pytest.mark.parametrize("a", [0.3, 0.75, 1.6])
@pytest.mark.parametrize("b", [0.4, 1.25, 1.75, 2.6])
@pytest.mark.parametrize("z", [0.5, 1.5, 3.5])
def test_tricomi_connection_formula_grid(a, b, z):
    # series (connection formula) route against the quadrature oracle
    assert rel(tricomi_u(a, b, z, method="series"), _u_integral(a, b, z)) < 1e-8


@pytest.mark.parametrize("a,b,z", [(0.75 - 0.3j, 1.5, 1.2 + 0.4j), (1.25 + 0.5j, 2.0, 3.0), (0.6 + 0.1j, 1.0, 2.5 - 1j),
                                   (0.625 + 0.125j, 1.25, 0.8)])
def test_tricomi_series_and_integral_routes_agree(a, b, z):
    s = tricomi_u(a, b, z, method="series")
    q = tricomi_u(a, b, z, method="integral")
    assert abs(s - q) < 1e-10 * abs(q)


@pytest.mark.parametrize("a,b,z", [(0.75 + 0.25j, 1.5, 0.3), (0.75 - 0.25j, 1.5, 9.0), (0.625, 1.25, 40.0),
                                   (1.0 + 0.25j, 2.0, 0.05), (1.0 - 0.25j, 2.0, 25.0), (-1.5, 0.5, 2.0),
                                   (0.3, 1.0, 6.0 + 2.0j), (0.5, -1.0, 1.5)])
def test_tricomi_against_mpmath(a, b, z):
    assert rel(tricomi_u(a, b, z), complex(mp.hyperu(a, b, z))) < 1e-11


def test_tricomi_large_z_decay():
    a, b = 0.75, 1.5
    z = np.array([50.0, 200.0, 800.0])
    scaled = np.abs(tricomi_u(a, b, z) * z ** a)
    assert np.all(np.abs(scaled - 1.0) < 2 * a * abs(a - b + 1) / z)


def test_tricomi_small_z_power():
    a, b = 0.75, 1.5
    z = np.array([1e-7, 1e-6])
    u = tricomi_u(a, b, z).real
    slope = np.log(u[1] / u[0]) / np.log(z[1] / z[0])
    assert abs(slope - (1 - b)) < 1e-3
    coef = math.gamma(b - 1) / math.gamma(a)
    assert rel(u[0] * z[0] ** (b - 1), coef) < 1e-3


def test_tricomi_domain():
    with pytest.raises(DomainError):
        tricomi_u(0.5, 1.5, -1.0)
    with pytest.raises(DomainError):
        tricomi_u(-0.5, 1.5, 1.0, method="integral")


# ------------------------------------------------------------ error function


def test_erfc_values():
    assert erfc_complex(0.0) == 1.0
    assert abs(erfc_complex(1.0) - float(mp.erfc(1))) < 1e-15
    assert abs(erfc_complex(1.0).real - 0.157299) < 1e-6


def test_erfc_schwarz_reflection():
    z = 0.5 + 0.5j
    assert abs(erfc_complex(z.conjugate()) - erfc_complex(z).conjugate()) < 1e-15


def test_erfc_real_axis_against_scipy():
    x = np.linspace(-6, 26, 401)
    ours = erfc_complex(x.astype(complex))
    ref = special.erfc(x)
    mask = ref > 1e-300
    assert np.max(np.abs(ours.real[mask] - ref[mask]) / ref[mask]) < 1e-12
    np.testing.assert_allclose(erfcx(x), special.erfcx(x), rtol=1e-13)


def test_erfc_complex_against_mpmath():
    worst = 0.0
    rng = np.random.default_rng(4)
    for r, ph in zip(rng.uniform(0, 20, 80), rng.uniform(-math.pi, math.pi, 80)):
        z = cmath.rect(r, ph)
        ref = complex(mp.erfc(z))
        if ref == 0:
            continue
        worst = max(worst, rel(erfc_complex(z), ref))
    assert worst < 1e-10


@settings(max_examples=80, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_erfc_reflection_sum(x, y):
    z = complex(x, y)
    s = erfc_complex(z) + erfc_complex(-z)
    assert abs(s - 2.0) < 1e-12 * max(1.0, abs(erfc_complex(z)))


# ---------------------------------------------------------------- laguerre


def test_laguerre_base_cases():
    x = np.linspace(0, 5, 7)
    np.testing.assert_array_equal(laguerre(0, 0.7, x), np.ones_like(x))
    np.testing.assert_allclose(laguerre(1, 0.7, x), 1 + 0.7 - x, rtol=1e-15)


def test_laguerre_against_mpmath():
    for n in (2, 5, 12):
        for x in (0.1, 3.0, 20.0):
            assert rel(laguerre(n, 0.5, x), float(mp.laguerre(n, 0.5, x))) < 1e-12


def test_laguerre_orthogonality():
    a = 0.5
    f = lambda x: x ** a * math.exp(-x) * laguerre(2, a, x) * laguerre(3, a, x)
    val = integrate.quad(f, 0, np.inf, epsabs=1e-13, limit=200)[0]
    assert abs(val) < 1e-8
