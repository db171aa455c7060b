"""Confluent hypergeometric functions M(a, b; z) and U(a, b; z)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from ..errors import DomainError, NoConvergence, PoleError
from .gamma import digamma_complex, loggamma_complex

_MAX_ABS_Z = 50.0
_U_SERIES_MAX_Z = 4.0


@dataclass(frozen=True)
class SeriesControl:
    """Stopping rule for power series: term-ratio tolerance and term cap."""

    rel_tol: float = 1e-16
    max_terms: int = 500

    def __post_init__(self):
        if not (0 < self.rel_tol <= 1e-6):
            raise ValueError("rel_tol must lie in (0, 1e-6]")
        if self.max_terms < 64:
            raise ValueError("max_terms must be at least 64")


DEFAULT_CONTROL = SeriesControl()


def _is_nonpos_int(v: complex) -> bool:
    return v.imag == 0 and v.real <= 0 and v.real == round(v.real)


def _rgamma_c(v: complex) -> complex:
    if _is_nonpos_int(v):
        return 0.0
    return complex(np.exp(-loggamma_complex(v)))


def _gamma_c(v: complex) -> complex:
    return complex(np.exp(loggamma_complex(v)))


def _m_series(a, b, z, ctl):
    term = np.ones_like(z)
    total = np.ones_like(z)
    quiet = np.zeros(z.shape, dtype=int)
    for k in range(ctl.max_terms):
        term = term * ((a + k) / (b + k)) * z / (k + 1)
        total = total + term
        if a + k == 0:
            return total  # terminating polynomial
        small = np.abs(term) <= ctl.rel_tol * np.abs(total)
        quiet = np.where(small, quiet + 1, 0)
        if np.all(quiet >= 2):
            return total
    raise NoConvergence(f"Kummer series did not converge in {ctl.max_terms} terms")


def kummer_m(a, b, z, ctl: SeriesControl = DEFAULT_CONTROL):
    """Kummer's function M(a, b; z) = sum (a)_k / (b)_k z^k / k!.

    For Re z < 0 the series is summed after Kummer's transformation
    M(a, b; z) = e^z M(b - a, b; -z), which avoids cancellation.
    """
    a = complex(a)
    b = complex(b)
    if _is_nonpos_int(b):
        raise PoleError(f"M(a, b; z) has a pole at b = {b.real:g}")
    za = np.asarray(z, dtype=complex)
    scalar = za.ndim == 0
    za = np.atleast_1d(za)
    if np.any(np.abs(za) > _MAX_ABS_Z):
        raise DomainError(f"|z| > {_MAX_ABS_Z:g} is outside the series range")
    out = np.empty_like(za)
    neg = za.real < 0
    if _is_nonpos_int(a):
        out[:] = _m_series(a, b, za, ctl)
    else:
        if np.any(~neg):
            out[~neg] = _m_series(a, b, za[~neg], ctl)
        if np.any(neg):
            zn = za[neg]
            out[neg] = np.exp(zn) * _m_series(b - a, b, -zn, ctl)
    return out[0] if scalar else out


def _u_integer_b(a, n, z, ctl):
    """U(a, n + 1; z) for integer n >= 0 from its logarithmic series."""
    pref = (-1) ** (n + 1) / math.factorial(n) * _rgamma_c(a - n)
    logz = np.log(z)
    dig_a = complex(digamma_complex(a))
    dig_1 = float(digamma_complex(1.0).real)
    dig_n1 = float(digamma_complex(n + 1.0).real)
    coef = 1.0 + 0j
    zk = np.ones_like(z)
    total = np.zeros_like(z)
    quiet = np.zeros(z.shape, dtype=int)
    for k in range(ctl.max_terms):
        term = coef * zk * (logz + dig_a - dig_1 - dig_n1)
        total = total + term
        small = np.abs(term) <= ctl.rel_tol * np.abs(total)
        quiet = np.where(small, quiet + 1, 0)
        if k > 2 and np.all(quiet >= 2):
            break
        coef = coef * (a + k) / ((n + 1 + k) * (k + 1))
        zk = zk * z
        dig_a += 1.0 / (a + k)
        dig_1 += 1.0 / (k + 1)
        dig_n1 += 1.0 / (n + 1 + k)
    else:
        raise NoConvergence("log series for U(a, n+1; z) did not converge")
    total = pref * total
    if n > 0:
        ra = _rgamma_c(a)
        for k in range(1, n + 1):
            poch = 1.0 + 0j
            for j in range(n - k):
                poch *= 1.0 - a + k + j
            total = total + ra * math.factorial(k - 1) * poch / math.factorial(n - k) * z ** (-k)
    return total


def _u_laplace(a, b, z):
    """U(a, b; z) from its Laplace integral, for Re a > 0 and Re z > 0.

    With t = u^p / |z| and p = 2 / Re a the integrand vanishes linearly at
    u = 0, so adaptive quadrature reaches full precision.
    """
    p = 2.0 / a.real
    out = np.empty_like(z)
    for idx, zz in enumerate(z):
        az = abs(zz)

        def f(u, zz=zz, az=az):
            if u == 0.0:
                return 0j
            t = u ** p / az
            return p * u ** (p - 1) / az * np.exp(-zz * t + (a - 1) * math.log(t) + (b - a - 1) * math.log1p(t))

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            re = quad(lambda u: f(u).real, 0, np.inf, epsabs=0, epsrel=1e-13, limit=400)[0]
            im = quad(lambda u: f(u).imag, 0, np.inf, epsabs=0, epsrel=1e-13, limit=400)[0]
        out[idx] = re + 1j * im
    return out * _rgamma_c(a)


def tricomi_u(a, b, z, ctl: SeriesControl = DEFAULT_CONTROL, method: str = "auto"):
    """Tricomi's function U(a, b; z) for |arg z| < pi.

    Non-integer ``b`` uses the two-term connection formula through Kummer
    functions.  Integer ``b`` (where that formula has cancelling poles) uses
    the logarithmic series; b <= 0 is first mapped to 2 - b.  Both lose
    digits like e^|z|, so for |z| > 4 with Re a > 0 and Re z > 0 the Laplace
    integral is used instead.  ``method="series"`` or ``"integral"`` forces
    one route (the integral needs Re a > 0 and Re z > 0).
    """
    if method not in ("auto", "series", "integral"):
        raise ValueError("method must be 'auto', 'series' or 'integral'")
    a = complex(a)
    b = complex(b)
    za = np.asarray(z, dtype=complex)
    scalar = za.ndim == 0
    za = np.atleast_1d(za)
    if np.any((za.imag == 0) & (za.real <= 0)):
        raise DomainError("U(a, b; z) needs z off the closed negative real axis")
    if method == "integral":
        if not (a.real > 0 and np.all(za.real > 0)):
            raise DomainError("the Laplace integral for U needs Re a > 0 and Re z > 0")
        out = _u_laplace(a, b, za)
        return out[0] if scalar else out
    if a.real > 0 and method == "auto":
        far = (np.abs(za) > _U_SERIES_MAX_Z) & (za.real > 0)
        if np.any(far):
            out = np.empty_like(za)
            out[far] = _u_laplace(a, b, za[far])
            if np.any(~far):
                out[~far] = tricomi_u(a, b, za[~far], ctl)
            return out[0] if scalar else out
    if _is_nonpos_int(a):
        m = int(round(-a.real))
        poch = 1.0 + 0j
        for j in range(m):
            poch *= b + j
        out = (-1) ** m * poch * kummer_m(a, b, za, ctl)
    elif b.imag == 0 and b.real == round(b.real):
        nb = int(round(b.real))
        if nb >= 1:
            out = _u_integer_b(a, nb - 1, za, ctl)
        else:
            out = za ** (1.0 - b) * _u_integer_b(a - b + 1.0, 1 - nb, za, ctl)
    else:
        t1 = _gamma_c(1.0 - b) * _rgamma_c(a - b + 1.0)
        t2 = _gamma_c(b - 1.0) * _rgamma_c(a)
        out = t1 * kummer_m(a, b, za, ctl)
        if t2 != 0:
            out = out + t2 * za ** (1.0 - b) * kummer_m(a - b + 1.0, 2.0 - b, za, ctl)
    return out[0] if scalar else out
