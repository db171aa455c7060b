"""Gamma, log-gamma and digamma for real and complex arguments.

Log-gamma uses Stirling's series after an upward shift ``z -> z + n`` so that
``Re(z + n) >= 10``; summing the principal logarithms of the shift factors keeps
the result on the principal branch for ``z`` off the negative real axis.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import PoleError

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SHIFT_TO = 10.0

# B_2k for k = 1..10
_BERNOULLI = np.array([
    1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0,
    -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0, 43867.0 / 798.0,
    -174611.0 / 330.0,
])
_STIRLING = np.array([b / ((2 * k + 2) * (2 * k + 1)) for k, b in enumerate(_BERNOULLI)])
_DIGAMMA_ASY = np.array([b / (2 * k + 2) for k, b in enumerate(_BERNOULLI)])

# Taylor coefficients of 1/Gamma(1 + x) about x = 0.
RGAMMA1P_TAYLOR = np.array([
    1.00000000000000000e+00, 5.77215664901532866e-01, -6.55878071520253902e-01,
    -4.20026350340952370e-02, 1.66538611382291479e-01, -4.21977345555443334e-02,
    -9.62197152787697303e-03, 7.21894324666309990e-03, -1.16516759185906517e-03,
    -2.15241674114950975e-04, 1.28050282388116196e-04, -2.01348547807882387e-05,
    -1.25049348214267063e-06, 1.13302723198169593e-06, -2.05633841697760707e-07,
    6.11609510448141609e-09, 5.00200764446922295e-09, -1.18127457048702004e-09,
    1.04342671169110054e-10, 7.78226343990507081e-12, -3.69680561864220598e-12,
    5.10037028745447575e-13, -2.05832605356650664e-14, -5.34812253942301782e-15,
    1.22677862823826084e-15, -1.18125930169745883e-16, 1.18669225475160037e-18,
    1.41238065531803186e-18, -2.29874568443537022e-19, 1.71440632192733743e-20,
])

EULER_GAMMA = 0.57721566490153286061


def _check_poles(z):
    bad = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if np.any(bad):
        raise PoleError(f"gamma has a pole at {z[bad][0].real:g}")


def _shift(z):
    return np.maximum(0, np.ceil(_SHIFT_TO - z.real)).astype(int)


def loggamma_complex(z):
    """Principal branch of log Gamma(z) for complex ``z`` (array or scalar)."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    _check_poles(z)
    n = _shift(z)
    acc = np.zeros_like(z)
    w = z.copy()
    for k in range(int(n.max(initial=0))):
        m = k < n
        acc[m] += np.log(w[m])
        w[m] += 1.0
    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    for c in _STIRLING[::-1]:
        series = series * inv2 + c
    out = (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + series * inv - acc
    return out[0] if scalar else out


def gamma_complex(z):
    """Gamma(z) for complex ``z``; raises :class:`PoleError` at 0, -1, -2, ..."""
    return np.exp(loggamma_complex(z))


def gamma(x: float) -> float:
    """Gamma function of a real argument."""
    x = float(x)
    if x > 0:
        return float(np.exp(loggamma_complex(x).real))
    if x == round(x):
        raise PoleError(f"gamma has a pole at {x:g}")
    # reflection keeps the sign right for negative non-integers
    return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))


def rgamma(x: float) -> float:
    """1/Gamma(x), zero at the poles."""
    x = float(x)
    if x <= 0 and x == round(x):
        return 0.0
    return 1.0 / gamma(x)


def digamma_complex(z):
    """Digamma function psi(z) = d/dz log Gamma(z) for complex ``z``."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    _check_poles(z)
    n = _shift(z)
    acc = np.zeros_like(z)
    w = z.copy()
    for k in range(int(n.max(initial=0))):
        m = k < n
        acc[m] += 1.0 / w[m]
        w[m] += 1.0
    inv2 = 1.0 / (w * w)
    series = np.zeros_like(w)
    for c in _DIGAMMA_ASY[::-1]:
        series = series * inv2 + c
    out = np.log(w) - 0.5 / w - series * inv2 - acc
    return out[0] if scalar else out


def digamma(x):
    """Digamma function of a positive real argument."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise PoleError("digamma is only provided for x > 0")
    return digamma_complex(x).real
