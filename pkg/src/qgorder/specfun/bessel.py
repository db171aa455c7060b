"""Modified Bessel functions I_nu and K_nu of real order nu >= 0.

I_nu uses its power series for x <= 30 and the Hankel expansion beyond.
K_nu follows Temme's method: the order is split as nu = mu + n with
|mu| <= 1/2, K_mu and K_{mu+1} come from Temme's series (x <= 2) or Steed's
continued fraction (x > 2), and upward recurrence reaches nu.  Temme's series
is uniform in mu, so integer orders (K_0 with its log/digamma structure)
need no special casing.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, NoConvergence
from .gamma import RGAMMA1P_TAYLOR, rgamma

_EPS = 1e-17
_SERIES_MAX_X = 30.0
_TEMME_MAX_X = 2.0
_MAXIT = 20000


def _prepare(nu, x):
    if nu < 0:
        raise DomainError("order nu must be nonnegative")
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("modified Bessel functions need x > 0")
    return float(nu), x


def _i_series(nu, x):
    half = 0.5 * x
    q = half * half
    term = np.exp(nu * np.log(half)) * rgamma(nu + 1.0)
    total = term.copy()
    for k in range(1, _MAXIT):
        term = term * q / (k * (k + nu))
        total += term
        if np.all(term <= _EPS * total):
            return total
    raise NoConvergence("I_nu power series did not converge")


def _i_hankel_scaled(nu, x):
    # e^{-x} I_nu(x) for large x
    mu4 = 4.0 * nu * nu
    term = np.ones_like(x)
    total = np.ones_like(x)
    last = np.full_like(x, np.inf)
    for k in range(1, 200):
        term = -term * (mu4 - (2 * k - 1) ** 2) / (k * 8.0 * x)
        growing = np.abs(term) >= last
        if np.all(growing | (np.abs(term) < _EPS * np.abs(total))):
            break
        total = np.where(growing, total, total + term)
        last = np.where(growing, 0.0, np.abs(term))
    return total / np.sqrt(2.0 * math.pi * x)


def _temme_gammas(mu):
    c = RGAMMA1P_TAYLOR
    powers = mu ** np.arange(len(c))
    gampl = float(np.dot(c, powers))
    gammi = float(np.dot(c, powers * (-1.0) ** np.arange(len(c))))
    gam2 = 0.5 * (gammi + gampl)
    odd = np.arange(1, len(c), 2)
    gam1 = -float(np.dot(c[odd], mu ** (odd - 1)))
    return gam1, gam2, gampl, gammi


def _k_temme(mu, x):
    """K_mu(x), K_{mu+1}(x) for x <= 2 by Temme's series."""
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < 1e-15 else pimu / math.sin(pimu)
    d = -np.log(x2)
    e = mu * d
    with np.errstate(invalid="ignore", divide="ignore"):
        fact2 = np.where(np.abs(e) < 1e-15, 1.0, np.sinh(e) / e)
    gam1, gam2, gampl, gammi = _temme_gammas(mu)
    ff = fact * (gam1 * np.cosh(e) + gam2 * fact2 * d)
    total = ff.copy()
    ee = np.exp(e)
    p = 0.5 * ee / gampl
    q = 0.5 / (ee * gammi)
    c = np.ones_like(x)
    dd = x2 * x2
    total1 = p.copy()
    mu2 = mu * mu
    for i in range(1, _MAXIT):
        ff = (i * ff + p + q) / (i * i - mu2)
        c = c * dd / i
        p = p / (i - mu)
        q = q / (i + mu)
        delta = c * ff
        total += delta
        delta1 = c * (p - i * ff)
        total1 += delta1
        if np.all(np.abs(delta) < np.abs(total) * _EPS):
            return total, total1 * 2.0 / x
    raise NoConvergence("Temme series for K_nu did not converge")


def _k_steed_scaled(mu, x):
    """e^x K_mu(x), e^x K_{mu+1}(x) for x > 2 by Steed's CF2."""
    mu2 = mu * mu
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25 - mu2
    q = np.full_like(x, a1)
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels / s) < _EPS):
            break
    else:
        raise NoConvergence("Steed continued fraction for K_nu did not converge")
    h = a1 * h
    kmu = np.sqrt(math.pi / (2.0 * x)) / s
    k1 = kmu * (mu + x + 0.5 - h) / x
    return kmu, k1


def _k_pair_scaled(nu, x):
    """e^x K_nu(x) and e^x K_{nu+1}(x)."""
    nl = int(nu + 0.5)
    mu = nu - nl
    kmu = np.empty_like(x)
    k1 = np.empty_like(x)
    small = x <= _TEMME_MAX_X
    if np.any(small):
        xs = x[small]
        a, b = _k_temme(mu, xs)
        kmu[small] = a * np.exp(xs)
        k1[small] = b * np.exp(xs)
    if np.any(~small):
        a, b = _k_steed_scaled(mu, x[~small])
        kmu[~small] = a
        k1[~small] = b
    for i in range(1, nl + 1):
        kmu, k1 = k1, (mu + i) * 2.0 / x * k1 + kmu
    return kmu, k1


def _wrap(fn):
    def inner(nu, x):
        nu, xa = _prepare(nu, x)
        scalar = xa.ndim == 0
        out = fn(nu, np.atleast_1d(xa))
        return float(out[0]) if scalar else out
    inner.__name__ = fn.__name__
    inner.__doc__ = fn.__doc__
    return inner


@_wrap
def bessel_ie(nu, x):
    """Exponentially scaled e^{-x} I_nu(x)."""
    out = np.empty_like(x)
    small = x <= _SERIES_MAX_X
    if np.any(small):
        out[small] = _i_series(nu, x[small]) * np.exp(-x[small])
    if np.any(~small):
        out[~small] = _i_hankel_scaled(nu, x[~small])
    return out


@_wrap
def bessel_i(nu, x):
    """Modified Bessel function of the first kind I_nu(x), x > 0.

    Relative accuracy is about 1e-15 for x <= 30; for larger x the
    result overflows past x ~ 700, use :func:`bessel_ie` there.
    """
    out = np.empty_like(x)
    small = x <= _SERIES_MAX_X
    if np.any(small):
        out[small] = _i_series(nu, x[small])
    if np.any(~small):
        xl = x[~small]
        out[~small] = _i_hankel_scaled(nu, xl) * np.exp(xl)
    return out


@_wrap
def bessel_ke(nu, x):
    """Exponentially scaled e^{x} K_nu(x)."""
    return _k_pair_scaled(nu, x)[0]


@_wrap
def bessel_k(nu, x):
    """Modified Bessel function of the second kind K_nu(x), x > 0."""
    return _k_pair_scaled(nu, x)[0] * np.exp(-x)


@_wrap
def bessel_ip(nu, x):
    """Derivative I_nu'(x) = I_{nu+1}(x) + (nu/x) I_nu(x)."""
    return bessel_i(nu + 1.0, x) + nu / x * bessel_i(nu, x)


@_wrap
def bessel_kp(nu, x):
    """Derivative K_nu'(x) = -K_{nu+1}(x) + (nu/x) K_nu(x)."""
    k0, k1 = _k_pair_scaled(nu, x)
    return (nu / x * k0 - k1) * np.exp(-x)


def wronskian_ki(nu, w):
    """W[K_nu, I_nu](w) = K I' - K' I from recurrence derivatives.

    The identity value is 1/w; computed with the exponentials cancelled so
    it stays finite for large ``w``.
    """
    nu, wa = _prepare(nu, w)
    scalar = wa.ndim == 0
    wa = np.atleast_1d(wa)
    k0, k1 = _k_pair_scaled(nu, wa)
    i0 = bessel_ie(nu, wa)
    i1 = bessel_ie(nu + 1.0, wa)
    ip = i1 + nu / wa * i0
    kp = nu / wa * k0 - k1
    out = k0 * ip - kp * i0
    return float(out[0]) if scalar else out
