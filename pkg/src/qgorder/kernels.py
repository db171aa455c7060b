"""Free half-line kernels of e^{t Delta} and e^{i t Delta} with a boundary condition at 0.

All kernels use diffusion constant 1.  Time-sliced propagators call them with
the slice time hbar * t / n.

The Robin correction term beta^{-1} exp(t/beta^2 + s/beta) erfc(B), with
s = y + z and B = sqrt(t)/beta + s / (2 sqrt(t)), is evaluated as
beta^{-1} exp(-s^2/4t) erfcx(B): the identity B^2 = t/beta^2 + s/beta + s^2/4t
cancels the large exponentials exactly.  In real time t -> i t gives
beta^{-1} exp(i s^2/4t) erfcx(B) with principal square roots.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, MethodMismatch, Unsupported
from .extensions import BCKind, BoundaryCondition
from .specfun import erfcx, erfcx_complex


class TimeMode(str, enum.Enum):
    IMAGINARY = "imaginary"
    REAL = "real"


_SQRT_I = cmath.exp(0.25j * math.pi)


def _args(t, y, z):
    if not t > 0:
        raise DomainError("kernel time must be positive")
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(y < 0) or np.any(z < 0):
        raise DomainError("half-line kernels need y, z >= 0")
    return float(t), y, z


def _out(v):
    return v if np.ndim(v) else v[()]


def _images(t, y, z):
    c = 1.0 / math.sqrt(4.0 * math.pi * t)
    return c * np.exp(-((y - z) ** 2) / (4 * t)), c * np.exp(-((y + z) ** 2) / (4 * t))


def heat_dirichlet(t, y, z):
    """Absorbing kernel (4 pi t)^{-1/2} [e^{-(y-z)^2/4t} - e^{-(y+z)^2/4t}]."""
    t, y, z = _args(t, y, z)
    # -expm1 form keeps relative accuracy when y z / t is small
    c = 1.0 / math.sqrt(4.0 * math.pi * t)
    return _out(-c * np.exp(-((y - z) ** 2) / (4 * t)) * np.expm1(-y * z / t))


def heat_neumann(t, y, z):
    """Reflecting kernel (4 pi t)^{-1/2} [e^{-(y-z)^2/4t} + e^{-(y+z)^2/4t}]."""
    t, y, z = _args(t, y, z)
    a, b = _images(t, y, z)
    return _out(a + b)


def _check_beta(beta):
    beta = float(beta)
    if math.isnan(beta):
        raise ValueError("beta must not be NaN")
    if beta < 0:
        raise Unsupported("Robin kernels with beta < 0 carry a bound state and are not supported")
    return beta


def heat_robin(beta, t, y, z):
    """Kernel of e^{t Delta} with psi(0) = beta psi'(0), beta >= 0.

    beta = 0 and beta = inf return the Dirichlet and Neumann kernels.
    """
    beta = _check_beta(beta)
    if beta == 0.0:
        return heat_dirichlet(t, y, z)
    if math.isinf(beta):
        return heat_neumann(t, y, z)
    t, y, z = _args(t, y, z)
    a, b = _images(t, y, z)
    s = y + z
    rt = math.sqrt(t)
    corr = np.exp(-s * s / (4 * t)) * erfcx(rt / beta + s / (2 * rt)) / beta
    return _out(a + b - corr)


def _schro_images(t, y, z):
    c = 1.0 / (cmath.sqrt(4.0 * math.pi * t) * _SQRT_I)
    return c * np.exp(1j * (y - z) ** 2 / (4 * t)), c * np.exp(1j * (y + z) ** 2 / (4 * t))


def schro_dirichlet(t, y, z):
    """Kernel of e^{i t Delta} with psi(0) = 0."""
    t, y, z = _args(t, y, z)
    a, b = _schro_images(t, y, z)
    return _out(a - b)


def schro_neumann(t, y, z):
    """Kernel of e^{i t Delta} with psi'(0) = 0."""
    t, y, z = _args(t, y, z)
    a, b = _schro_images(t, y, z)
    return _out(a + b)


def schro_robin(beta, t, y, z):
    """Kernel of e^{i t Delta} with psi(0) = beta psi'(0), beta >= 0."""
    beta = _check_beta(beta)
    if beta == 0.0:
        return schro_dirichlet(t, y, z)
    if math.isinf(beta):
        return schro_neumann(t, y, z)
    t, y, z = _args(t, y, z)
    a, b = _schro_images(t, y, z)
    s = y + z
    rit = math.sqrt(t) * _SQRT_I
    arg = rit / beta + s / (2 * rit)
    corr = np.exp(1j * s * s / (4 * t)) * erfcx_complex(arg) / beta
    return _out(a + b - corr)


@dataclass(frozen=True)
class KernelSpec:
    """One of the six analytic kernels, selected by time mode and boundary condition."""

    time_mode: TimeMode
    bc: BoundaryCondition
    t: float

    def __post_init__(self):
        object.__setattr__(self, "time_mode", TimeMode(self.time_mode))
        if not self.t > 0:
            raise DomainError("kernel time must be positive")
        if self.bc.kind is BCKind.GENERAL:
            raise MethodMismatch("analytic kernels exist for Dirichlet, Neumann and Robin only")
        if self.bc.kind is BCKind.ROBIN:
            _check_beta(self.bc.beta)

    @property
    def beta(self) -> float:
        k = self.bc.kind
        if k is BCKind.DIRICHLET:
            return 0.0
        if k is BCKind.NEUMANN:
            return math.inf
        return self.bc.beta

    def __call__(self, y, z):
        fn = heat_robin if self.time_mode is TimeMode.IMAGINARY else schro_robin
        return fn(self.beta, self.t, y, z)
