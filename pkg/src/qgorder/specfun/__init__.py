"""Special functions used by the extension theory, kernels and oracles."""

from .bessel import (
    bessel_i,
    bessel_ie,
    bessel_ip,
    bessel_k,
    bessel_ke,
    bessel_kp,
    wronskian_ki,
)
from .errfn import erfc_complex, erfcx, erfcx_complex, faddeeva
from .gamma import (
    EULER_GAMMA,
    digamma,
    digamma_complex,
    gamma,
    gamma_complex,
    loggamma_complex,
    rgamma,
)
from .hypergeom import DEFAULT_CONTROL, SeriesControl, kummer_m, tricomi_u
from .orthopoly import laguerre

__all__ = [
    "DEFAULT_CONTROL",
    "EULER_GAMMA",
    "SeriesControl",
    "bessel_i",
    "bessel_ie",
    "bessel_ip",
    "bessel_k",
    "bessel_ke",
    "bessel_kp",
    "digamma",
    "digamma_complex",
    "erfc_complex",
    "erfcx",
    "erfcx_complex",
    "faddeeva",
    "gamma",
    "gamma_complex",
    "kummer_m",
    "laguerre",
    "loggamma_complex",
    "rgamma",
    "tricomi_u",
    "wronskian_ki",
]
