"""Ordering-dependent quantum Hamiltonians on the half-line.

Submodules: ``ordering`` (exponents, regimes, representations), ``specfun``
(special functions), ``extensions`` (reference modes and boundary
conditions), ``kernels`` (free half-line kernels), ``evolve`` (Trotter
propagation), ``spectral`` (eigenbases), ``mcpaths`` (path-measure Monte
Carlo) and ``cli``.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .ordering import (  # noqa: F401
    OrderingInfo,
    PhysicalConstants,
    Regime,
    WaveFunction,
    classify,
    effective_potential,
    from_flat,
    ordering_from_jplus,
    to_flat,
)
from .extensions import BoundaryCondition, fit_theta, make_reference_modes  # noqa: F401
from .grid import GridSpec  # noqa: F401
