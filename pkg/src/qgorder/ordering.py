"""Factor-ordering algebra and the curved/flat representations.

An ordering (j1, j2, j3) with j1 + j2 + j3 = 1 enters the flat Hamiltonian

    H = -hbar^2 d^2/dy^2 + hbar^2 q / y^2 + Lambda y^2 / 4,   q = J+^2 - 1/4,

only through J+ = j3 + j1.  The weight exponent J- = j3 - j1 fixes the measure
l^{J-} dl of the curved representation, which maps unitarily onto L^2(dy) by
Psi -> l^m Psi with m = 1/4 + J-/2 and y = 2 sqrt(l).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConstraintViolation, DomainError, IncompatibleOrderings, RepresentationMismatch

SUM_TOL = 1e-12
_REGIME_TOL = 1e-12


@dataclass(frozen=True)
class PhysicalConstants:
    """hbar and the cosmological constant (``lam``); both must be positive."""

    hbar: float = 1.0
    lam: float = 4.0

    def __post_init__(self):
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError("hbar must be a positive finite number")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError("lambda must be a positive finite number")

    @property
    def omega(self) -> float:
        """Level spacing unit hbar * sqrt(Lambda); E_n = omega (2n + 1 + |J+|)."""
        return self.hbar * math.sqrt(self.lam)


class Regime(str, enum.Enum):
    ESSENTIALLY_SELF_ADJOINT = "EssentiallySelfAdjoint"
    BARRIER_MULTI_EXT = "BarrierMultiExt"
    CRITICAL_NO_POTENTIAL = "CriticalNoPotential"
    WELL_UNSUPPORTED = "WellUnsupported"


def regime_of(abs_jp: float) -> Regime:
    if abs_jp >= 1.0 - _REGIME_TOL:
        return Regime.ESSENTIALLY_SELF_ADJOINT
    if abs(abs_jp - 0.5) <= _REGIME_TOL:
        return Regime.CRITICAL_NO_POTENTIAL
    if abs_jp > 0.5:
        return Regime.BARRIER_MULTI_EXT
    return Regime.WELL_UNSUPPORTED


@dataclass(frozen=True)
class OrderingInfo:
    j1: float
    j2: float
    j3: float
    j_plus: float
    j_minus: float
    q: float
    nu: float
    m: float
    beta_exp: float
    regime: Regime

    @property
    def abs_j_plus(self) -> float:
        return abs(self.j_plus)

    @property
    def propagable(self) -> bool:
        """Trotter products are defined only for |J+| >= 1/2."""
        return self.regime is not Regime.WELL_UNSUPPORTED

    @property
    def multiple_extensions(self) -> bool:
        return self.regime is not Regime.ESSENTIALLY_SELF_ADJOINT


def classify(j1: float, j2: float, j3: float) -> OrderingInfo:
    """Derived quantities and regime of the ordering (j1, j2, j3).

    Examples
    --------
    >>> classify(0.5, 0.5, 0.0).regime.value
    'CriticalNoPotential'
    """
    j1, j2, j3 = float(j1), float(j2), float(j3)
    if abs(j1 + j2 + j3 - 1.0) > SUM_TOL:
        raise ConstraintViolation(f"j1 + j2 + j3 = {j1 + j2 + j3!r}, must equal 1")
    jp = j3 + j1
    jm = j3 - j1
    a = abs(jp)
    # snap values within the constraint tolerance of a regime threshold
    for edge in (0.5, 1.0):
        if abs(a - edge) <= _REGIME_TOL:
            a = edge
            jp = math.copysign(edge, jp)
    return OrderingInfo(
        j1=j1, j2=j2, j3=j3,
        j_plus=jp, j_minus=jm,
        q=jp * jp - 0.25,
        nu=a / 2.0,
        m=0.25 + jm / 2.0,
        beta_exp=0.25 + a / 2.0,
        regime=regime_of(a),
    )


def ordering_from_jplus(j_plus: float, j_minus: float = 0.0) -> OrderingInfo:
    """Convenience constructor from (J+, J-); j2 is fixed by the constraint."""
    j1 = (j_plus - j_minus) / 2.0
    j3 = (j_plus + j_minus) / 2.0
    return classify(j1, 1.0 - j1 - j3, j3)


def effective_potential(ordering: OrderingInfo, constants: PhysicalConstants, y):
    """V(y) = hbar^2 q / y^2 + Lambda y^2 / 4 for y > 0."""
    ya = np.asarray(y, dtype=float)
    if np.any(~(ya > 0)):
        raise DomainError("the potential is defined for y > 0 only")
    v = constants.hbar ** 2 * ordering.q / ya ** 2 + 0.25 * constants.lam * ya ** 2
    if ordering.q == 0.0:
        v = 0.25 * constants.lam * ya ** 2
    return v if v.ndim else float(v)


def similarity_exponent(ordering_a: OrderingInfo, ordering_b: OrderingInfo) -> float:
    """Exponent alpha with H_b = l^{-alpha} H_a l^{alpha}, alpha = (J-a - J-b) / 2."""
    if abs(ordering_a.j_plus - ordering_b.j_plus) > SUM_TOL:
        raise IncompatibleOrderings(
            f"J+ differs ({ordering_a.j_plus!r} vs {ordering_b.j_plus!r}); "
            "orderings are not related by a similarity transform"
        )
    return 0.5 * (ordering_a.j_minus - ordering_b.j_minus)


# ---------------------------------------------------------------- wavefunctions


@dataclass(frozen=True)
class CurvedL:
    """l-representation with measure l^weight dl."""

    weight: float


@dataclass(frozen=True)
class FlatY:
    """y-representation with measure dy."""


FLAT = FlatY()


def trapezoid_weights(y):
    """Trapezoid weights on [0, y[-1]] for nodes y (all > 0) plus an origin node.

    Returns ``(w0, w)`` where ``w0`` multiplies the value at y = 0.
    """
    y = np.asarray(y, dtype=float)
    ext = np.concatenate([[0.0], y])
    d = np.diff(ext)
    w = np.empty_like(y)
    w[:-1] = 0.5 * (d[:-1] + d[1:])
    w[-1] = 0.5 * d[-1]
    return 0.5 * d[0], w


def _check_grid(grid):
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must be one-dimensional with at least two points")
    if np.any(~(grid > 0)):
        raise ValueError("grid points must be positive")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex samples on a positive grid with a representation tag.

    ``origin`` is the value at the left endpoint (y = 0 or l = 0), or None
    when it is not stored (quadratures then take it as zero, which is exact
    for states vanishing there).  A stored value enters quadratures through
    the first trapezoid cell.  In the curved representation the norm is evaluated in
    the y = 2 sqrt(l) coordinate so that it agrees node by node with the
    flat image of the state.
    """

    grid: np.ndarray
    values: np.ndarray
    representation: CurvedL | FlatY = FLAT
    origin: complex | None = None
    _w: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        g = np.array(self.grid, dtype=float)
        v = np.array(self.values, dtype=complex)
        _check_grid(g)
        if v.shape != g.shape:
            raise ValueError("grid and values must have equal length")
        g.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        if self.origin is not None:
            object.__setattr__(self, "origin", complex(self.origin))
        object.__setattr__(self, "_w", self._weights())
        if not np.isfinite(self.norm()):
            raise ValueError("state does not have a finite norm")

    @property
    def is_flat(self) -> bool:
        return isinstance(self.representation, FlatY)

    def _weights(self):
        if self.is_flat:
            return trapezoid_weights(self.grid)
        # l^J- dl = l^{J- + 1/2} dy with y = 2 sqrt(l)
        e = self.representation.weight + 0.5
        y = 2.0 * np.sqrt(self.grid)
        w0, w = trapezoid_weights(y)
        w = w * self.grid ** e
        if e > 0:
            w0 = 0.0
        elif e < 0:
            if self.origin:
                raise ValueError("origin value is not square integrable under this weight")
            w0 = 0.0
        return w0, w

    @property
    def weights(self):
        """Quadrature weights ``(w_origin, w)`` for the representation's measure."""
        return self._w

    def inner(self, other: "WaveFunction") -> complex:
        """<self, other>, antilinear in self."""
        if self.representation != other.representation:
            raise RepresentationMismatch("inner product needs a common representation")
        if self.grid.shape != other.grid.shape or not np.array_equal(self.grid, other.grid):
            raise ValueError("inner product needs a common grid")
        w0, w = self._w
        return complex(np.sum(w * np.conj(self.values) * other.values)
                       + w0 * np.conj(self.origin_value) * other.origin_value)

    @property
    def origin_value(self) -> complex:
        return 0j if self.origin is None else self.origin

    def norm(self) -> float:
        w0, w = self._w
        return math.sqrt(float(np.sum(w * np.abs(self.values) ** 2) + w0 * abs(self.origin_value) ** 2))

    def normalized(self) -> "WaveFunction":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return self.with_values(self.values / n, None if self.origin is None else self.origin / n)

    def with_values(self, values, origin=None) -> "WaveFunction":
        """Same grid and representation, new samples (and origin value)."""
        return WaveFunction(self.grid, values, self.representation, origin)


def _resample(y_src, v_src, v0, y_dst):
    if v0 is None:
        nodes, vals = y_src, v_src
    else:
        nodes = np.concatenate([[0.0], y_src])
        vals = np.concatenate([[v0], v_src])
    out = np.zeros(y_dst.shape, dtype=complex)
    inside = (y_dst <= nodes[-1]) & (y_dst >= nodes[0])
    re = CubicSpline(nodes, vals.real)(y_dst[inside])
    im = CubicSpline(nodes, vals.imag)(y_dst[inside])
    out[inside] = re + 1j * im
    return out


def to_flat(psi: WaveFunction, ordering: OrderingInfo, grid=None) -> WaveFunction:
    """Map a curved-representation state to the flat y-representation.

    Applies Psi -> l^m Psi and relabels nodes by y = 2 sqrt(l).  With
    ``grid`` given, the result is resampled onto it by cubic splines in y
    (points beyond the source range are set to zero).
    """
    rep = psi.representation
    if not isinstance(rep, CurvedL):
        raise RepresentationMismatch("to_flat expects a CurvedL state")
    if abs(rep.weight - ordering.j_minus) > SUM_TOL:
        raise RepresentationMismatch(
            f"state weight exponent {rep.weight!r} differs from J- = {ordering.j_minus!r}"
        )
    m = ordering.m
    y = 2.0 * np.sqrt(psi.grid)
    vals = psi.grid ** m * psi.values
    v0 = psi.origin if abs(m) <= SUM_TOL else None
    if grid is None:
        return WaveFunction(y, vals, FLAT, v0)
    grid = np.asarray(grid, dtype=float)
    return WaveFunction(grid, _resample(y, vals, v0, grid), FLAT, v0)


def from_flat(psi: WaveFunction, ordering: OrderingInfo, grid=None) -> WaveFunction:
    """Inverse of :func:`to_flat`: Psi(l) = l^{-m} psi(2 sqrt(l)).

    ``grid`` (in l) triggers spline resampling in y before the map.
    """
    if not psi.is_flat:
        raise RepresentationMismatch("from_flat expects a FlatY state")
    m = ordering.m
    if grid is None:
        y, vals = psi.grid, psi.values
        l_grid = 0.25 * y * y
    else:
        l_grid = np.asarray(grid, dtype=float)
        y = 2.0 * np.sqrt(l_grid)
        vals = _resample(psi.grid, psi.values, psi.origin, y)
    v0 = psi.origin if abs(m) <= SUM_TOL else None
    return WaveFunction(l_grid, l_grid ** (-m) * vals, CurvedL(ordering.j_minus), v0)
