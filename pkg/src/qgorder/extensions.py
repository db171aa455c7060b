"""Self-adjoint extensions of the flat Hamiltonian near y = 0.

Reference modes are the zero-energy solutions

    phi1(y) = sqrt(y/2) K_nu(w),  phi2(y) = sqrt(y/2) I_nu(w),  w = sqrt(Lambda) y^2 / (4 hbar),

normalised so that W[phi1, phi2] = 1.  For |J+| < 1 every extension is fixed
by an angle theta: states in its domain behave near 0 as
C (sin(theta) B1(y) + cos(theta) B2(y)), where B1 = C1 y^{1/2 - 2nu} (or the
logarithmic branch at J+ = 0) and B2 = C2 y^{1/2 + 2nu} are the leading
branches of phi1 and phi2.  At |J+| = 1/2 this angle maps onto the Robin
parameter of psi(0) = beta psi'(0) by beta = (C1/C2) tan(theta).

The exact phi1 also contains a multiple of phi2,
phi1 = B1 - mu_mix B2 + ..., with mu_mix = pi / (2 sin(nu pi)) for nu > 0 and
Euler's constant for nu = 0.  ``basis="modes"`` in :func:`fit_theta` reports
the angle of the decomposition into the exact modes instead.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    ExtrapolationUnstable,
    FitDegenerate,
    RepresentationMismatch,
    Unsupported,
    WrongRegime,
)
from .ordering import OrderingInfo, PhysicalConstants, Regime, WaveFunction
from .specfun import (
    EULER_GAMMA,
    bessel_i,
    bessel_ip,
    bessel_k,
    bessel_kp,
    gamma,
    tricomi_u,
)

HALF_PI = 0.5 * math.pi
_EDGE_TOL = 1e-10  # angles this close to -pi/2 are identified with pi/2


# ------------------------------------------------------------ reference modes


@dataclass(frozen=True)
class ReferenceModes:
    ordering: OrderingInfo
    constants: PhysicalConstants
    nu: float
    c1: float | None
    c2: float
    k: float | None
    mu_mix: float

    @property
    def w_scale(self) -> float:
        return math.sqrt(self.constants.lam) / (4.0 * self.constants.hbar)

    def _w(self, y):
        y = np.asarray(y, dtype=float)
        return y, self.w_scale * y * y

    def phi1(self, y):
        y, w = self._w(y)
        return np.sqrt(0.5 * y) * bessel_k(self.nu, w)

    def phi2(self, y):
        y, w = self._w(y)
        return np.sqrt(0.5 * y) * bessel_i(self.nu, w)

    def dphi1(self, y):
        y, w = self._w(y)
        s = np.sqrt(0.5 * y)
        return s * (0.5 / y * bessel_k(self.nu, w) + bessel_kp(self.nu, w) * 2.0 * w / y)

    def dphi2(self, y):
        y, w = self._w(y)
        s = np.sqrt(0.5 * y)
        return s * (0.5 / y * bessel_i(self.nu, w) + bessel_ip(self.nu, w) * 2.0 * w / y)

    def wronskian(self, y):
        """W[phi1, phi2](y) = phi1 phi2' - phi1' phi2; identically 1."""
        return self.phi1(y) * self.dphi2(y) - self.dphi1(y) * self.phi2(y)

    def branch1(self, y):
        """Leading small-y branch of phi1."""
        y = np.asarray(y, dtype=float)
        if self.nu == 0.0:
            return np.sqrt(y) * (-math.sqrt(2.0) * np.log(y) + self.k)
        return self.c1 * y ** (0.5 - 2.0 * self.nu)

    def branch2(self, y):
        """Leading small-y branch of phi2."""
        y = np.asarray(y, dtype=float)
        return self.c2 * y ** (0.5 + 2.0 * self.nu)

    def modes_to_branches(self, s1, s2):
        """(s1, s2) in s1 phi1 + s2 phi2 -> coefficients of (B1, B2)."""
        return s1, s2 - self.mu_mix * s1

    def branches_to_modes(self, b1, b2):
        return b1, b2 + self.mu_mix * b1


def make_reference_modes(ordering: OrderingInfo, constants: PhysicalConstants) -> ReferenceModes:
    """Reference modes with the closed-form coefficients C1, C2 and k."""
    nu = ordering.nu
    r = math.sqrt(constants.lam) / (8.0 * constants.hbar)
    c2 = 1.0 / math.sqrt(2.0) / gamma(nu + 1.0) * r ** nu
    if nu == 0.0:
        c1 = None
        k = -math.log(r) / math.sqrt(2.0)
        mu = EULER_GAMMA
    else:
        s = math.sin(nu * math.pi)
        c1 = math.pi / (2.0 * math.sqrt(2.0)) / s * r ** (-nu) / gamma(1.0 - nu) if nu < 1.0 else None
        k = None
        mu = math.pi / (2.0 * s) if abs(s) > 1e-15 else math.inf
    return ReferenceModes(ordering, constants, nu, c1, c2, k, mu)


# -------------------------------------------------------- boundary conditions


class BCKind(str, enum.Enum):
    DIRICHLET = "Dirichlet"
    NEUMANN = "Neumann"
    ROBIN = "Robin"
    GENERAL = "General"


def _wrap_angle(theta: float) -> float:
    """Map an angle into (-pi/2, pi/2] modulo pi."""
    t = math.fmod(theta, math.pi)
    if t <= -HALF_PI + _EDGE_TOL:
        t += math.pi
    elif t > HALF_PI + _EDGE_TOL:
        t -= math.pi
    if abs(t - HALF_PI) <= _EDGE_TOL:
        t = HALF_PI
    return t + 0.0


@dataclass(frozen=True)
class BoundaryCondition:
    """Extension selector; theta is the canonical coordinate.

    ``beta`` (the Robin parameter) is stored only when it was supplied or
    derived at |J+| = 1/2; L = tan(theta) is always available.
    """

    theta: float
    beta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "theta", _wrap_angle(float(self.theta)))
        if self.beta is not None:
            b = float(self.beta)
            if math.isnan(b):
                raise ValueError("beta must not be NaN")
            object.__setattr__(self, "beta", b)

    @classmethod
    def dirichlet(cls) -> "BoundaryCondition":
        return cls(0.0, 0.0)

    @classmethod
    def neumann(cls) -> "BoundaryCondition":
        return cls(HALF_PI, math.inf)

    @classmethod
    def from_L(cls, L: float) -> "BoundaryCondition":
        return cls(HALF_PI if math.isinf(L) else math.atan(L))

    @classmethod
    def robin(cls, beta: float, modes: ReferenceModes) -> "BoundaryCondition":
        return cls(theta_from_beta(modes, beta), beta)

    @property
    def L(self) -> float:
        return math.inf if self.theta == HALF_PI else math.tan(self.theta)

    @property
    def kind(self) -> BCKind:
        if self.theta == 0.0:
            return BCKind.DIRICHLET
        if self.beta is not None:
            return BCKind.NEUMANN if math.isinf(self.beta) else BCKind.ROBIN
        if self.theta == HALF_PI:
            return BCKind.NEUMANN
        return BCKind.GENERAL

    def with_modes(self, modes: ReferenceModes) -> "BoundaryCondition":
        """Attach beta when the ordering sits at |J+| = 1/2."""
        if modes.ordering.regime is Regime.CRITICAL_NO_POTENTIAL and self.beta is None:
            return BoundaryCondition(self.theta, beta_from_theta(modes, self.theta))
        return self

    def describe(self) -> str:
        k = self.kind
        if k is BCKind.ROBIN:
            return f"Robin(beta={self.beta!r})"
        if k is BCKind.GENERAL:
            return f"General(theta={self.theta!r})"
        return k.value


def _require_critical(modes: ReferenceModes):
    if modes.ordering.regime is not Regime.CRITICAL_NO_POTENTIAL:
        raise WrongRegime(
            f"the beta <-> theta map needs |J+| = 1/2, got |J+| = {modes.ordering.abs_j_plus!r}"
        )


def beta_from_theta(modes: ReferenceModes, theta: float) -> float:
    """Robin parameter beta = (C1/C2) tan(theta); theta = pi/2 gives inf."""
    _require_critical(modes)
    theta = _wrap_angle(theta)
    if theta == HALF_PI:
        return math.inf
    return modes.c1 / modes.c2 * math.tan(theta)


def theta_from_beta(modes: ReferenceModes, beta: float) -> float:
    _require_critical(modes)
    if math.isinf(beta):
        return HALF_PI
    return _wrap_angle(math.atan2(beta * modes.c2, modes.c1))


# ------------------------------------------------------------ deficiency


def deficiency_indices(ordering: OrderingInfo) -> tuple[int, int]:
    return (0, 0) if ordering.abs_j_plus >= 1.0 else (1, 1)


@dataclass(frozen=True)
class DeficiencySolution:
    """The L^2-at-infinity solution of (H - lambda) psi = 0, lambda = +i or -i.

    psi(y) = z^beta e^{-z/2} U(alpha, gamma; z) with z = sqrt(Lambda) y^2 / (2 hbar),
    gamma = 1 + |J+| and alpha = (1 + |J+|)/2 - lambda / (2 hbar sqrt(Lambda)).
    ``sign="plus"`` is the solution for lambda = +i.
    """

    ordering: OrderingInfo
    constants: PhysicalConstants
    sign: str = "plus"

    def __post_init__(self):
        if self.sign not in ("plus", "minus"):
            raise ValueError("sign must be 'plus' or 'minus'")

    @property
    def eigenvalue(self) -> complex:
        return 1j if self.sign == "plus" else -1j

    @property
    def alpha(self) -> complex:
        a = self.ordering.abs_j_plus
        return 0.5 * (1.0 + a) - self.eigenvalue / (2.0 * self.constants.omega)

    @property
    def gamma_chg(self) -> float:
        return 1.0 + self.ordering.abs_j_plus

    def z(self, y):
        return math.sqrt(self.constants.lam) / (2.0 * self.constants.hbar) * np.asarray(y, dtype=float) ** 2

    def __call__(self, y):
        z = self.z(y)
        return z ** self.ordering.beta_exp * np.exp(-0.5 * z) * tricomi_u(self.alpha, self.gamma_chg, z)

    def residual(self, y, h: float = 2e-3) -> float:
        """max |(H - lambda) psi| / max |psi| on ``y`` by a 5-point stencil."""
        y = np.asarray(y, dtype=float)
        f = [self(y + k * h) for k in (-2, -1, 0, 1, 2)]
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
        hb = self.constants.hbar
        v = hb * hb * self.ordering.q / y ** 2 + 0.25 * self.constants.lam * y ** 2
        r = -hb * hb * d2 + (v - self.eigenvalue) * f[2]
        return float(np.max(np.abs(r)) / np.max(np.abs(f[2])))


@dataclass(frozen=True)
class IntegrabilityTable:
    """Cutoff integrals I(eps) = int_eps^1 |psi_2^+|^2 dy and fits of their growth."""

    eps: np.ndarray
    integrals: np.ndarray
    differences: np.ndarray
    shrink_factors: np.ndarray
    power_slope: float
    density_slope: float
    log_slope: float
    log_r2: float
    convergent: bool

    def rows(self):
        d = np.concatenate([[np.nan], self.differences])
        return list(zip(self.eps.tolist(), self.integrals.tolist(), d.tolist()))


def _r_squared(x, y):
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    ss = np.sum((y - y.mean()) ** 2)
    return coef[0], (1.0 - np.sum(resid ** 2) / ss) if ss > 0 else 1.0


def verify_deficiency_integrability(ordering: OrderingInfo, constants: PhysicalConstants,
                                    eps_list, nodes_per_decade: int = 48) -> IntegrabilityTable:
    """Tabulate int_eps^1 |psi_2^+|^2 dy for decreasing cutoffs.

    The integrals are done in s = ln y with Gauss-Legendre panels (one per
    decade), where the integrand y |psi|^2 is a smooth exponential-power.
    ``power_slope`` is the log-log slope of I against eps over the last
    three cutoffs.  ``density_slope`` is the log-log slope of the mean
    density |psi|^2 ~ -dI/deps on each cutoff interval, i.e. the exponent
    1 - 2|J+| of the divergent integrand (I itself then scales with one power
    more).  ``log_slope``/``log_r2`` fit I against ln(1/eps) and
    ``shrink_factors`` are ratios of successive differences.
    """
    eps = np.asarray(eps_list, dtype=float)
    if eps.ndim != 1 or eps.size < 3:
        raise ValueError("need at least three cutoffs")
    if np.any((eps <= 0) | (eps >= 1)) or np.any(np.diff(eps) >= 0):
        raise ValueError("cutoffs must be decreasing and inside (0, 1)")
    sol = DeficiencySolution(ordering, constants, "plus")
    xg, wg = np.polynomial.legendre.leggauss(nodes_per_decade)
    edges = np.concatenate([[0.0], np.log(eps)])
    pieces = []
    for hi, lo in zip(edges[:-1], edges[1:]):
        npan = max(1, int(math.ceil((hi - lo) / math.log(10.0))))
        cuts = np.linspace(lo, hi, npan + 1)
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            s = 0.5 * (b - a) * xg + 0.5 * (a + b)
            y = np.exp(s)
            total += 0.5 * (b - a) * float(np.sum(wg * y * np.abs(sol(y)) ** 2))
        pieces.append(total)
    integrals = np.cumsum(pieces)
    diffs = np.diff(integrals)
    with np.errstate(divide="ignore", invalid="ignore"):
        shrink = diffs[:-1] / diffs[1:]
    tail = slice(-3, None)
    ps = np.polyfit(np.log(eps[tail]), np.log(integrals[tail]), 1)[0]
    dens = diffs / (eps[:-1] - eps[1:])
    mid = np.sqrt(eps[:-1] * eps[1:])
    ds = np.polyfit(np.log(mid[-3:]), np.log(dens[-3:]), 1)[0]
    ls, lr2 = _r_squared(np.log(1.0 / eps), integrals)
    convergent = bool(np.all(shrink >= 4.0))
    return IntegrabilityTable(eps, integrals, diffs, shrink, float(ps), float(ds),
                              float(ls), float(lr2), convergent)


# ------------------------------------------------------ boundary functionals


_NOISE = 1e-7


class GammaValue(NamedTuple):
    value: complex
    error: float


def _flat_spline(psi: WaveFunction):
    if not psi.is_flat:
        raise RepresentationMismatch("boundary functionals act on FlatY states")
    s = np.log(psi.grid)
    re = CubicSpline(s, psi.values.real)
    im = CubicSpline(s, psi.values.imag)

    def value(y):
        t = np.log(y)
        return re(t) + 1j * im(t)

    def deriv(y):
        t = np.log(y)
        return (re(t, 1) + 1j * im(t, 1)) / y

    return value, deriv


def _aitken(w0, w1, w2, tiny):
    d1 = w1 - w0
    d2 = w2 - w1
    if abs(d1) <= tiny and abs(d2) <= tiny:
        return w2
    den = d2 - d1
    if abs(den) <= 1e-300:
        raise ExtrapolationUnstable("Wronskian sequence has no geometric convergence")
    r = d2 / d1
    if not (abs(r) < 0.95):
        raise ExtrapolationUnstable(f"Wronskian sequence does not settle (ratio {complex(r):.3g})")
    return w2 - d2 * d2 / den


def gamma_functional(i: int, modes: ReferenceModes, psi: WaveFunction, y_start: float | None = None) -> GammaValue:
    """Gamma_i psi = lim_{y->0+} W[phi_i, psi](y).

    The Wronskian is evaluated at y_start / 2^k, k = 0..3 (psi and psi' from
    a cubic spline in ln y), and extrapolated by Aitken's delta-squared
    step on two overlapping triples; their spread is the error estimate.
    """
    if i not in (1, 2):
        raise ValueError("i must be 1 or 2")
    value, deriv = _flat_spline(psi)
    y0 = 16.0 * psi.grid[0] if y_start is None else float(y_start)
    if y0 / 8.0 < psi.grid[0] * (1 - 1e-12) or y0 > psi.grid[-1]:
        raise ValueError("y_start must leave room for three halvings inside the grid")
    ys = y0 / 2.0 ** np.arange(4)
    if i == 1:
        ph, dph = modes.phi1(ys), modes.dphi1(ys)
    else:
        ph, dph = modes.phi2(ys), modes.dphi2(ys)
    t1 = ph * deriv(ys)
    t2 = dph * value(ys)
    w = t1 - t2
    # interpolation noise floor relative to the size of the cancelling terms
    tiny = _NOISE * float(np.max(np.abs(t1) + np.abs(t2)))
    a = _aitken(w[0], w[1], w[2], tiny)
    b = _aitken(w[1], w[2], w[3], tiny)
    err = max(float(abs(b - a)), float(np.max(np.abs(np.diff(w)))) if abs(b - w[3]) == 0 else 0.0)
    return GammaValue(complex(b), err)


# ------------------------------------------------------------------ fit theta


def fit_theta(modes: ReferenceModes, psi: WaveFunction, window=(1e-3, 5e-2),
              basis: str = "branches", corrections: bool | None = None) -> float:
    """Extension angle of ``psi`` from a least-squares fit near y = 0.

    psi is fitted on the window by s1 phi1 + s2 phi2, optionally plus the
    energy corrections y^2 phi1, y^2 phi2 that any eigenfunction carries
    (``corrections=None`` enables them when the window holds at least eight
    points).  ``basis="branches"`` returns the angle of the leading-branch
    coefficients (the convention of beta = (C1/C2) tan theta, Dirichlet at
    0 and Neumann at pi/2); ``basis="modes"`` the angle of (s1, s2) itself.
    The result lies in (-pi/2, pi/2] and is invariant under psi -> c psi.
    """
    if modes.ordering.abs_j_plus >= 1.0:
        raise WrongRegime("extension angles exist only for |J+| < 1")
    if basis not in ("branches", "modes"):
        raise ValueError("basis must be 'branches' or 'modes'")
    if not psi.is_flat:
        raise RepresentationMismatch("fit_theta acts on FlatY states")
    lo, hi = window
    if not (0 < lo < hi):
        raise ValueError("window must satisfy 0 < y_lo < y_hi")
    sel = (psi.grid >= lo) & (psi.grid <= hi)
    y = psi.grid[sel]
    v = psi.values[sel]
    if corrections is None:
        corrections = y.size >= 8
    cols = [modes.phi1(y), modes.phi2(y)]
    if corrections:
        cols += [y * y * cols[0], y * y * cols[1]]
    if y.size < len(cols):
        raise FitDegenerate(f"window holds {y.size} points, need at least {len(cols)}")
    A = np.column_stack(cols)
    norms = np.linalg.norm(A, axis=0)
    An = A / norms
    if np.linalg.cond(An) > 1e12:
        raise FitDegenerate("window does not resolve the two branches")
    coef, *_ = np.linalg.lstsq(An.astype(complex), v, rcond=None)
    s1, s2 = coef[0] / norms[0], coef[1] / norms[1]
    if basis == "branches":
        c1, c2 = modes.modes_to_branches(s1, s2)
    else:
        c1, c2 = s1, s2
    num = float(np.real(c1 * np.conj(c2)))
    den = float(abs(c2) ** 2)
    if num == 0.0 and den == 0.0:
        raise FitDegenerate("state has no resolvable component near the origin")
    return _wrap_angle(math.atan2(num, den))


def branch_state(modes: ReferenceModes, theta: float, y) -> np.ndarray:
    """sin(theta) phi1 + cos(theta) phi2 - re-expressed so its branch angle is theta."""
    s1, s2 = modes.branches_to_modes(math.sin(theta), math.cos(theta))
    return s1 * modes.phi1(y) + s2 * modes.phi2(y)


def check_robin_support(beta: float):
    if beta < 0:
        raise Unsupported("Robin parameters beta < 0 (bound-state regime) are not supported")
