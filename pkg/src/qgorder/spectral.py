"""Spectral oracles for the flat Hamiltonian.

The theta = 0 extension has the equispaced ladder E_n = hbar sqrt(Lambda) (2n + 1 + |J+|)
with eigenfunctions y^{|J+| + 1/2} e^{-sqrt(Lambda) y^2 / 4 hbar} L_n^{|J+|}(sqrt(Lambda) y^2 / 2 hbar).
Other extensions are reached by a symmetric tridiagonal finite-difference
discretization, checked against the exact quantization condition that follows
from the connection formula of Tricomi's function.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .errors import BasisTooSmall, RegimeError, Unsupported
from .extensions import BCKind, BoundaryCondition, make_reference_modes
from .grid import GridSpec
from .kernels import TimeMode
from .ordering import (
    OrderingInfo,
    PhysicalConstants,
    Regime,
    WaveFunction,
    effective_potential,
)
from .specfun import gamma, laguerre, rgamma

PROJECTION_WARN = 1e-3
PROJECTION_FAIL = 1e-1


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Eigenvalues and orthonormal eigenfunctions sampled on a GridSpec grid.

    ``modes`` has shape (n_modes, n_points); ``origins`` holds the values at
    y = 0 (all zero for Dirichlet bases).
    """

    ordering: OrderingInfo
    constants: PhysicalConstants
    bc: BoundaryCondition
    grid: GridSpec
    energies: np.ndarray
    modes: np.ndarray
    origins: np.ndarray
    method: str

    @property
    def n_max(self) -> int:
        return int(self.energies.size)

    @property
    def has_origin(self) -> bool:
        """Modes carry a finite value at y = 0 (non-Dirichlet, |J+| = 1/2)."""
        return self.bc.kind is not BCKind.DIRICHLET and self.ordering.regime is Regime.CRITICAL_NO_POTENTIAL

    def mode(self, k: int) -> WaveFunction:
        o = self.origins[k] if self.has_origin else None
        return self.grid.state(self.modes[k], o)

    def coefficients(self, psi: WaveFunction) -> np.ndarray:
        w0, w = self.grid.weights
        c = self.modes.conj() @ (w * psi.values) + self.origins.conj() * (w0 * psi.origin_value)
        return c

    def synthesize(self, coef) -> WaveFunction:
        coef = np.asarray(coef, dtype=complex)
        o = complex(coef @ self.origins) if self.has_origin else None
        return self.grid.state(coef @ self.modes, o)

    def gram(self) -> np.ndarray:
        w0, w = self.grid.weights
        return (self.modes.conj() * w) @ self.modes.T + w0 * np.outer(self.origins.conj(), self.origins)


def _as_grid(grid) -> GridSpec:
    if isinstance(grid, GridSpec):
        return grid
    if grid is None:
        return GridSpec()
    raise TypeError("grid must be a GridSpec")


def dirichlet_eigenbasis(ordering: OrderingInfo, constants: PhysicalConstants, n_max: int,
                         grid: GridSpec | None = None) -> SpectralBasis:
    """Exact theta = 0 eigenpairs (the lowest ``n_max``), normalized by quadrature."""
    grid = _as_grid(grid)
    a = ordering.abs_j_plus
    y = grid.nodes
    x = math.sqrt(constants.lam) / (2.0 * constants.hbar) * y * y
    w0, w = grid.weights
    modes = np.empty((n_max, y.size))
    for n in range(n_max):
        # log-space prefactor avoids overflow/underflow at large y
        u = np.exp((a + 0.5) * np.log(y) - 0.5 * x) * laguerre(n, a, x)
        u[-1] = 0.0
        modes[n] = u / math.sqrt(np.sum(w * u * u))
    energies = constants.omega * (2.0 * np.arange(n_max) + 1.0 + a)
    return SpectralBasis(ordering, constants, BoundaryCondition.dirichlet(), grid, energies,
                         modes, np.zeros(n_max), "exact")


def _first_row_matched(ordering, constants, h):
    """Diagonal entry making the first Dirichlet row exact on the regular local solution phi2."""
    modes = make_reference_modes(ordering, constants)
    f = modes.phi2(np.array([h, 2.0 * h]))
    return constants.hbar ** 2 * f[1] / (f[0] * h * h)


def _robin_parameter(ordering, constants, bc) -> float:
    """Robin parameter of the extension in the variable rho = y^{2|J+|}: (C1/C2) tan theta."""
    if bc.theta < 0:
        raise Unsupported("extension angles theta < 0 (beta < 0, bound-state regime) are not supported")
    if bc.theta == math.pi / 2:
        return math.inf
    modes = make_reference_modes(ordering, constants)
    return modes.c1 / modes.c2 * math.tan(bc.theta)


def _rho_scheme(ordering, constants, beta, grid, n_max):
    """Eigenpairs for 1/2 <= |J+| < 1 with u = y^{1/2-|J+|} w(rho), rho = y^{2|J+|}.

    The inverse-square term cancels and -hbar^2 u'' + V u = E u becomes
    -2a hbar^2 w'' + R (Lambda y^2/4 - E) w = 0 with a = |J+| and the
    integrable weight R = y^{2-4a} / 2a, while the extension condition turns
    into w(0) = beta w'(0).  The stiffness matrix is the standard three-point
    one (ghost point at rho = 0); the mass is R integrated exactly over each
    cell.  At a = 1/2 this is the plain ghost-point scheme in y.
    """
    a = ordering.abs_j_plus
    hb2 = constants.hbar ** 2
    N = grid.n_points
    P = grid.y_max ** (2.0 * a)
    h = P / N
    rho = h * np.arange(N)  # node N (rho = P) is the zero closure
    g = (1.0 - 2.0 * a) / a + 1.0

    def cum_mass(r):
        return r ** g / (g * 2.0 * a)

    edges = np.concatenate([[0.0], rho[1:] - 0.5 * h, [rho[-1] + 0.5 * h]])
    mass = np.diff(cum_mass(edges))
    yr = rho ** (0.5 / a)
    c = 2.0 * a * hb2 / h
    K = np.full(N, 2.0 * c) + mass * 0.25 * constants.lam * yr ** 2
    off = np.full(N - 1, -c)
    if beta == 0.0:
        K, mass, off, rho_used = K[1:], mass[1:], off[1:], rho[1:]
    else:
        K[0] = c + (0.0 if math.isinf(beta) else 2.0 * a * hb2 / beta)
        rho_used = rho
    sc = 1.0 / np.sqrt(mass)
    evals, vecs = eigh_tridiagonal(K * sc * sc, off * sc[:-1] * sc[1:], select="i", select_range=(0, n_max - 1))
    w = vecs * sc[:, None]  # w^T M w = 1
    return evals, rho_used, w


def fd_eigensolve(ordering: OrderingInfo, constants: PhysicalConstants, bc: BoundaryCondition,
                  grid: GridSpec | None = None, n_max: int = 6, first_row: str = "plain") -> SpectralBasis:
    """Lowest ``n_max`` eigenpairs of a three-point discretization.

    Dirichlet uses nodes y_1..y_{N-1} with u(0) = u(y_max) = 0;
    ``first_row="matched"`` replaces the first diagonal entry by the one that
    is exact on the regular local solution.  Any other extension (theta in
    (0, pi/2], 1/2 <= |J+| < 1) is solved in the variable rho = y^{2|J+|},
    where it becomes a Robin condition w(0) = beta w'(0) with
    beta = (C1/C2) tan theta; at |J+| = 1/2 that is the physical Robin
    parameter and the scheme is the ghost-point one in y.  Eigenpairs come
    from LAPACK bisection and inverse iteration on symmetric tridiagonal
    matrices.

    For 1/2 < |J+| < 1 and theta != 0 the modes diverge like y^{1/2-|J+|} at
    the origin; they are interpolated onto the grid and normalized in rho, so
    grid quadrature of them is only first-order accurate near y = 0.  The
    eigenvalue error there is O(h^p) with p falling from 2 towards 1 as
    |J+| -> 1 (about 1.8 at |J+| = 0.75, 1.3 at 0.9): the regular part of w
    carries a non-analytic rho^{1/|J+|} correction.
    """
    grid = _as_grid(grid)
    if first_row not in ("plain", "matched"):
        raise ValueError("first_row must be 'plain' or 'matched'")
    kind = bc.kind
    a = ordering.abs_j_plus
    if kind is not BCKind.DIRICHLET:
        if a >= 1.0:
            raise RegimeError("|J+| >= 1 admits only one self-adjoint extension (theta = 0)")
        if ordering.regime is Regime.WELL_UNSUPPORTED:
            raise RegimeError("non-Dirichlet extensions for |J+| < 1/2 are not implemented")
        if ordering.regime is Regime.CRITICAL_NO_POTENTIAL:
            bc = bc.with_modes(make_reference_modes(ordering, constants))
    N = grid.n_points
    y = grid.nodes
    w0, w = grid.weights
    if kind is BCKind.DIRICHLET:
        c = constants.hbar ** 2 / grid.h ** 2
        d = 2.0 * c + effective_potential(ordering, constants, y[:-1])
        if first_row == "matched":
            d[0] = _first_row_matched(ordering, constants, grid.h)
        evals, vecs = eigh_tridiagonal(d, np.full(N - 2, -c), select="i", select_range=(0, n_max - 1))
        origins = np.zeros(n_max)
        inner = np.zeros((n_max, N))
        inner[:, :-1] = vecs.T
        nrm = np.sqrt(np.sum(w * inner * inner, axis=1))
    else:
        beta = _robin_parameter(ordering, constants, bc)
        evals, rho, wv = _rho_scheme(ordering, constants, beta, grid, n_max)
        if ordering.regime is Regime.CRITICAL_NO_POTENTIAL:
            origins = wv[0].copy()
            inner = np.zeros((n_max, N))
            inner[:, :-1] = wv[1:].T
            nrm = np.sqrt(np.sum(w * inner * inner, axis=1) + w0 * origins ** 2)
        else:
            rr = np.concatenate([rho, [grid.y_max ** (2.0 * a)]])
            inner = np.empty((n_max, N))
            for k in range(n_max):
                spl = CubicSpline(rr, np.concatenate([wv[:, k], [0.0]]))
                inner[k] = y ** (0.5 - a) * spl(y ** (2.0 * a))
            inner[:, -1] = 0.0
            origins = np.zeros(n_max)
            nrm = np.ones(n_max)  # already unit norm in rho
    for k in range(n_max):
        u = inner[k]
        # sign convention: positive at the first non-negligible sample from y = 0
        ref = origins[k] if origins[k] != 0 else u[np.argmax(np.abs(u) > 1e-8 * np.max(np.abs(u)))]
        sgn = 1.0 if ref > 0 else -1.0
        inner[k] = sgn * u / nrm[k]
        origins[k] = sgn * origins[k] / nrm[k]
    return SpectralBasis(ordering, constants, bc, grid, np.asarray(evals), inner, origins, "fd")


def quantization_function(ordering: OrderingInfo, constants: PhysicalConstants, theta: float, energy: float) -> float:
    """Entire function of E whose zeros are the eigenvalues of the theta extension.

    The solution decaying at infinity, y^{1/2+a} e^{-x/2} U(a_+, 1+a, x) with
    a = |J+|, x = sqrt(Lambda) y^2 / 2 hbar and a_{+-} = (1 +- a)/2 - E/(2 hbar sqrt(Lambda)),
    behaves near 0 as Gamma(a) kappa^{-a} / Gamma(a_+) y^{1/2-a} + Gamma(-a) / Gamma(a_-) y^{1/2+a}
    (kappa = sqrt(Lambda)/2 hbar).  Its branch angle equals theta exactly when
    sin(theta) Gamma(-a) / (C2 Gamma(a_-)) - cos(theta) Gamma(a) kappa^{-a} / (C1 Gamma(a_+)) = 0.
    """
    a = ordering.abs_j_plus
    if not 0.0 < a < 1.0:
        raise RegimeError("the quantization condition covers 0 < |J+| < 1")
    modes = make_reference_modes(ordering, constants)
    om = constants.omega
    eps = energy / (2.0 * om)
    kap = math.sqrt(constants.lam) / (2.0 * constants.hbar)
    sing = gamma(a) * kap ** (-a) * rgamma(0.5 * (1.0 + a) - eps) / modes.c1
    reg = gamma(-a) * rgamma(0.5 * (1.0 - a) - eps) / modes.c2
    return math.sin(theta) * reg - math.cos(theta) * sing


def extension_energies(ordering: OrderingInfo, constants: PhysicalConstants, bc: BoundaryCondition,
                       n_max: int) -> np.ndarray:
    """Exact lowest eigenvalues for theta in [0, pi/2].

    theta = 0 and pi/2 give the ladders hbar sqrt(Lambda) (2n + 1 +- |J+|);
    in between the n-th level lies in [E_n(pi/2), E_n(0)] and is found by
    Brent's method on :func:`quantization_function`.
    """
    a = ordering.abs_j_plus
    om = constants.omega
    n = np.arange(n_max)
    theta = bc.theta
    if theta == 0.0:
        return om * (2.0 * n + 1.0 + a)
    if a >= 1.0 or ordering.regime is Regime.WELL_UNSUPPORTED:
        raise RegimeError("non-Dirichlet extensions need 1/2 <= |J+| < 1")
    if theta < 0:
        raise Unsupported("extension angles theta < 0 are not supported")
    if theta == math.pi / 2:
        return om * (2.0 * n + 1.0 - a)
    out = np.empty(n_max)
    for k in range(n_max):
        lo, hi = om * (2 * k + 1 - a), om * (2 * k + 1 + a)
        out[k] = brentq(lambda e: quantization_function(ordering, constants, theta, e), lo, hi,
                        xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return out


def spectral_propagate(basis: SpectralBasis, psi0: WaveFunction, t: float,
                       time_mode: TimeMode = TimeMode.IMAGINARY) -> WaveFunction:
    """sum_n e^{-E_n t / hbar} <u_n, psi0> u_n, or with phases e^{-i E_n t / hbar}."""
    if not basis.grid.matches(psi0):
        raise ValueError("psi0 must be sampled on the basis grid")
    coef = basis.coefficients(psi0)
    resid = basis.synthesize(coef)
    r = resid.with_values(psi0.values - resid.values, psi0.origin_value - resid.origin_value).norm()
    r /= max(psi0.norm(), 1e-300)
    if r > PROJECTION_FAIL:
        raise BasisTooSmall(f"projection residual {r:.3g} exceeds {PROJECTION_FAIL}")
    if r > PROJECTION_WARN:
        warnings.warn(f"projection residual {r:.3g} exceeds {PROJECTION_WARN}; basis may be too small",
                      RuntimeWarning, stacklevel=2)
    a = 1j if TimeMode(time_mode) is TimeMode.REAL else 1.0
    return basis.synthesize(coef * np.exp(-a * basis.energies * t / basis.constants.hbar))
