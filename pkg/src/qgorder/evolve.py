"""Time-sliced (Lie-Trotter) propagation on a uniform half-line grid.

One slice of length dt = t_total / n applies the potential factor
e^{-a dt V / hbar} and the free kinetic factor e^{a s Delta} with s = hbar dt,
a = 1 (imaginary time) or a = i (real time; the kinetic multiplier is then
e^{-i s k^2}).  By default the potential acts first on the state, which is
the literal reading of (e^{-tT/hbar n} e^{-tV/hbar n})^n psi.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import MethodMismatch, RegimeError, Unsupported
from .extensions import BCKind, BoundaryCondition, make_reference_modes
from .grid import GridSpec
from .kernels import TimeMode, heat_robin
from .ordering import (
    OrderingInfo,
    PhysicalConstants,
    Regime,
    WaveFunction,
    effective_potential,
    trapezoid_weights,
)
from .spectral import SpectralBasis, spectral_propagate


class KineticMethod(str, enum.Enum):
    KERNEL_MATRIX = "KernelMatrix"
    SINE = "SineTransform"
    COSINE = "CosineTransform"
    ROBIN = "RobinEigenQuadrature"


_NATURAL = {
    BCKind.DIRICHLET: KineticMethod.SINE,
    BCKind.NEUMANN: KineticMethod.COSINE,
    BCKind.ROBIN: KineticMethod.ROBIN,
}
_COMPATIBLE = {
    KineticMethod.SINE: {BCKind.DIRICHLET},
    KineticMethod.COSINE: {BCKind.NEUMANN},
    KineticMethod.ROBIN: {BCKind.ROBIN, BCKind.NEUMANN, BCKind.DIRICHLET},
    KineticMethod.KERNEL_MATRIX: {BCKind.DIRICHLET, BCKind.NEUMANN, BCKind.ROBIN},
}


def _robin_beta(bc: BoundaryCondition) -> float:
    k = bc.kind
    if k is BCKind.DIRICHLET:
        return 0.0
    if k is BCKind.NEUMANN:
        return math.inf
    return bc.beta


def resolve_method(bc: BoundaryCondition, time_mode: TimeMode, method=None) -> KineticMethod:
    kind = bc.kind
    if kind is BCKind.GENERAL:
        raise MethodMismatch("free kinetic factors need a Dirichlet, Neumann or Robin condition")
    if method is None:
        return _NATURAL[kind]
    method = KineticMethod(method)
    if kind not in _COMPATIBLE[method]:
        raise MethodMismatch(f"{method.value} cannot apply a {kind.value} boundary condition")
    if method is KineticMethod.KERNEL_MATRIX and TimeMode(time_mode) is TimeMode.REAL:
        raise MethodMismatch("real-time evolution uses transform methods; kernel quadrature is oscillatory")
    return method


# ------------------------------------------------------------- kinetic step

_ROBIN_MAX_REFINE = 256


def _cos_sin_sums(g, n_out: int, period: int):
    """C_k = sum_j g_j cos(2 pi k j / period), S_k likewise with sin, k < n_out."""
    F = sfft.fft(g, n=period)            # sum g e^{-i...}
    G = sfft.ifft(g, n=period) * period  # sum g e^{+i...}
    return 0.5 * (F + G)[:n_out], (0.5j * (F - G))[:n_out]


class KineticOperator:
    """Precomputed e^{a s Delta} on a grid for one boundary condition and method.

    ``apply(values, origin)`` acts on node values (k = 1..N) plus the origin
    value (used for Neumann/Robin; ignored for Dirichlet) and returns the new
    pair; the closure node y_max is held at zero.
    """

    def __init__(self, grid: GridSpec, s: float, bc: BoundaryCondition,
                 time_mode: TimeMode = TimeMode.IMAGINARY, method=None):
        self.grid = grid
        self.s = float(s)
        if not self.s > 0:
            raise ValueError("kinetic time must be positive")
        self.time_mode = TimeMode(time_mode)
        self.bc = bc
        self.method = resolve_method(bc, self.time_mode, method)
        self.beta = _robin_beta(bc)
        if self.beta < 0:
            raise Unsupported("Robin parameters beta < 0 are not supported")
        N, L = grid.n_points, grid.y_max
        real = self.time_mode is TimeMode.REAL

        def mult(kappa):
            return np.exp(-1j * self.s * kappa ** 2) if real else np.exp(-self.s * kappa ** 2)

        if self.method is KineticMethod.SINE:
            self._mult = mult(math.pi * np.arange(1, N) / L)
        elif self.method is KineticMethod.COSINE:
            self._mult = mult((np.arange(N) + 0.5) * math.pi / L)
        elif self.method is KineticMethod.ROBIN:
            # phi_p turns over on the scale p ~ 1/beta; refine dp until dp * beta <= 1/4
            m = 1 if math.isinf(self.beta) else max(1, math.ceil(2.0 * math.pi * self.beta / L))
            if m > _ROBIN_MAX_REFINE:
                warnings.warn(f"beta = {self.beta:.3g} needs a p-step refinement of {m}; capped at "
                              f"{_ROBIN_MAX_REFINE}, so the kinetic factor is not resolved near p = 0",
                              RuntimeWarning, stacklevel=2)
                m = _ROBIN_MAX_REFINE
            self._period = 4 * m * N
            K = 2 * m * N
            dp = math.pi / (2.0 * m * L)
            p = dp * np.arange(K + 1)
            if self.beta == 0.0:
                phi = np.full_like(p, -0.5 * math.pi)
            elif math.isinf(self.beta):
                phi = np.zeros_like(p)
            else:
                with np.errstate(divide="ignore"):
                    phi = -np.arctan2(1.0, p * self.beta)
            wp = np.full(K + 1, dp)
            wp[0] = wp[-1] = 0.5 * dp
            self._cphi = np.cos(phi)
            self._sphi = np.sin(phi)
            self._pw = (2.0 / math.pi) * wp * mult(p)
            self._wy = np.full(N, grid.h)
            self._wy[0] = 0.5 * grid.h
        else:
            y = np.concatenate([[0.0], grid.nodes])
            w = np.concatenate([[0.5 * grid.h], grid.weights[1]])
            w[-1] = 0.0
            if self.beta == 0.0:
                w[0] = 0.0
            self._kmat = heat_robin(self.beta, self.s, y[:, None], y[None, :]) * w[None, :]

    def _origin_guess(self, v):
        if math.isinf(self.beta):
            return (4.0 * v[0] - v[1]) / 3.0
        h = self.grid.h
        return self.beta * (4.0 * v[0] - v[1]) / (2.0 * h + 3.0 * self.beta)

    def apply(self, values, origin=None):
        v = np.asarray(values, dtype=complex)
        N = self.grid.n_points
        out = np.zeros(N, dtype=complex)
        m = self.method
        if m is KineticMethod.SINE:
            c = sfft.dst(v[:-1], type=1, norm="ortho")
            out[:-1] = sfft.dst(c * self._mult, type=1, norm="ortho")
            return out, None
        if self.beta == 0.0:
            f0 = 0.0
        else:
            f0 = self._origin_guess(v) if origin is None else origin
        f = np.concatenate([[f0], v[:-1]])  # nodes 0..N-1
        if m is KineticMethod.COSINE:
            g = sfft.dct(sfft.idct(f, type=2) * self._mult, type=2)
        elif m is KineticMethod.ROBIN:
            P = self._period
            C, S = _cos_sin_sums(self._wy * f, self._pw.size, P)
            fwd = self._cphi * C - self._sphi * S
            if 0.0 < self.beta < math.inf:
                # Euler-Maclaurin end term: (f psi_p)'(0) = 2 f(0) cos(phi_p) / beta for Robin data
                fwd = fwd + (self.grid.h ** 2 / 6.0) * f0 * self._cphi / self.beta
            hk = fwd * self._pw
            C2, S2 = _cos_sin_sums(hk * self._cphi, N, P)
            C3, S3 = _cos_sin_sums(hk * self._sphi, N, P)
            g = C2 - S3
        else:
            full = np.concatenate([[f0], v])
            g = (self._kmat @ full)[:N]
        out[:-1] = g[1:]
        return out, (None if self.beta == 0.0 else complex(g[0]))


def apply_kinetic(psi: WaveFunction, tau: float, bc: BoundaryCondition,
                  time_mode: TimeMode = TimeMode.IMAGINARY, method=None,
                  grid: GridSpec | None = None) -> WaveFunction:
    """Apply e^{tau Delta} (or e^{i tau Delta}) with the boundary condition ``bc``.

    ``psi`` must live on a :class:`GridSpec` grid; it is inferred from the
    state when ``grid`` is omitted.
    """
    grid = grid or _infer_grid(psi)
    op = KineticOperator(grid, tau, bc, time_mode, method)
    v, o = op.apply(psi.values, psi.origin)
    return psi.with_values(v, o)


def _infer_grid(psi: WaveFunction) -> GridSpec:
    g = GridSpec(float(psi.grid[-1]), int(psi.grid.size))
    if not g.matches(psi):
        raise ValueError("state is not sampled on a uniform GridSpec grid")
    return g


# ----------------------------------------------------------- potential step


def _check_regime(ordering: OrderingInfo):
    if not ordering.propagable:
        raise RegimeError(
            f"|J+| = {ordering.abs_j_plus!r} < 1/2: the potential is not bounded below near 0 and "
            "product formulas do not define a propagator for this ordering"
        )


def potential_multiplier(ordering, constants, y, dt, time_mode=TimeMode.IMAGINARY):
    v = effective_potential(ordering, constants, y)
    a = 1j if TimeMode(time_mode) is TimeMode.REAL else 1.0
    return np.exp(-a * dt * v / constants.hbar)


def apply_potential(psi: WaveFunction, dt: float, ordering: OrderingInfo,
                    constants: PhysicalConstants, time_mode: TimeMode = TimeMode.IMAGINARY) -> WaveFunction:
    """Multiply by e^{-dt V / hbar} (imaginary) or e^{-i dt V / hbar} (real)."""
    _check_regime(ordering)
    if not psi.is_flat:
        raise ValueError("apply_potential acts on FlatY states")
    mult = potential_multiplier(ordering, constants, psi.grid, dt, time_mode)
    origin = psi.origin if ordering.q == 0.0 else None
    return psi.with_values(psi.values * mult, origin)


# ----------------------------------------------------------------- plans


def resolve_bc(ordering: OrderingInfo, constants: PhysicalConstants, bc: BoundaryCondition) -> BoundaryCondition:
    """Validate ``bc`` for propagation and attach beta at |J+| = 1/2."""
    _check_regime(ordering)
    if ordering.regime is Regime.CRITICAL_NO_POTENTIAL:
        bc = bc.with_modes(make_reference_modes(ordering, constants))
        if bc.beta is not None and bc.beta < 0:
            raise Unsupported(f"beta = {bc.beta!r} < 0 is not supported")
        return bc
    if bc.kind is not BCKind.DIRICHLET:
        raise RegimeError(
            f"|J+| = {ordering.abs_j_plus!r} > 1/2: the form sum selects the Dirichlet (theta = 0) "
            f"extension, so {bc.describe()} cannot be propagated"
        )
    return bc


@dataclass(frozen=True)
class TrotterPlan:
    ordering: OrderingInfo
    constants: PhysicalConstants
    bc: BoundaryCondition
    t_total: float
    n_slices: int
    time_mode: TimeMode = TimeMode.IMAGINARY
    kinetic_method: KineticMethod | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    order: str = "potential-first"
    diag_eps: float = 0.5

    def __post_init__(self):
        if not self.t_total > 0:
            raise ValueError("t_total must be positive")
        if int(self.n_slices) != self.n_slices or self.n_slices < 1:
            raise ValueError("n_slices must be a positive integer")
        if self.order not in ("potential-first", "kinetic-first"):
            raise ValueError("order must be 'potential-first' or 'kinetic-first'")
        object.__setattr__(self, "time_mode", TimeMode(self.time_mode))
        object.__setattr__(self, "bc", resolve_bc(self.ordering, self.constants, self.bc))
        object.__setattr__(self, "kinetic_method", resolve_method(self.bc, self.time_mode, self.kinetic_method))

    @property
    def dt(self) -> float:
        return self.t_total / self.n_slices

    @property
    def tau(self) -> float:
        """Kinetic (diffusion) time per slice, hbar * t_total / n."""
        return self.constants.hbar * self.dt

    def with_slices(self, n: int) -> "TrotterPlan":
        return TrotterPlan(self.ordering, self.constants, self.bc, self.t_total, n, self.time_mode,
                           self.kinetic_method, self.grid, self.order, self.diag_eps)


@dataclass(frozen=True)
class Observables:
    norm: float
    mean_y: float
    prob_near_zero: float


def observables(psi: WaveFunction, eps: float = 0.5) -> Observables:
    """Trapezoid norm, <y> and the probability on [0, eps] (grid-truncated)."""
    w0, w = psi.weights
    dens = np.abs(psi.values) ** 2
    d0 = abs(psi.origin_value) ** 2
    n2 = float(np.sum(w * dens) + w0 * d0)
    mean = float(np.sum(w * psi.grid * dens)) / n2 if n2 > 0 else math.nan
    inside = psi.grid <= eps
    if np.any(inside):
        y = psi.grid[inside]
        u0, u = trapezoid_weights(y)
        p = float(np.sum(u * dens[inside]) + u0 * d0)
    else:
        p = 0.0
    return Observables(math.sqrt(n2), mean, p)


@dataclass(frozen=True)
class TrotterResult:
    psi: WaveFunction
    norms: np.ndarray
    prob_near_zero: np.ndarray


def trotter_evolve(psi0: WaveFunction, plan: TrotterPlan) -> TrotterResult:
    """Propagate ``psi0`` through ``plan.n_slices`` Trotter slices.

    Diagnostics hold the norm and P[0, diag_eps] before the first slice and
    after every slice.
    """
    grid = plan.grid
    if not grid.matches(psi0):
        raise ValueError("psi0 must be sampled on the plan grid")
    op = KineticOperator(grid, plan.tau, plan.bc, plan.time_mode, plan.kinetic_method)
    mult = potential_multiplier(plan.ordering, plan.constants, grid.nodes, plan.dt, plan.time_mode)
    if plan.time_mode is TimeMode.REAL:
        phase = plan.dt * float(effective_potential(plan.ordering, plan.constants, grid.h)) / plan.constants.hbar
        if phase > math.pi / 4:
            warnings.warn(
                f"potential phase per slice at the first node is {phase:.3g} > pi/4; "
                "increase n_slices to avoid aliasing",
                RuntimeWarning, stacklevel=2,
            )
    keep_origin = plan.bc.kind is not BCKind.DIRICHLET
    v = np.array(psi0.values, dtype=complex)
    v[-1] = 0.0
    o = psi0.origin if keep_origin else None
    norms = [observables(psi0, plan.diag_eps)]
    pot_first = plan.order == "potential-first"
    for _ in range(plan.n_slices):
        if pot_first:
            v = v * mult
            v, o = op.apply(v, o)
        else:
            v, o = op.apply(v, o)
            v = v * mult
        norms.append(observables(grid.state(v, o), plan.diag_eps))
    psi = grid.state(v, o)
    return TrotterResult(psi, np.array([b.norm for b in norms]), np.array([b.prob_near_zero for b in norms]))


# -------------------------------------------------------- convergence study


@dataclass(frozen=True)
class ConvergenceTable:
    n: np.ndarray
    errors: np.ndarray
    ratios: np.ndarray
    fitted_order: float

    def rows(self):
        r = np.concatenate([[math.nan], self.ratios])
        return list(zip(self.n.tolist(), self.errors.tolist(), r.tolist()))


def l2_distance(a: WaveFunction, b: WaveFunction) -> float:
    d = a.with_values(a.values - b.values, a.origin_value - b.origin_value)
    return d.norm()


def convergence_study(psi0: WaveFunction, plan_base: TrotterPlan, n_list, oracle: SpectralBasis) -> ConvergenceTable:
    """L2 errors of Trotter evolution against spectral propagation for each n.

    ``fitted_order`` is the least-squares slope of -log(error) against log(n);
    ``ratios`` are e(n_k) / e(n_{k+1}).
    """
    n_arr = np.asarray(list(n_list), dtype=int)
    if n_arr.size < 2 or np.any(np.diff(n_arr) <= 0):
        raise ValueError("n_list must hold at least two increasing slice counts")
    ref = spectral_propagate(oracle, psi0, plan_base.t_total, plan_base.time_mode)
    errs = np.array([l2_distance(trotter_evolve(psi0, plan_base.with_slices(int(n))).psi, ref) for n in n_arr])
    ratios = errs[:-1] / errs[1:]
    order = -np.polyfit(np.log(n_arr), np.log(errs), 1)[0]
    return ConvergenceTable(n_arr, errs, ratios, float(order))
