"""Monte Carlo sampling of the absorbed and reflected path measures (imaginary time).

A path is a Gaussian walk y_0 = y0, y_{j+1} = y_j + sqrt(2 hbar tau) xi_j with
tau = t_total / n_slices.  Dirichlet walks die on a sign change; between two
positive positions they survive the Brownian-bridge crossing with probability
1 - exp(-y_j y_{j+1} / (hbar tau)), which is carried as a multiplicative weight
rather than sampled.  Neumann walks are reflected by absolute value.  Every
path carries the potential weight exp(-tau sum_j c_j V(y_j) / hbar), with
c_j = 1 except for the two endpoints, which get 1/2 under the default
trapezoid rule.

Samples are drawn in fixed-size chunks.  Chunk k always uses the k-th child
of ``SeedSequence(seed)``, and chunks are concatenated in index order, so
results do not depend on the number of worker threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.special import erf

from .errors import RegimeError
from .evolve import KineticOperator, potential_multiplier
from .extensions import BCKind, BoundaryCondition
from .grid import GridSpec
from .kernels import heat_dirichlet
from .ordering import OrderingInfo, PhysicalConstants, Regime, effective_potential

CHUNK = 1 << 14
WEIGHTINGS = ("trapezoid", "left", "right")


def worker_count(default: int | None = None) -> int:
    """Worker cap from QG_THREADS (>= 1), else ``default`` or the CPU count."""
    env = os.environ.get("QG_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"QG_THREADS must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"QG_THREADS must be a positive integer, got {env!r}")
        return n
    return default or os.cpu_count() or 1


@dataclass(frozen=True)
class McConfig:
    ordering: OrderingInfo
    constants: PhysicalConstants
    bc: BoundaryCondition
    t_total: float
    n_slices: int
    n_samples: int
    y0: float
    seed: int = 0
    weighting: str = "trapezoid"
    free: bool = False  # V = 0 surrogate
    workers: int | None = None

    def __post_init__(self):
        if int(self.n_slices) != self.n_slices or self.n_slices < 2:
            raise ValueError("n_slices must be an integer >= 2")
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise ValueError("n_samples must be an integer >= 2")
        if not self.t_total > 0:
            raise ValueError("t_total must be positive")
        if not self.y0 > 0:
            raise ValueError("y0 must be positive")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"weighting must be one of {WEIGHTINGS}")
        if self.bc.kind not in (BCKind.DIRICHLET, BCKind.NEUMANN):
            raise ValueError("path measures exist for Dirichlet (absorbed) and Neumann (reflected) walks only")
        if self.ordering.regime is Regime.WELL_UNSUPPORTED:
            raise RegimeError(
                f"|J+| = {self.ordering.abs_j_plus!r} < 1/2: V is unbounded below and the path weights "
                "are not bounded by 1"
            )
        if self.bc.kind is BCKind.NEUMANN and self.ordering.regime is not Regime.CRITICAL_NO_POTENTIAL \
                and not self.free:
            raise RegimeError("reflected walks need |J+| = 1/2; for |J+| > 1/2 only the Dirichlet extension propagates")

    @property
    def tau(self) -> float:
        return self.t_total / self.n_slices

    @property
    def step_sd(self) -> float:
        return math.sqrt(2.0 * self.constants.hbar * self.tau)


@dataclass(frozen=True)
class PathEnsemble:
    """Weighted endpoints; killed Dirichlet paths carry zero weight."""

    endpoints: np.ndarray
    weights: np.ndarray
    killed_mass: float  # total bridge/sign-change kill probability (before V weights), per sample

    @property
    def n_samples(self) -> int:
        return int(self.endpoints.size)


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n_effective: int


def _potential(cfg: McConfig, y):
    if cfg.free:
        return np.zeros_like(y)
    out = np.zeros_like(y)
    pos = y > 0
    out[pos] = effective_potential(cfg.ordering, cfg.constants, y[pos])
    if cfg.ordering.q != 0.0:
        out[~pos] = np.inf  # weight e^{-inf} = 0 at the singular origin
    return out


def _chunk(cfg: McConfig, seq: np.random.SeedSequence, n: int):
    rng = np.random.Generator(np.random.PCG64(seq))
    n_sl = cfg.n_slices
    hbt = cfg.constants.hbar * cfg.tau
    c = cfg.tau / cfg.constants.hbar
    coef = np.ones(n_sl + 1)
    if cfg.weighting == "trapezoid":
        coef[0] = coef[-1] = 0.5
    elif cfg.weighting == "left":
        coef[-1] = 0.0
    else:
        coef[0] = 0.0
    y = np.full(n, float(cfg.y0))
    logw = -c * coef[0] * _potential(cfg, y)
    surv = np.ones(n)
    dirichlet = cfg.bc.kind is BCKind.DIRICHLET
    for j in range(1, n_sl + 1):
        yn = y + cfg.step_sd * rng.standard_normal(n)
        if dirichlet:
            alive = yn > 0
            with np.errstate(over="ignore"):
                cross = np.where(alive, np.exp(-np.maximum(y * yn, 0.0) / hbt), 1.0)
            surv *= np.where(alive, -np.expm1(np.log(cross, where=cross > 0, out=np.full(n, -np.inf))), 0.0)
            yn = np.where(alive, yn, 0.0)
        else:
            yn = np.abs(yn)
        y = yn
        if coef[j]:
            live = surv > 0
            lw = np.zeros(n)
            lw[live] = -c * coef[j] * _potential(cfg, y[live])
            logw += lw
    w = surv * np.exp(logw)
    return y, w, float(np.sum(1.0 - surv))


def sample_paths(cfg: McConfig) -> PathEnsemble:
    n_chunks = -(-cfg.n_samples // CHUNK)
    seqs = np.random.SeedSequence(int(cfg.seed)).spawn(n_chunks)
    sizes = [min(CHUNK, cfg.n_samples - k * CHUNK) for k in range(n_chunks)]
    workers = min(worker_count(cfg.workers), n_chunks)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda a: _chunk(cfg, *a), zip(seqs, sizes)))
    else:
        parts = [_chunk(cfg, s, n) for s, n in zip(seqs, sizes)]
    ends = np.concatenate([p[0] for p in parts])
    wts = np.concatenate([p[1] for p in parts])
    killed = math.fsum(p[2] for p in parts) / cfg.n_samples
    return PathEnsemble(ends, wts, killed)


def _estimate(contrib: np.ndarray) -> McEstimate:
    n = contrib.size
    mean = float(np.mean(contrib))
    se = float(np.std(contrib, ddof=1) / math.sqrt(n))
    s1 = float(np.sum(contrib))
    s2 = float(np.sum(contrib * contrib))
    neff = int(s1 * s1 / s2) if s2 > 0 else 0
    return McEstimate(mean, se, neff)


def default_bins():
    return np.linspace(0.0, 4.0, 17)


def estimate_propagator(cfg: McConfig, z_bins=None, ensemble: PathEnsemble | None = None) -> list[McEstimate]:
    """Bin-averaged kernel K(t; z, y0) with per-bin standard errors.

    ``n_effective`` is the Kish effective sample size of the bin contributions.
    """
    edges = default_bins() if z_bins is None else np.asarray(z_bins, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("z_bins must be increasing bin edges")
    ens = ensemble or sample_paths(cfg)
    idx = np.searchsorted(edges, ens.endpoints, side="right") - 1
    out = []
    for b in range(edges.size - 1):
        width = edges[b + 1] - edges[b]
        contrib = np.where(idx == b, ens.weights, 0.0) / width
        out.append(_estimate(contrib))
    return out


def estimate_observable(cfg: McConfig, f, ensemble: PathEnsemble | None = None) -> McEstimate:
    """E[w f(y_n)], the kernel integrated against f."""
    ens = ensemble or sample_paths(cfg)
    return _estimate(ens.weights * np.asarray(f(ens.endpoints), dtype=float))


# ---------------------------------------------------------------- references


def free_kernel_bins(cfg: McConfig, z_bins) -> np.ndarray:
    """Bin averages of the analytic V = 0 kernel p(hbar t, y0, .) (images, closed form)."""
    edges = np.asarray(z_bins, dtype=float)
    s = math.sqrt(4.0 * cfg.constants.hbar * cfg.t_total)
    direct = 0.5 * np.diff(erf((edges - cfg.y0) / s))
    image = 0.5 * np.diff(erf((edges + cfg.y0) / s))
    sign = -1.0 if cfg.bc.kind is BCKind.DIRICHLET else 1.0
    return (direct + sign * image) / np.diff(edges)


def trotter_reference_bins(cfg: McConfig, z_bins, n_slices: int = 512,
                           grid: GridSpec | None = None) -> np.ndarray:
    """Bin averages of a deterministic Trotter kernel with ``n_slices`` slices.

    The delta at y0 is carried through the first kinetic factor analytically;
    the potential split follows ``cfg.weighting``.
    """
    if cfg.bc.kind is not BCKind.DIRICHLET:
        raise ValueError("the grid reference is implemented for the absorbed (Dirichlet) measure")
    grid = grid or GridSpec(12.0, 4096)
    y = grid.nodes
    tau = cfg.t_total / n_slices
    hb = cfg.constants.hbar
    vf = np.zeros_like(y) if cfg.free else effective_potential(cfg.ordering, cfg.constants, y)
    v0 = 0.0 if cfg.free else float(effective_potential(cfg.ordering, cfg.constants, cfg.y0))
    lead, tail = {"trapezoid": (0.5, 0.5), "left": (1.0, 0.0), "right": (0.0, 1.0)}[cfg.weighting]
    op = KineticOperator(grid, hb * tau, BoundaryCondition.dirichlet())
    full = np.exp(-tau * vf / hb)
    psi = math.exp(-lead * tau * v0 / hb) * heat_dirichlet(hb * tau, y, cfg.y0).astype(complex)
    psi[-1] = 0.0
    for _ in range(n_slices - 1):
        psi, _o = op.apply(psi * full)
    psi = (psi * np.exp(-tail * tau * vf / hb)).real
    edges = np.asarray(z_bins, dtype=float)
    yy = np.concatenate([[0.0], y])
    cum = cumulative_trapezoid(np.concatenate([[0.0], psi]), yy, initial=0.0)
    return np.diff(np.interp(edges, yy, cum)) / np.diff(edges)


@dataclass(frozen=True)
class BinComparison:
    edges: np.ndarray
    estimates: list
    reference: np.ndarray
    min_neff: int = 200
    z_scores: np.ndarray = field(init=False)

    def __post_init__(self):
        z = np.array([(e.value - r) / e.std_error if e.std_error > 0 else (0.0 if e.value == r else np.inf)
                      for e, r in zip(self.estimates, self.reference)])
        object.__setattr__(self, "z_scores", z)

    @property
    def tested(self) -> np.ndarray:
        return np.array([e.n_effective >= self.min_neff for e in self.estimates])

    @property
    def worst_sigma(self) -> float:
        t = self.tested
        return float(np.max(np.abs(self.z_scores[t]))) if np.any(t) else 0.0

    def rows(self):
        return [(float(self.edges[b]), float(self.edges[b + 1]), e.value, e.std_error, e.n_effective,
                 float(self.reference[b]), float(self.z_scores[b])) for b, e in enumerate(self.estimates)]
