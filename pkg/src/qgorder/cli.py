"""Command-line front end.

Every command resolves a flat :class:`RunConfig` (defaults, then an optional
JSON config file, then command-line flags), applies the regime gates, runs,
and writes one CSV table or one JSON document.  Output starts with a header
that echoes the resolved config, so ``--config`` on a saved header reproduces
the run.

Exit codes: 0 success, 2 invalid configuration, 3 regime gate, 1 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .errors import QGError, RegimeError, Unsupported, MethodMismatch, ConstraintViolation, DomainError
from .evolve import TrotterPlan, convergence_study, resolve_bc, trotter_evolve
from .extensions import (
    BCKind,
    BoundaryCondition,
    deficiency_indices,
    make_reference_modes,
    theta_from_beta,
)
from .grid import GridSpec
from .kernels import KernelSpec, TimeMode
from .mcpaths import (
    BinComparison,
    McConfig,
    estimate_propagator,
    free_kernel_bins,
    sample_paths,
    trotter_reference_bins,
)
from .ordering import PhysicalConstants, Regime, classify
from .spectral import dirichlet_eigenbasis, fd_eigensolve

COMMANDS = ("classify", "extensions", "kernel-table", "evolve", "spectrum", "converge", "mc")
EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG, EXIT_REGIME = 0, 1, 2, 3

COLUMNS = {
    "classify": "j1, j2, j3, J_plus, J_minus, q, m, nu, beta_exp, regime, deficiency_plus, deficiency_minus, propagable",
    "extensions": "regime, nu, C1, C2, k, mu_mix, theta, L, beta, bc_kind, deficiency_plus, deficiency_minus",
    "kernel-table": "t, y, z, kernel_re, kernel_im",
    "evolve": "slice, time, norm, prob_near_zero (emit=diagnostics) or y, psi_re, psi_im, density (emit=state)",
    "spectrum": "n, energy, exact, rel_error (exact is nan unless theta is 0 or pi/2)",
    "converge": "n, L2_error, ratio, fitted_order",
    "mc": "bin_lo, bin_hi, value, std_error, n_effective, reference, z_score",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    j: tuple = (0.5, 0.5, 0.0)
    hbar: float = 1.0
    lam: float = 4.0
    theta: float = 0.0
    y_max: float = 12.0
    n_points: int = 2048
    t_total: float = 0.5
    n_slices: int = 256
    n_list: tuple = (32, 64, 128, 256)
    time_mode: str = "imaginary"
    method: str | None = None
    n_max: int = 6
    first_row: str = "plain"
    psi0: str = "pair"
    emit: str = "diagnostics"
    ys: tuple = (0.5, 1.0, 2.0)
    zs: tuple = (0.5, 1.0, 2.0)
    n_samples: int = 200000
    seed: int = 0
    y0: float = 1.0
    n_bins: int = 16
    z_max: float = 4.0
    weighting: str = "trapezoid"
    free: bool = False
    reference_slices: int = 512
    output: str | None = None
    format: str = "csv"

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


_FLOAT = {"hbar", "lam", "theta", "y_max", "t_total", "y0", "z_max"}
_INT = {"n_points", "n_slices", "n_max", "n_samples", "seed", "n_bins", "reference_slices"}
_FLOAT_TUPLE = {"j", "ys", "zs"}
_INT_TUPLE = {"n_list"}
_CHOICES = {
    "command": COMMANDS,
    "time_mode": ("imaginary", "real"),
    "method": (None, "KernelMatrix", "SineTransform", "CosineTransform", "RobinEigenQuadrature"),
    "first_row": ("plain", "matched"),
    "psi0": ("pair", "gauss"),
    "emit": ("diagnostics", "state"),
    "weighting": ("trapezoid", "left", "right"),
    "format": ("csv", "json"),
}
_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _parse_list(v, conv):
    if isinstance(v, str):
        v = [s for s in v.replace(" ", "").split(",") if s]
    return tuple(conv(x) for x in v)


def _to_int(x):
    if isinstance(x, float) and not x.is_integer():
        raise ValueError(f"{x!r} is not an integer")
    return int(x)


def _parse_bc(spec: str, ordering, constants) -> float:
    """'theta=..', 'L=..', 'beta=..', 'dirichlet' or 'neumann' -> canonical theta."""
    s = spec.strip().lower()
    if s == "dirichlet":
        return 0.0
    if s == "neumann":
        return BoundaryCondition.neumann().theta
    if "=" not in s:
        raise ConfigError(f"bad --bc {spec!r}; use theta=.., L=.., beta=.., dirichlet or neumann")
    key, val = s.split("=", 1)
    try:
        x = float(val)
    except ValueError:
        raise ConfigError(f"bad --bc value {val!r}") from None
    if key == "theta":
        return BoundaryCondition(x).theta
    if key == "l":
        return BoundaryCondition.from_L(x).theta
    if key == "beta":
        return theta_from_beta(make_reference_modes(ordering, constants), x)
    raise ConfigError(f"unknown bc coordinate {key!r}; use theta, L or beta")


def parse_config(raw: dict) -> RunConfig:
    """Validate and canonicalize a flat key-value config (file, flags or header)."""
    raw = dict(raw)
    unknown = set(raw) - _FIELDS - {"bc"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "command" not in raw:
        raise ConfigError("no command given")
    bc_spec = raw.pop("bc", None)
    if bc_spec is not None and "theta" in raw:
        raise ConfigError("give exactly one boundary coordinate (bc or theta)")
    vals = {}
    try:
        for k, v in raw.items():
            if v is None and k in ("method", "output"):
                vals[k] = None
            elif k in _FLOAT:
                vals[k] = float(v)
            elif k in _INT:
                vals[k] = _to_int(v)
            elif k in _FLOAT_TUPLE:
                vals[k] = _parse_list(v, float)
            elif k in _INT_TUPLE:
                vals[k] = _parse_list(v, _to_int)
            elif k == "free":
                if not isinstance(v, bool):
                    raise ValueError("free must be true or false")
                vals[k] = v
            else:
                vals[k] = v if v is None else str(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    for k, choices in _CHOICES.items():
        if k in vals and vals[k] not in choices:
            raise ConfigError(f"{k} must be one of {[c for c in choices if c is not None]}, got {vals[k]!r}")
    if "j" in vals and len(vals["j"]) != 3:
        raise ConfigError("j needs three exponents j1 j2 j3")
    if "format" not in vals:
        vals["format"] = "json" if vals["command"] in ("classify", "extensions") else "csv"
    if bc_spec is not None:
        j = vals.get("j", RunConfig.j)
        vals["theta"] = _parse_bc(str(bc_spec), classify(*j), _constants_from(vals))
    return RunConfig(**vals)


def _constants_from(vals) -> PhysicalConstants:
    return PhysicalConstants(vals.get("hbar", 1.0), vals.get("lam", 4.0))


# ------------------------------------------------------------------ setup


@dataclass
class Context:
    cfg: RunConfig
    ordering: object
    constants: PhysicalConstants
    bc: BoundaryCondition
    grid: GridSpec


def resolve(cfg: RunConfig) -> Context:
    """Build domain objects and apply the regime gates for the command."""
    ordering = classify(*cfg.j)
    constants = PhysicalConstants(cfg.hbar, cfg.lam)
    grid = GridSpec(cfg.y_max, cfg.n_points)
    bc = BoundaryCondition(cfg.theta)
    if ordering.regime is Regime.CRITICAL_NO_POTENTIAL:
        bc = bc.with_modes(make_reference_modes(ordering, constants))
    if cfg.command in ("evolve", "converge", "mc"):
        bc = resolve_bc(ordering, constants, bc)
    if cfg.command == "spectrum" and bc.kind is not BCKind.DIRICHLET and ordering.abs_j_plus >= 1.0:
        raise RegimeError("|J+| >= 1 has the single extension theta = 0")
    return Context(cfg, ordering, constants, bc, grid)


# ---------------------------------------------------------------- commands


def _cmd_classify(ctx):
    o = ctx.ordering
    dp, dm = deficiency_indices(o)
    return [dict(j1=o.j1, j2=o.j2, j3=o.j3, J_plus=o.j_plus, J_minus=o.j_minus, q=o.q, m=o.m, nu=o.nu,
                 beta_exp=o.beta_exp, regime=o.regime.value, deficiency_plus=dp, deficiency_minus=dm,
                 propagable=o.propagable)]


def _cmd_extensions(ctx):
    o = ctx.ordering
    if not o.propagable:
        raise RegimeError("|J+| < 1/2 is outside the supported regimes")
    modes = make_reference_modes(o, ctx.constants)
    dp, dm = deficiency_indices(o)
    bc = ctx.bc
    if o.abs_j_plus >= 1.0 and bc.kind is not BCKind.DIRICHLET:
        raise RegimeError("|J+| >= 1 has the single extension theta = 0")
    return [dict(regime=o.regime.value, nu=modes.nu, C1=modes.c1, C2=modes.c2, k=modes.k, mu_mix=modes.mu_mix,
                 theta=bc.theta, L=bc.L, beta=bc.beta, bc_kind=bc.kind.value,
                 deficiency_plus=dp, deficiency_minus=dm)]


def _cmd_kernel_table(ctx):
    if ctx.bc.kind is BCKind.GENERAL:
        raise RegimeError("analytic kernels need Dirichlet, Neumann or Robin (|J+| = 1/2) conditions")
    ks = KernelSpec(TimeMode(ctx.cfg.time_mode), ctx.bc, ctx.cfg.t_total)
    rows = []
    for y in ctx.cfg.ys:
        for z in ctx.cfg.zs:
            v = complex(ks(y, z))
            rows.append(dict(t=ctx.cfg.t_total, y=y, z=z, kernel_re=v.real, kernel_im=v.imag))
    return rows


def _oracle_basis(ctx, n_max):
    if ctx.bc.kind is BCKind.DIRICHLET:
        return dirichlet_eigenbasis(ctx.ordering, ctx.constants, n_max, ctx.grid)
    return fd_eigensolve(ctx.ordering, ctx.constants, ctx.bc, ctx.grid, n_max)


def _initial_state(ctx, basis=None):
    if ctx.cfg.psi0 == "gauss":
        y0 = ctx.cfg.y0
        psi = ctx.grid.sample(lambda y: np.exp(-((y - y0) ** 2) / 0.5), with_origin=ctx.bc.kind is not BCKind.DIRICHLET)
        return psi.normalized()
    basis = basis or _oracle_basis(ctx, 2)
    return basis.synthesize(np.array([1.0, 1.0, *([0.0] * (basis.n_max - 2))]) / math.sqrt(2.0))


def _plan(ctx, n):
    return TrotterPlan(ctx.ordering, ctx.constants, ctx.bc, ctx.cfg.t_total, n, TimeMode(ctx.cfg.time_mode),
                       ctx.cfg.method, ctx.grid)


def _cmd_evolve(ctx):
    plan = _plan(ctx, ctx.cfg.n_slices)
    res = trotter_evolve(_initial_state(ctx), plan)
    if ctx.cfg.emit == "state":
        psi = res.psi
        rows = []
        if psi.origin is not None:
            v = complex(psi.origin)
            rows.append(dict(y=0.0, psi_re=v.real, psi_im=v.imag, density=abs(v) ** 2))
        for y, v in zip(psi.grid.tolist(), psi.values.tolist()):
            rows.append(dict(y=y, psi_re=v.real, psi_im=v.imag, density=abs(v) ** 2))
        return rows
    return [dict(slice=k, time=k * plan.dt, norm=float(nv), prob_near_zero=float(p))
            for k, (nv, p) in enumerate(zip(res.norms, res.prob_near_zero))]


def _cmd_spectrum(ctx):
    b = fd_eigensolve(ctx.ordering, ctx.constants, ctx.bc, ctx.grid, ctx.cfg.n_max, ctx.cfg.first_row)
    a = ctx.ordering.abs_j_plus
    # closed-form ladders: theta = 0 (phi2 branch) and theta = pi/2 (phi1 branch, |J+| < 1)
    shift = a if ctx.bc.theta == 0.0 else (-a if ctx.bc.theta == math.pi / 2 else math.nan)
    rows = []
    for n, e in enumerate(b.energies.tolist()):
        exact = ctx.constants.omega * (2 * n + 1 + shift)
        rows.append(dict(n=n, energy=e, exact=exact, rel_error=abs(e - exact) / exact))
    return rows


def _cmd_converge(ctx):
    oracle = _oracle_basis(ctx, max(ctx.cfg.n_max, 40))
    psi0 = _initial_state(ctx, oracle)
    tab = convergence_study(psi0, _plan(ctx, ctx.cfg.n_list[0]), ctx.cfg.n_list, oracle)
    return [dict(n=n, L2_error=e, ratio=r, fitted_order=tab.fitted_order) for n, e, r in tab.rows()]


def mc_config(ctx) -> McConfig:
    c = ctx.cfg
    return McConfig(ctx.ordering, ctx.constants, ctx.bc, c.t_total, c.n_slices, c.n_samples, c.y0,
                    seed=c.seed, weighting=c.weighting, free=c.free)


def _cmd_mc(ctx):
    mcfg = mc_config(ctx)
    edges = np.linspace(0.0, ctx.cfg.z_max, ctx.cfg.n_bins + 1)
    est = estimate_propagator(mcfg, edges, sample_paths(mcfg))
    if mcfg.free:
        ref = free_kernel_bins(mcfg, edges)
    elif mcfg.bc.kind is BCKind.DIRICHLET:
        ref = trotter_reference_bins(mcfg, edges, ctx.cfg.reference_slices)
    else:
        ref = np.full(edges.size - 1, math.nan)
    cmp = BinComparison(edges, est, ref)
    keys = ("bin_lo", "bin_hi", "value", "std_error", "n_effective", "reference", "z_score")
    return [dict(zip(keys, r)) for r in cmp.rows()]


HANDLERS = {
    "classify": _cmd_classify,
    "extensions": _cmd_extensions,
    "kernel-table": _cmd_kernel_table,
    "evolve": _cmd_evolve,
    "spectrum": _cmd_spectrum,
    "converge": _cmd_converge,
    "mc": _cmd_mc,
}


def run_records(cfg: RunConfig) -> list[dict]:
    return HANDLERS[cfg.command](resolve(cfg))


# ------------------------------------------------------------------ output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_safe(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def header_json(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), sort_keys=True)


def render(cfg: RunConfig, records: list[dict]) -> str:
    if cfg.format == "json":
        doc = {"version": __version__, "config": cfg.to_dict(),
               "records": [{k: _json_safe(v) for k, v in r.items()} for r in records]}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# qgorder {__version__}\n# config {header_json(cfg)}\n")
    w = csv.writer(buf, lineterminator="\n")
    if records:
        cols = list(records[0])
        w.writerow(cols)
        for r in records:
            w.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def read_header(text: str) -> dict:
    """Recover the config dict from a CSV or JSON output."""
    s = text.lstrip()
    if s.startswith("{"):
        return json.loads(s)["config"]
    for line in text.splitlines():
        if line.startswith("# config "):
            return json.loads(line[len("# config "):])
    raise ConfigError("no config header found")


# --------------------------------------------------------------------- CLI


def _build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    g = common.add_argument_group("model")
    g.add_argument("--config", help="flat JSON config file (flags override its keys)")
    g.add_argument("--j", nargs=3, type=float, metavar=("J1", "J2", "J3"), help="ordering exponents, j1 + j2 + j3 = 1")
    g.add_argument("--hbar", type=float)
    g.add_argument("--lam", type=float, help="Lambda")
    g.add_argument("--bc", help="theta=X | L=X | beta=X (|J+| = 1/2 only) | dirichlet | neumann")
    g.add_argument("--y-max", dest="y_max", type=float)
    g.add_argument("--n-points", dest="n_points", type=int)
    t = common.add_argument_group("time")
    t.add_argument("--t", dest="t_total", type=float, help="total time (kernel time for kernel-table)")
    t.add_argument("--n-slices", dest="n_slices", type=int)
    t.add_argument("--n", dest="n_list", help="comma-separated slice counts for converge")
    t.add_argument("--time-mode", dest="time_mode", choices=_CHOICES["time_mode"])
    t.add_argument("--method", choices=[c for c in _CHOICES["method"] if c])
    t.add_argument("--psi0", choices=_CHOICES["psi0"])
    t.add_argument("--emit", choices=_CHOICES["emit"])
    s = common.add_argument_group("spectrum / kernels")
    s.add_argument("--n-max", dest="n_max", type=int)
    s.add_argument("--first-row", dest="first_row", choices=_CHOICES["first_row"])
    s.add_argument("--ys", help="comma-separated y values")
    s.add_argument("--zs", help="comma-separated z values")
    m = common.add_argument_group("monte carlo")
    m.add_argument("--n-samples", dest="n_samples", type=int)
    m.add_argument("--seed", type=int)
    m.add_argument("--y0", type=float)
    m.add_argument("--n-bins", dest="n_bins", type=int)
    m.add_argument("--z-max", dest="z_max", type=float)
    m.add_argument("--weighting", choices=_CHOICES["weighting"])
    m.add_argument("--free", action="store_true", help="V = 0 surrogate")
    m.add_argument("--reference-slices", dest="reference_slices", type=int)
    o = common.add_argument_group("output")
    o.add_argument("-o", "--output", help="output file (default stdout)")
    o.add_argument("--format", choices=_CHOICES["format"])

    p = argparse.ArgumentParser(prog="qgorder", description="Ordering-dependent quantum Hamiltonians on the half-line.")
    p.add_argument("--version", action="version", version=f"qgorder {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")
    helps = {
        "classify": "derived quantities and regime of an ordering",
        "extensions": "reference-mode constants and the selected extension",
        "kernel-table": "free half-line kernel values on a (y, z) table",
        "evolve": "Trotter propagation of a test state",
        "spectrum": "finite-difference eigenvalues",
        "converge": "Trotter L2 error against spectral propagation",
        "mc": "Monte Carlo path-measure kernel estimate",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], description=helps[name],
                       epilog=f"CSV columns: {COLUMNS[name]}")
    return p


def config_from_args(argv) -> RunConfig:
    ns = vars(_build_parser().parse_args(argv))
    raw = {}
    path = ns.pop("config", None)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError:
            raw = read_header(text)
        if isinstance(raw, dict) and "records" in raw:  # a saved JSON output
            raw = raw.get("config", {})
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold one JSON object")
        if "command" in raw and raw["command"] != ns["command"]:
            raise ConfigError(f"config file is for {raw['command']!r}, not {ns['command']!r}")
    if "bc" in ns:
        raw.pop("theta", None)
        raw.pop("bc", None)
    raw.update(ns)
    return parse_config(raw)


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except SystemExit as exc:  # argparse usage errors already exit with 2
        return int(exc.code or 0)
    except RegimeError as exc:
        print(f"qgorder: regime gate: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (ConfigError, ConstraintViolation, DomainError, ValueError) as exc:
        print(f"qgorder: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        records = run_records(cfg)
    except RegimeError as exc:
        print(f"qgorder: regime gate: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except (ConfigError, ConstraintViolation, DomainError, MethodMismatch, Unsupported) as exc:
        print(f"qgorder: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QGError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"qgorder: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"qgorder: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(cfg, records)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK
