"""Acceptance suite: nine desk-scale checks, each printing one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from qgorder.evolve import TrotterPlan, convergence_study, l2_distance, trotter_evolve
from qgorder.extensions import BoundaryCondition, fit_theta, make_reference_modes, verify_deficiency_integrability
from qgorder.grid import GridSpec
from qgorder.kernels import TimeMode, heat_dirichlet, heat_neumann, heat_robin
from qgorder.mcpaths import BinComparison, McConfig, default_bins, estimate_propagator, free_kernel_bins, \
    trotter_reference_bins
from qgorder.ordering import CurvedL, PhysicalConstants, WaveFunction, classify, from_flat, ordering_from_jplus, \
    to_flat
from qgorder.spectral import dirichlet_eigenbasis, fd_eigensolve, spectral_propagate

C = PhysicalConstants(1.0, 4.0)
D, N = BoundaryCondition.dirichlet(), BoundaryCondition.neumann()


class Report:
    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.failures = []
        self.notes = []

    def check(self, ok, what):
        if not ok:
            self.failures.append(what)
        return ok

    def note(self, text):
        self.notes.append(text)

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        elapsed = time.perf_counter() - self.t0
        if exc[0] is not None:
            self.failures.append(f"raised {exc[0].__name__}: {exc[1]}")
        self.check(elapsed <= self.budget, f"runtime {elapsed:.1f}s > {self.budget}s")
        status = "FAIL" if self.failures else "PASS"
        detail = "; ".join(self.failures or self.notes)
        self.line = f"{status} [{self.number}] {self.title} ({elapsed:.2f}s) {detail}"
        _emit(self.line)
        return False


_printer = print


def _emit(line):
    _printer(line)


@pytest.fixture(autouse=True)
def _visible_output(capsys):
    global _printer

    def show(line):
        with capsys.disabled():
            print("\n" + line)

    _printer = show
    yield
    _printer = print


def _ladder(a, n):
    return C.omega * (2 * np.arange(n) + 1 + a)


def test_1_spectrum_oracle():
    with Report(1, "FD spectrum vs exact ladders", 30.0) as r:
        g = GridSpec(12.0, 4000)
        for jp, tol in ((0.5, 1e-4), (1.0, 1e-4), (2.0, 1e-3)):
            e = fd_eigensolve(ordering_from_jplus(jp), C, D, g, 6).energies
            err = float(np.max(np.abs(e - _ladder(jp, 6)) / _ladder(jp, 6)))
            r.check(err <= tol, f"|J+|={jp}: rel error {err:.2e} > {tol}")
            r.note(f"|J+|={jp}: {err:.1e}")
    assert not r.failures, r.line


def test_2_trotter_convergence():
    with Report(2, "imaginary-time Trotter convergence", 120.0) as r:
        o = ordering_from_jplus(1.0)
        g = GridSpec(12.0, 2048)
        oracle = dirichlet_eigenbasis(o, C, 40, g)
        psi0 = oracle.synthesize(np.r_[1.0, 1.0, np.zeros(38)] / math.sqrt(2))
        n_list = [32, 64, 128, 256]
        tab = convergence_study(psi0, TrotterPlan(o, C, D, 0.5, 32, grid=g), n_list, oracle)
        e256 = float(tab.errors[-1])
        ratios = tab.errors[:-1] / tab.errors[1:]
        r.check(e256 <= 2e-3, f"L2 error at n=256 is {e256:.2e} > 2e-3")
        r.check(bool(np.all((ratios >= 1.7) & (ratios <= 2.3))), f"ratios {np.round(ratios, 3)} outside [1.7, 2.3]")
        r.note(f"e(256)={e256:.2e}, ratios={np.round(ratios, 3).tolist()}")
    assert not r.failures, r.line


def test_3_kernel_identities():
    with Report(3, "heat-kernel identities", 10.0) as r:
        w = np.linspace(0.0, 12.0, 4097)
        t1, t2, y, z = 0.1, 0.15, 0.7, 1.3
        kernels = {"D": heat_dirichlet, "N": heat_neumann, "R1": lambda t, a, b: heat_robin(1.0, t, a, b)}
        for name, k in kernels.items():
            err = abs(integrate.simpson(k(t1, y, w) * k(t2, w, z), x=w) - k(t1 + t2, y, z))
            r.check(err <= 1e-8, f"semigroup {name}: {err:.1e}")
        lo = abs(heat_robin(1e-3, 0.25, 1, 1) - heat_dirichlet(0.25, 1, 1))
        hi = abs(heat_robin(1e3, 0.25, 1, 1) - heat_neumann(0.25, 1, 1))
        r.check(lo <= 5e-3, f"Robin -> Dirichlet gap {lo:.1e}")
        r.check(hi <= 5e-3, f"Robin -> Neumann gap {hi:.1e}")
        mass = integrate.simpson(heat_neumann(0.25, 1.0, w), x=w)
        r.check(abs(mass - 1) <= 1e-8, f"Neumann mass off by {abs(mass - 1):.1e}")
        r.note(f"Robin limits {lo:.1e}, {hi:.1e}; Neumann mass error {abs(mass - 1):.1e}")
    assert not r.failures, r.line


def test_4_deficiency_dichotomy():
    with Report(4, "deficiency-solution integrability", 30.0) as r:
        eps = 10.0 ** -np.arange(1, 8)
        crit = verify_deficiency_integrability(ordering_from_jplus(0.5), C, eps)
        r.check(crit.convergent and bool(np.all(crit.shrink_factors >= 4.0)),
                f"|J+|=1/2 shrink factors {np.round(crit.shrink_factors, 2)}")
        log = verify_deficiency_integrability(ordering_from_jplus(1.0), C, np.geomspace(1e-2, 1e-6, 9))
        r.check(not log.convergent and log.log_r2 >= 0.999, f"|J+|=1 log fit R^2 {log.log_r2:.5f}")
        power = verify_deficiency_integrability(ordering_from_jplus(1.5), C, eps)
        r.check(abs(power.density_slope + 2.0) <= 0.2, f"|J+|=3/2 slope {power.density_slope:.3f}")
        r.note(f"min shrink {np.min(crit.shrink_factors):.1f}, R^2 {log.log_r2:.5f}, slope {power.density_slope:.3f}")
    assert not r.failures, r.line


def _angle_gap(a, b):
    d = (a - b) % math.pi  # angles are defined modulo pi
    return min(d, math.pi - d)


def test_5_beta_theta_dictionary():
    with Report(5, "beta <-> theta dictionary at |J+| = 1/2", 60.0) as r:
        o = ordering_from_jplus(0.5)
        modes = make_reference_modes(o, C)
        g = GridSpec(12.0, 4000)
        ground = fd_eigensolve(o, C, BoundaryCondition.robin(1.0, modes), g, 1).mode(0)
        theta = fit_theta(modes, ground)
        beta = modes.c1 / modes.c2 * math.tan(theta)
        r.check(abs(beta - 1.0) <= 0.05, f"Robin(1) gives beta {beta:.4f}")
        td = fit_theta(modes, fd_eigensolve(o, C, D, g, 1).mode(0))
        tn = fit_theta(modes, fd_eigensolve(o, C, N, g, 1).mode(0))
        r.check(_angle_gap(td, 0.0) <= 1e-2, f"Dirichlet theta {td:.4f}")
        r.check(_angle_gap(tn, math.pi / 2) <= 1e-2, f"Neumann theta {tn:.4f}")
        r.note(f"beta={beta:.4f}, theta_D={td:.1e}, theta_N={tn:.4f}")
    assert not r.failures, r.line


def test_6_real_time_evolution():
    with Report(6, "real-time Trotter vs spectral propagation", 120.0) as r:
        o = ordering_from_jplus(0.5)
        g = GridSpec(12.0, 2048)
        basis = dirichlet_eigenbasis(o, C, 40, g)
        psi0 = basis.synthesize(np.r_[1.0, 1.0, np.zeros(38)] / math.sqrt(2))
        res = trotter_evolve(psi0, TrotterPlan(o, C, D, 0.5, 512, TimeMode.REAL, grid=g))
        drift = float(np.max(np.abs(np.diff(res.norms))))
        err = l2_distance(res.psi, spectral_propagate(basis, psi0, 0.5, TimeMode.REAL))
        r.check(drift <= 1e-10, f"per-step norm change {drift:.1e}")
        r.check(err <= 5e-3, f"L2 error {err:.2e}")
        r.note(f"norm drift {drift:.1e}, L2 error {err:.2e}")
    assert not r.failures, r.line


def test_7_monte_carlo():
    with Report(7, "path-measure Monte Carlo", 60.0) as r:
        edges = default_bins()
        base = dict(ordering=ordering_from_jplus(0.5), constants=C, t_total=0.5, n_slices=32, n_samples=200_000,
                    y0=1.0, seed=0)
        cfg = McConfig(bc=D, **base)
        comp = BinComparison(edges, estimate_propagator(cfg, edges), trotter_reference_bins(cfg, edges))
        r.check(comp.worst_sigma <= 3.0, f"Trotter reference worst {comp.worst_sigma:.2f} sigma")
        worst = [comp.worst_sigma]
        for bc in (D, N):
            free = McConfig(bc=bc, free=True, **base)
            fc = BinComparison(edges, estimate_propagator(free, edges), free_kernel_bins(free, edges))
            r.check(fc.worst_sigma <= 3.0, f"free {bc.describe()} worst {fc.worst_sigma:.2f} sigma")
            worst.append(fc.worst_sigma)
        r.note(f"worst |z| (reference, free D, free N) = {', '.join(f'{w:.2f}' for w in worst)}; "
               f"{int(comp.tested.sum())} bins tested")
    assert not r.failures, r.line


def test_8_reference_wronskian():
    with Report(8, "reference-mode Wronskian", 5.0) as r:
        y = np.linspace(0.05, 5.0, 400)
        for jp in (0.0, 0.5, 0.9):
            err = float(np.max(np.abs(make_reference_modes(ordering_from_jplus(jp), C).wronskian(y) - 1)))
            r.check(err <= 1e-8, f"|J+|={jp}: {err:.1e}")
            r.note(f"|J+|={jp}: {err:.1e}")
    assert not r.failures, r.line


def test_9_representation_unitarity():
    with Report(9, "to_flat / from_flat unitarity", 5.0) as r:
        lg = np.linspace(1e-4, 40.0, 20001)
        worst = 0.0
        for j in ((0.5, 0.5, 0.0), (0.0, 0.5, 0.5), (1.0, -1.0, 1.0), (0.2, 0.3, 0.5)):
            o = classify(*j)
            a = WaveFunction(lg, lg ** 0.5 * np.exp(-lg) * (1 + 0.3j * lg), CurvedL(o.j_minus))
            b = WaveFunction(lg, lg * np.exp(-0.5 * lg - 0.2j * lg), CurvedL(o.j_minus))
            fa, fb = to_flat(a, o), to_flat(b, o)
            scale = a.norm() * b.norm()
            worst = max(worst, abs(fa.norm() - a.norm()) / a.norm(), abs(fa.inner(fb) - a.inner(b)) / scale)
            back = from_flat(fa, o)
            worst = max(worst, float(np.max(np.abs(back.values - a.values))) / float(np.max(np.abs(a.values))))
        r.check(worst <= 1e-10, f"worst relative deviation {worst:.1e}")
        r.note(f"worst relative deviation {worst:.1e}")
    assert not r.failures, r.line


if __name__ == "__main__":
    import sys

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    failed = 0
    for fn in tests:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
