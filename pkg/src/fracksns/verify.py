"""Property suites behind the ``verify`` subcommand.

Each check returns a :class:`Check` holding the measured value and its
tolerance; a suite passes when every check does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import kernel, propagator, solver, specfun
from .grid import FracParams, TorusGrid


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: measured={self.measured:.3e} tol={self.tolerance:.1e}"


def _le(name, measured, tol):
    return Check(name, float(measured), tol, bool(measured <= tol))


def specfun_suite() -> list[Check]:
    x = np.linspace(0.0, 30.0, 301)
    exp_err = np.max(np.abs(specfun.ml(1.0, 1.0, -x) - np.exp(-x)))
    rec = max(float(np.max(specfun.recurrence_residual(b, -np.linspace(0, 50, 50))))
              for b in np.linspace(0.05, 1.0, 20))
    moments = max(abs(q - c) / c for q, c in
                  (specfun.mainardi_moment(b, r) for b in (0.3, 0.5, 0.7, 0.9) for r in (0.0, 1.0, 2.0)))
    h = 1e-4
    deriv = 0.0
    for b in (0.4, 0.7):
        for z in (-0.5, -2.0, -6.0):
            fd = (specfun.ml(b, 1.0, z + h) - specfun.ml(b, 1.0, z - h)) / (2 * h)
            deriv = max(deriv, abs(specfun.ml(b, b, z) - b * fd))
    mono = min(float(np.min(-np.diff(specfun.ml(b, 1.0, -np.linspace(0, 40, 400)))))
               for b in (0.3, 0.6, 0.9, 1.0))
    return [
        _le("E_{1,1}(-x) vs exp(-x) on [0,30]", exp_err, 1e-12),
        _le("recurrence E_b = 1 + z E_{b,b+1}", rec, 1e-11),
        _le("Mainardi moments vs Gamma ratio", moments, 1e-6),
        _le("E_{b,b} = b E_b' (central difference h=1e-4)", deriv, 1e-6),
        Check("E_b(-x) strictly decreasing", mono, 0.0, mono > 0),
    ]


def kernel_suite() -> list[Check]:
    mass, _ = kernel.kernel_mass(1.5)
    rep = kernel.decay_bound_check(1.5, 1, 50.0, n_points=60)
    x = np.array([0.0, 0.7, 3.0])
    t = 2.5
    scaled = t ** (-1 / 1.5) * np.array([kernel.eval_kernel(1.5, 1, t ** (-1 / 1.5) * xi) for xi in x])
    direct = np.array([kernel.eval_kernel_with_error(1.5, 1, xi, t) for xi in x])
    self_sim = float(np.max(np.abs(scaled - direct[:, 0]) / (2 * direct[:, 1])))
    k0 = abs(kernel.eval_kernel(1.5, 1, 0.0) - kernel.kernel_origin(1.5))
    return [
        _le("int K = 1 (alpha=1.5)", abs(mass - 1), 1e-8),
        Check("weighted decay sup finite (alpha=1.5)", rep.sup, math.inf, math.isfinite(rep.sup)),
        _le("weighted decay last-decade slope", rep.tail_slope, 0.05),
        _le("self-similarity / (2 quad err)", self_sim, 1.0),
        _le("K(0) = Gamma(1+1/alpha)/pi", k0, 1e-12),
    ]


def propagator_suite() -> list[Check]:
    beta, lam = 0.7, 2.0
    w = propagator.duhamel_weight(0.5, 1.0, lam, beta)
    ref, _ = integrate.quad(lambda s: s ** (beta - 1) * specfun.ml(beta, beta, -lam * s ** beta),
                            0.5, 1.0, epsabs=1e-14)
    edges = np.linspace(0, 2.0, 9)
    pieces = sum(propagator.duhamel_weight(a, b, lam, beta) for a, b in zip(edges[:-1], edges[1:]))
    tele = abs(pieces - propagator.duhamel_weight(0, 2.0, lam, beta))
    rng = np.random.default_rng(7)
    scal = max(propagator.scaling_identity_check(rng.uniform(1.01, 2), rng.uniform(0.05, 1),
                                                 rng.uniform(0.1, 10), rng.uniform(0.01, 5),
                                                 rng.uniform(0, 10)) for _ in range(100))
    sub = max(abs(specfun.subordinated_exponential(b, lm, t) - specfun.ml(b, 1.0, -lm * t ** b))
              for b in (0.3, 0.7) for lm in (0.5, 4.0) for t in (0.2, 2.0))
    grid = TorusGrid(2, 16)
    tab = propagator.build_table(grid, FracParams(1.5, 1.0, 0.3), 0.7)
    semigroup = float(np.max(np.abs(tab.e_beta - np.exp(-0.7 * (grid.xi_pow(1.5) + 0.3)))))
    return [
        _le("Duhamel weight vs quadrature", abs(w - ref), 1e-9),
        _le("Duhamel weights telescope", tele, 1e-12),
        _le("scaling identity, 100 random tuples", scal, 1e-12),
        _le("scalar subordination", sub, 1e-6),
        _le("beta=1 multiplier vs exp", semigroup, 1e-12),
    ]


def _preset_problem(n=16, beta=0.8, gamma=0.5, dt=0.02, steps=40):
    grid = TorusGrid(2, n)
    x, y = grid.coords()
    cfg = solver.SolverConfig(grid, FracParams(1.8, beta, gamma), dt, steps, phi=np.cos(x + y))
    s0 = solver.SystemState.from_physical(
        grid, 1 + 0.5 * np.cos(x) * np.cos(y), 0.5 * np.sin(x) + 0.3 * np.cos(2 * y),
        np.stack([0.5 * np.sin(y), 0.5 * np.sin(x)]))
    return cfg, s0


def temporal_order(beta: float, n: int = 16, t_final: float = 0.5, base: int = 16) -> float:
    """Least-squares order of ||X_h - X_{h/4}|| over h = T/base, T/(2 base), T/(4 base)."""
    finals = {}
    for m in (base, 2 * base, 4 * base, 8 * base, 16 * base):
        cfg, s0 = _preset_problem(n=n, beta=beta, dt=t_final / m, steps=m)
        finals[m] = solver.run(cfg, s0).state

    def dist(a, b):
        return sum(float(np.linalg.norm((x - y).ravel()))
                   for x, y in ((a.n_hat, b.n_hat), (a.v_hat, b.v_hat), (a.u_hat, b.u_hat)))

    errs = [dist(finals[m], finals[4 * m]) for m in (base, 2 * base, 4 * base)]
    return float(np.polyfit(np.log([1.0, 0.5, 0.25]), np.log(errs), 1)[0])


def solver_suite() -> list[Check]:
    cfg, s0 = _preset_problem()
    res = solver.run(cfg, s0)
    d = res.diagnostics
    mn = d.column("mass_n")
    drift = float(np.max(np.abs(mn - mn[0])) / abs(mn[0]))
    div = float(np.max(d.column("div_residual")))
    vm = solver.verify_v_mass(d, mn[0], d.column("mass_v")[0], cfg.params)
    order = temporal_order(1.0, base=8)
    return [
        _le("mass_n relative drift", drift, 1e-11),
        _le("divergence residual", div, 1e-10),
        _le("v zero mode vs closed form", vm, 1e-9),
        Check("temporal order (beta=1)", order, 0.2, abs(order - 1.0) <= 0.2),
    ]


SUITES: dict[str, Callable[[], list[Check]]] = {
    "specfun": specfun_suite,
    "kernel": kernel_suite,
    "propagator": propagator_suite,
    "solver": solver_suite,
}


def run_suite(name: str) -> list[Check]:
    if name == "all":
        return [c for fn in SUITES.values() for c in fn()]
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name]()
