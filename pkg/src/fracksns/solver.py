"""Fractional exponential integrator for the mild form of the chemotaxis-fluid system.

Unknowns are kept as Fourier coefficients.  For every mode and unknown X

    X(t_{k+1}) = E_beta(-t_{k+1}^beta lam) X_0 + sum_{j<=k} W_{k-j}(lam) F_j,

with lam = |xi|^alpha for n and u, |xi|^alpha + gamma for v, and
W_m = G((m+1) dt) - G(m dt), G(s) = s^beta E_{beta,beta+1}(-lam s^beta)
the exact integral of the Duhamel kernel over one step.  The nonlinear
terms are frozen on each step (rectangle rule):

    Fn = -div(u n) - div(n grad v),  Fv = n - div(u v),
    Fu = -P[div(u (x) u) + n grad phi].
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import grid as g
from .grid import FracParams, TorusGrid
from .propagator import duhamel_antiderivative, lag_antiderivatives, ml_of_lambda, unique_lambda
from .specfun import gamma_fn


class BlowUp(RuntimeError):
    """Raised when the state becomes non-finite; carries the time reached."""

    def __init__(self, t: float, reason: str = "non-finite field"):
        super().__init__(f"{reason} at t={t!r}")
        self.t = t


@dataclass(frozen=True)
class PicardConfig:
    enabled: bool = False
    max_iters: int = 50
    tol: float = 1e-10


@dataclass(frozen=True)
class NormExponents:
    """Exponents for ||n||_q, ||grad v||_r, ||u||_p and optional Sobolev index mu."""

    q: float = 2.0
    r: float = 2.0
    p: float = 2.0
    mu: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class SolverConfig:
    grid: TorusGrid
    params: FracParams
    dt: float
    n_steps: int
    phi: np.ndarray | None = None
    dealias: float = 2 / 3
    blowup_threshold: float = 1e8
    picard: PicardConfig = field(default_factory=PicardConfig)
    exponents: NormExponents = field(default_factory=NormExponents)
    snapshot_every: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if not 0 < self.dealias <= 1:
            raise ValueError(f"dealias must lie in (0, 1], got {self.dealias}")
        if self.phi is not None and self.phi.shape != self.grid.shape:
            raise ValueError("phi does not match the grid")

    @property
    def final_time(self) -> float:
        return self.dt * self.n_steps


@dataclass
class SystemState:
    """Spectral state; ``u_hat`` has a leading component axis."""

    t: float
    n_hat: np.ndarray
    v_hat: np.ndarray
    u_hat: np.ndarray

    @classmethod
    def from_physical(cls, grid: TorusGrid, n, v, u=None, t: float = 0.0, project: bool = True):
        if u is None:
            u = np.zeros((grid.d,) + grid.shape)
        uh = g.transform_vec(grid, np.asarray(u, float))
        if project:
            uh = g.leray_hat(grid, uh)
        return cls(t, g.transform(grid, np.asarray(n, float)), g.transform(grid, np.asarray(v, float)), uh)

    def physical(self, grid: TorusGrid):
        return (g.inverse_transform(grid, self.n_hat), g.inverse_transform(grid, self.v_hat),
                g.inverse_transform_vec(grid, self.u_hat))

    def scaled(self, factor: float) -> "SystemState":
        return SystemState(self.t, factor * self.n_hat, factor * self.v_hat, factor * self.u_hat)


# ---------------------------------------------------------------------------
# nonlinear terms


class Nonlinearity:
    """Evaluates the spectral nonlinear terms with the dealiasing mask applied to every product."""

    def __init__(self, cfg: SolverConfig):
        grid = cfg.grid
        self.grid = grid
        self.mask = grid.dealias_mask(cfg.dealias)
        phi = np.zeros(grid.shape) if cfg.phi is None else cfg.phi
        self.grad_phi_hat = g.gradient_hat(grid, g.transform(grid, phi))
        self.grad_phi = g.inverse_transform_vec(grid, self.grad_phi_hat * self.mask)

    def _phys(self, fh):
        return g.inverse_transform(self.grid, fh * self.mask)

    def _phys_vec(self, vh):
        return g.inverse_transform_vec(self.grid, vh * self.mask)

    def _hat_vec(self, v):
        return g.transform_vec(self.grid, v) * self.mask

    def __call__(self, s: SystemState):
        grid = self.grid
        n = self._phys(s.n_hat)
        v = self._phys(s.v_hat)
        u = self._phys_vec(s.u_hat)
        gv = self._phys_vec(g.gradient_hat(grid, s.v_hat))
        fn = -g.divergence_hat(grid, self._hat_vec(u * n + n * gv))
        fv = s.n_hat - g.divergence_hat(grid, self._hat_vec(u * v))
        adv = np.stack([g.divergence_hat(grid, self._hat_vec(u * u[i])) for i in range(grid.d)])
        force = self._hat_vec(n * self.grad_phi)
        fu = -g.leray_hat(grid, adv + force)
        return fn, fv, fu


def nonlinear_terms(s: SystemState, cfg: SolverConfig):
    """Spectral (Fn, Fv, Fu) at state ``s``."""
    return Nonlinearity(cfg)(s)


# ---------------------------------------------------------------------------
# weight tables


class WeightTables:
    """Lag weights W_m and linear multipliers E_beta(-(m dt)^beta lam) on the grid.

    Tables are built for lags 0..n_steps independently of how a run is split,
    so a restarted run sees bit-identical coefficients.
    """

    def __init__(self, cfg: SolverConfig):
        grid, prm = cfg.grid, cfg.params
        self.n_steps = cfg.n_steps
        shapes = {}
        for name, shift in (("n", 0.0), ("v", prm.gamma)):
            vals, inv = unique_lambda(grid, prm.alpha, shift)
            ant = lag_antiderivatives(prm.beta, vals, cfg.dt, cfg.n_steps)
            lin = np.stack([ml_of_lambda(prm.beta, 1.0, vals, m * cfg.dt)
                            for m in range(cfg.n_steps + 1)])
            shapes[name] = ((ant[1:] - ant[:-1])[:, inv], lin[:, inv], ant[:, inv])
        self.w_n, self.e_n, self.g_n = shapes["n"]
        self.w_v, self.e_v, self.g_v = shapes["v"]


# ---------------------------------------------------------------------------
# history and restart files


HISTORY_MAGIC = b"FKSH"
HISTORY_VERSION = 1
_HIST_HEADER = struct.Struct("<4sHHIddddII")


class History:
    """Initial spectral state plus the nonlinear terms of every completed step."""

    def __init__(self, cfg: SolverConfig, initial: SystemState):
        shp = cfg.grid.shape
        k = cfg.n_steps
        self.cfg = cfg
        self.initial = initial
        self.fn = np.zeros((k,) + shp, dtype=complex)
        self.fv = np.zeros((k,) + shp, dtype=complex)
        self.fu = np.zeros((k, cfg.grid.d) + shp, dtype=complex)
        self.times = np.zeros(k)
        self.length = 0

    def append(self, t: float, fn, fv, fu):
        j = self.length
        if j >= len(self.times):
            raise IndexError("history is full")
        self.fn[j], self.fv[j], self.fu[j], self.times[j] = fn, fv, fu, t
        self.length += 1

    def to_bytes(self) -> bytes:
        c = self.cfg
        head = _HIST_HEADER.pack(HISTORY_MAGIC, HISTORY_VERSION, c.grid.d, c.grid.n, c.grid.length,
                                 c.params.alpha, c.params.beta, c.params.gamma, c.n_steps, self.length)
        parts = [head, struct.pack("<dd", c.dt, self.initial.t)]
        for arr in (self.initial.n_hat, self.initial.v_hat, self.initial.u_hat):
            parts.append(np.ascontiguousarray(arr, dtype="<c16").tobytes())
        m = self.length
        parts.append(np.ascontiguousarray(self.times[:m], dtype="<f8").tobytes())
        for arr in (self.fn[:m], self.fv[:m], self.fu[:m]):
            parts.append(np.ascontiguousarray(arr, dtype="<c16").tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes, cfg: SolverConfig) -> "History":
        fields = _HIST_HEADER.unpack_from(data)
        magic, version, d, n, length, alpha, beta, gamma, n_steps, m = fields
        if magic != HISTORY_MAGIC or version != HISTORY_VERSION:
            raise ValueError("not a history file")
        want = (cfg.grid.d, cfg.grid.n, cfg.grid.length, cfg.params.alpha, cfg.params.beta,
                cfg.params.gamma, cfg.n_steps)
        if (d, n, length, alpha, beta, gamma, n_steps) != want:
            raise ValueError("history file does not match the configuration")
        pos = _HIST_HEADER.size
        dt, t0 = struct.unpack_from("<dd", data, pos)
        if dt != cfg.dt:
            raise ValueError("history file time step does not match the configuration")
        pos += 16
        shp = cfg.grid.shape

        def take(shape, dtype):
            nonlocal pos
            count = int(np.prod(shape))
            size = count * np.dtype(dtype).itemsize
            arr = np.frombuffer(data, dtype=dtype, count=count, offset=pos).reshape(shape)
            pos += size
            return arr.astype(complex if dtype == "<c16" else float)

        init = SystemState(t0, take(shp, "<c16"), take(shp, "<c16"), take((d,) + shp, "<c16"))
        h = cls(cfg, init)
        h.times[:m] = take((m,), "<f8")
        h.fn[:m] = take((m,) + shp, "<c16")
        h.fv[:m] = take((m,) + shp, "<c16")
        h.fu[:m] = take((m, d) + shp, "<c16")
        h.length = m
        if pos != len(data):
            raise ValueError("trailing bytes in history file")
        return h


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class Diagnostics:
    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    def append(self, row):
        if len(row) != len(self.columns):
            raise ValueError("row length does not match the columns")
        if self.rows and row[0] < self.rows[-1][0]:
            raise ValueError("diagnostic times must be nondecreasing")
        self.rows.append([float(x) for x in row])

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        lines += [",".join(repr(x) for x in r) for r in self.rows]
        return "\n".join(lines) + "\n"


def _mu_tag(mu: float) -> str:
    return repr(float(mu)).replace(".", "p")


class DiagnosticRecorder:
    def __init__(self, cfg: SolverConfig, tables: WeightTables, initial: SystemState):
        self.cfg = cfg
        self.tables = tables
        self.initial = initial
        ex = cfg.exponents
        d, a, b = cfg.grid.d, cfg.params.alpha, cfg.params.beta
        inv = lambda x: 0.0 if math.isinf(x) else 1.0 / x  # noqa: E731
        k = d * b / a
        # time weights of the global decay classes
        self.w_n = k * ((2 * a - 2) / d - inv(ex.q))
        self.w_v = k * ((a - 1) / d - inv(ex.r))
        self.w_u = k * ((a - 1) / d - inv(ex.p))
        cols = ["t", "mass_n", "mass_v", "norm_n_q", "norm_gradv_r", "norm_u_p", "div_residual",
                "weighted_n_q", "weighted_gradv_r", "weighted_u_p",
                "decay_n_q", "decay_gradv_r", "decay_u_p"]
        for mu in ex.mu:
            tag = _mu_tag(mu)
            cols += [f"sobolev_n_mu{tag}", f"weighted_sobolev_n_mu{tag}", f"decay_sobolev_n_mu{tag}"]
        self.diag = Diagnostics(cols)

    def _weight(self, t, expo):
        return float("nan") if t == 0 else t ** expo

    def record(self, k: int, s: SystemState):
        cfg, grid, ex = self.cfg, self.cfg.grid, self.cfg.exponents
        t = s.t
        vol = grid.volume
        n, v, u = s.physical(grid)
        gv = g.inverse_transform_vec(grid, g.gradient_hat(grid, s.v_hat))
        nq = g.lp_norm(grid, n, ex.q)
        gr = g.lp_norm(grid, gv, ex.r)
        up = g.lp_norm(grid, u, ex.p)
        res = g.divergence_residual(grid, s.u_hat)
        # differences from the linear evolution of the initial data
        tb = self.tables
        i0 = self.initial
        dn_hat = s.n_hat - tb.e_n[k] * i0.n_hat
        dn = g.inverse_transform(grid, dn_hat)
        dgv = g.inverse_transform_vec(grid, g.gradient_hat(grid, s.v_hat - tb.e_v[k] * i0.v_hat))
        du = g.inverse_transform_vec(grid, s.u_hat - tb.e_n[k] * i0.u_hat)
        wn, wv, wu = (self._weight(t, e) for e in (self.w_n, self.w_v, self.w_u))
        row = [t, vol * s.n_hat.flat[0].real, vol * s.v_hat.flat[0].real, nq, gr, up, res,
               wn * nq, wv * gr, wu * up,
               wn * g.lp_norm(grid, dn, ex.q), wv * g.lp_norm(grid, dgv, ex.r),
               wu * g.lp_norm(grid, du, ex.p)]
        d, a, b = grid.d, cfg.params.alpha, cfg.params.beta
        for mu in ex.mu:
            wmu = self._weight(t, self.w_n + b * mu / a)
            sn = g.sobolev_norm(grid, n, mu, ex.q)
            row += [sn, wmu * sn, wmu * g.sobolev_norm(grid, dn, mu, ex.q)]
        self.diag.append(row)


def blowup_monitor(diag: Diagnostics, threshold: float) -> float | None:
    """Earliest recorded time at which ||n||_q, ||grad v||_r or ||u||_p exceeds ``threshold``."""
    if math.isinf(threshold):
        return None
    t = diag.column("t")
    stacked = np.stack([diag.column(c) for c in ("norm_n_q", "norm_gradv_r", "norm_u_p")])
    bad = np.any((stacked > threshold) | ~np.isfinite(stacked), axis=0)
    if not bad.any():
        return None
    return float(t[int(np.argmax(bad))])


# ---------------------------------------------------------------------------
# the marcher


class Marcher:
    """Advances the discrete Duhamel formula one step at a time."""

    def __init__(self, cfg: SolverConfig, initial: SystemState, history: History | None = None,
                 tables: WeightTables | None = None):
        if initial.t != 0.0:
            raise ValueError("the initial state must sit at t = 0")
        self.cfg = cfg
        self.tables = tables or WeightTables(cfg)
        self.nonlinear = Nonlinearity(cfg)
        self.history = history or History(cfg, initial)
        self.initial = self.history.initial
        self.k = self.history.length
        self.state = self.state_at(self.k)

    def _duhamel_sum(self, k: int, fn, fv, fu):
        """Sum over j <= k - 1 of W_{k-1-j} F_j in a fixed order."""
        tb = self.tables
        acc_n = np.zeros(self.cfg.grid.shape, dtype=complex)
        acc_v = np.zeros_like(acc_n)
        acc_u = np.zeros((self.cfg.grid.d,) + self.cfg.grid.shape, dtype=complex)
        for j in range(k):
            m = k - 1 - j
            acc_n += tb.w_n[m] * fn[j]
            acc_v += tb.w_v[m] * fv[j]
            acc_u += tb.w_n[m] * fu[j]
        return acc_n, acc_v, acc_u

    def _assemble(self, k: int, fn, fv, fu) -> SystemState:
        tb = self.tables
        i0 = self.initial
        sn, sv, su = self._duhamel_sum(k, fn, fv, fu)
        n_hat = tb.e_n[k] * i0.n_hat + sn
        v_hat = tb.e_v[k] * i0.v_hat + sv
        u_hat = g.leray_hat(self.cfg.grid, tb.e_n[k] * i0.u_hat + su)
        return SystemState(k * self.cfg.dt, n_hat, v_hat, u_hat)

    def state_at(self, k: int) -> SystemState:
        if k == 0:
            return self.initial
        h = self.history
        return self._assemble(k, h.fn, h.fv, h.fu)

    def step(self) -> SystemState:
        if self.k >= self.cfg.n_steps:
            raise IndexError("run already complete")
        fn, fv, fu = self.nonlinear(self.state)
        self.history.append(self.state.t, fn, fv, fu)
        self.k += 1
        new = self.state_at(self.k)
        for arr in (new.n_hat, new.v_hat, new.u_hat):
            if not np.all(np.isfinite(arr)):
                raise BlowUp(new.t)
        self.state = new
        return new


def step(s: SystemState, h: History, cfg: SolverConfig) -> SystemState:
    """One step from ``s`` given its history; appends to ``h`` and returns the new state."""
    m = Marcher(cfg, h.initial, history=h)
    if m.k * cfg.dt != s.t:
        raise ValueError("history length does not match the state time")
    m.state = s
    return m.step()


# ---------------------------------------------------------------------------
# runs


@dataclass
class RunResult:
    diagnostics: Diagnostics
    snapshots: list[tuple[int, float, tuple[np.ndarray, np.ndarray, np.ndarray]]]
    state: SystemState
    history: History
    steps_done: int
    t_max: float | None = None
    blowup_table: list[tuple[float, float, float, float]] = field(default_factory=list)

    @property
    def blew_up(self) -> bool:
        return self.t_max is not None


def run(cfg: SolverConfig, initial: SystemState, history: History | None = None,
        stop_after: int | None = None) -> RunResult:
    """March ``cfg.n_steps`` steps (or up to ``stop_after``), recording diagnostics every step.

    When a history is supplied the run resumes after its last step.  A run
    stops early once any monitored norm exceeds ``cfg.blowup_threshold`` or
    the state becomes non-finite.
    """
    m = Marcher(cfg, initial, history=history)
    rec = DiagnosticRecorder(cfg, m.tables, m.initial)
    snaps = []
    last = cfg.n_steps if stop_after is None else min(stop_after, cfg.n_steps)

    def snap(k, s):
        if cfg.snapshot_every and k % cfg.snapshot_every == 0:
            snaps.append((k, s.t, s.physical(cfg.grid)))

    rec.record(m.k, m.state)
    snap(m.k, m.state)
    t_max = blowup_monitor(rec.diag, cfg.blowup_threshold)
    while t_max is None and m.k < last:
        try:
            s = m.step()
        except BlowUp as exc:
            t_max = exc.t
            break
        rec.record(m.k, s)
        snap(m.k, s)
        t_max = blowup_monitor(rec.diag, cfg.blowup_threshold)
    table = []
    if t_max is not None:
        d = rec.diag
        table = list(zip(d.column("t"), d.column("norm_n_q"), d.column("norm_gradv_r"),
                         d.column("norm_u_p")))
    return RunResult(rec.diag, snaps, m.state, m.history, m.k, t_max, table)


# ---------------------------------------------------------------------------
# Picard iteration of the discrete map


@dataclass
class PicardResult:
    trajectory: list[SystemState]
    distances: list[float]
    ratios: list[float]
    converged: bool
    contraction_failed: bool

    def report(self) -> str:
        lines = [f"iterations: {len(self.distances)}",
                 f"converged: {str(self.converged).lower()}",
                 f"contraction_failed: {str(self.contraction_failed).lower()}"]
        lines += [f"d[{i}] = {d!r}" for i, d in enumerate(self.distances)]
        lines += [f"ratio[{i}] = {r!r}" for i, r in enumerate(self.ratios)]
        return "\n".join(lines)


def _window_distance(grid: TorusGrid, ex: NormExponents, a: list[SystemState], b: list[SystemState]) -> float:
    out = 0.0
    for x, y in zip(a, b):
        dn = g.inverse_transform(grid, x.n_hat - y.n_hat)
        dgv = g.inverse_transform_vec(grid, g.gradient_hat(grid, x.v_hat - y.v_hat))
        du = g.inverse_transform_vec(grid, x.u_hat - y.u_hat)
        out = max(out, g.lp_norm(grid, dn, ex.q) + g.lp_norm(grid, dgv, ex.r) + g.lp_norm(grid, du, ex.p))
    return out


def picard_solve(s0: SystemState, cfg: SolverConfig, n_steps: int | None = None) -> PicardResult:
    """Iterate the discrete Duhamel map with the nonlinear terms of the previous iterate frozen.

    Iterate 0 holds the initial data at every time level.  Stops when the
    sup-over-window distance between iterates drops to ``cfg.picard.tol``,
    after ``cfg.picard.max_iters`` iterations, or when the ratio of
    successive distances is >= 1 three times in a row.
    """
    k_steps = cfg.n_steps if n_steps is None else n_steps
    m = Marcher(cfg, s0)
    grid = cfg.grid
    traj = [SystemState(j * cfg.dt, s0.n_hat, s0.v_hat, s0.u_hat) for j in range(k_steps + 1)]
    dists, ratios = [], []
    converged = failed = False
    streak = 0
    for _ in range(cfg.picard.max_iters):
        terms = [m.nonlinear(s) for s in traj[:-1]]
        fn = [t[0] for t in terms]
        fv = [t[1] for t in terms]
        fu = [t[2] for t in terms]
        new = [s0] + [m._assemble(k, fn, fv, fu) for k in range(1, k_steps + 1)]
        dist = _window_distance(grid, cfg.exponents, new, traj)
        if dists:
            ratio = dist / dists[-1] if dists[-1] > 0 else 0.0
            ratios.append(ratio)
            streak = streak + 1 if ratio >= 1 else 0
        dists.append(dist)
        traj = new
        if not math.isfinite(dist):
            failed = True
            break
        if dist <= cfg.picard.tol:
            converged = True
            break
        if streak >= 3:
            failed = True
            break
    return PicardResult(traj, dists, ratios, converged, failed)


# ---------------------------------------------------------------------------
# verification helpers


def v_mass_closed_form(t, n0_mass: float, v0_mass: float, params: FracParams) -> np.ndarray:
    """Zero-mode solution of D^beta v = n - gamma v with n's mass fixed."""
    t = np.asarray(t, dtype=float)
    b, c = params.beta, params.gamma
    if c == 0:
        return v0_mass + n0_mass * t ** b / (b * gamma_fn(b))
    e = np.array([ml_of_lambda(b, 1.0, np.array([c]), ti)[0] for ti in t.ravel()]).reshape(t.shape)
    # (1 - E_beta(-c t^beta)) / c written without the cancellation at small c
    g1 = np.array([duhamel_antiderivative(ti, np.array([c]), b)[0] for ti in t.ravel()]).reshape(t.shape)
    return v0_mass * e + n0_mass * g1


def v_mass_printed_positive_gamma(t, n0_mass: float, v0_mass: float, params: FracParams) -> np.ndarray:
    """The gamma > 0 formula with the extra 1/Gamma(beta) factor, kept for comparison only."""
    t = np.asarray(t, dtype=float)
    b, c = params.beta, params.gamma
    e = np.array([ml_of_lambda(b, 1.0, np.array([c]), ti)[0] for ti in t.ravel()]).reshape(t.shape)
    return v0_mass * e + n0_mass * (1 - e) / (c * gamma_fn(b))


def verify_v_mass(diag: Diagnostics, n0_mass: float, v0_mass: float, params: FracParams) -> float:
    """Max |mass_v(t) - closed form| over the recorded trajectory."""
    t = diag.column("t")
    return float(np.max(np.abs(diag.column("mass_v") - v_mass_closed_form(t, n0_mass, v0_mass, params))))


def decay_estimate_check(diag: Diagnostics) -> dict[str, float]:
    """Sup over t > 0 of every weighted difference-from-linear column."""
    t = diag.column("t")
    pos = t > 0
    return {c: float(np.max(diag.column(c)[pos])) for c in diag.columns if c.startswith("decay_")}


def tail_growth(diag: Diagnostics, column: str) -> float:
    """Log-log slope of a diagnostic over the final decade of recorded times."""
    t = diag.column("t")
    y = diag.column(column)
    sel = (t >= t[-1] / 10) & (t > 0) & (y > 0)
    if sel.sum() < 2:
        return 0.0
    return float(np.polyfit(np.log(t[sel]), np.log(y[sel]), 1)[0])
