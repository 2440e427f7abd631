"""Mittag-Leffler propagators as Fourier multipliers and exact Duhamel weights.

The linear solution operator at time t is the multiplier
E_beta(-t^beta lam) with lam = |xi|^alpha (+ gamma for the damped operator).
Multipliers are evaluated once per distinct lam value and scattered back.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from . import grid as g
from .grid import FracParams, TorusGrid
from .specfun import gamma_fn, ml

KINDS = ("e_beta", "e_beta_beta")


def unique_lambda(grid: TorusGrid, alpha: float, shift: float = 0.0):
    """Distinct values of |xi|^alpha + shift and the index map back to the grid."""
    lam = grid.xi_pow(alpha) + shift
    vals, inv = np.unique(lam, return_inverse=True)
    return vals, inv.reshape(grid.shape)


def ml_of_lambda(beta: float, second: float, lam: np.ndarray, t: float) -> np.ndarray:
    """E_{beta,second}(-t^beta lam) for an array of lam >= 0."""
    lam = np.asarray(lam, dtype=float)
    if t == 0:
        return np.full(lam.shape, 1.0 / gamma_fn(second))
    return np.asarray(ml(beta, second, -(t ** beta) * lam))


@dataclass(frozen=True)
class PropagatorTable:
    """Multipliers E_beta and E_{beta,beta} of -t^beta (|xi|^alpha + gamma) on a grid."""

    grid: TorusGrid
    params: FracParams
    t: float
    e_beta: np.ndarray
    e_beta_beta: np.ndarray


def build_table(grid: TorusGrid, params: FracParams, t: float) -> PropagatorTable:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    vals, inv = unique_lambda(grid, params.alpha, params.gamma)
    eb = ml_of_lambda(params.beta, 1.0, vals, t)[inv]
    ebb = ml_of_lambda(params.beta, params.beta, vals, t)[inv]
    for arr in (eb, ebb):
        arr.flags.writeable = False
    return PropagatorTable(grid, params, float(t), eb, ebb)


class MultiplierCache:
    """Thread-safe LRU cache of propagator tables keyed by (grid, params, t)."""

    def __init__(self, capacity: int = 64):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def get(self, grid: TorusGrid, params: FracParams, t: float) -> PropagatorTable:
        key = (grid, params, float(t))
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
        table = build_table(grid, params, t)
        with self._lock:
            self._data[key] = table
            while len(self._data) > self.capacity:
                self._data.popitem(last=False)
        return table

    def __len__(self):
        return len(self._data)


DEFAULT_CACHE = MultiplierCache()


def apply_ml(grid: TorusGrid, f: np.ndarray, params: FracParams, t: float,
             kind: str = "e_beta", cache: MultiplierCache | None = None) -> np.ndarray:
    """Apply E_beta(-t^beta(|xi|^alpha + gamma)) (or the E_{beta,beta} version) to f."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    table = (DEFAULT_CACHE if cache is None else cache).get(grid, params, t)
    mult = table.e_beta if kind == "e_beta" else table.e_beta_beta
    if f.shape == grid.shape:
        return g.inverse_transform(grid, mult * g.transform(grid, f))
    return g.inverse_transform_vec(grid, mult * g.transform_vec(grid, f))


# ---------------------------------------------------------------------------
# Duhamel weights


def duhamel_antiderivative(s: float, lam, beta: float) -> np.ndarray:
    """G(s) = int_0^s r^(beta-1) E_{beta,beta}(-lam r^beta) dr = s^beta E_{beta,beta+1}(-lam s^beta)."""
    lam = np.asarray(lam, dtype=float)
    if s < 0 or np.any(lam < 0):
        raise ValueError("duhamel_antiderivative needs s >= 0 and lam >= 0")
    if s == 0:
        return np.zeros(lam.shape)
    sb = s ** beta
    return sb * np.asarray(ml(beta, beta + 1.0, -lam * sb))


def duhamel_weight(a: float, b: float, lam, beta: float):
    """int_a^b s^(beta-1) E_{beta,beta}(-lam s^beta) ds = G(b) - G(a)."""
    if not 0 <= a < b:
        raise ValueError(f"need 0 <= a < b, got a={a}, b={b}")
    w = duhamel_antiderivative(b, lam, beta) - duhamel_antiderivative(a, lam, beta)
    return float(w) if np.ndim(w) == 0 else w


def lag_antiderivatives(beta: float, lam: np.ndarray, dt: float, n_steps: int) -> np.ndarray:
    """Rows G(m dt) for m = 0..n_steps; the weight for lag m is row m+1 minus row m."""
    out = np.empty((n_steps + 1, len(lam)))
    for m in range(n_steps + 1):
        out[m] = duhamel_antiderivative(m * dt, lam, beta)
    return out


# ---------------------------------------------------------------------------
# measurements


def fit_slope(t: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of log y against log t."""
    t, y = np.asarray(t, float), np.asarray(y, float)
    if len(t) < 2 or np.any(y <= 0) or np.any(t <= 0):
        raise ValueError("degenerate fit: need >= 2 positive samples")
    slope, _ = np.polyfit(np.log(t), np.log(y), 1)
    return float(slope)


def saturation_time(grid: TorusGrid, params: FracParams) -> float:
    """Time at which the slowest nonzero mode has decayed noticeably, t^beta |xi_min|^alpha = 0.1."""
    xi_min = 2 * math.pi / grid.length
    return (0.1 / xi_min ** params.alpha) ** (1.0 / params.beta)


def measure_smoothing_exponent(grid: TorusGrid, f: np.ndarray, params: FracParams, p: float,
                               t_grid, q: float = 1.0) -> tuple[float, float]:
    """Fit the decay rate of ||E_beta(-t^beta (-Delta)^{alpha/2}) f||_p over ``t_grid``.

    Returns (slope, sup_constant) with sup_constant the largest value of
    t^{(d beta/alpha)(1/q - 1/p)} ||.||_p / ||f||_q on the grid.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if abs(float(np.mean(f))) > 1e-12 * max(float(np.max(np.abs(f))), 1e-300):
        raise ValueError("f must have zero mean")
    if t_grid.max() > saturation_time(grid, params):
        raise ValueError("t_grid extends past the small-time regime of this box")
    norms = np.array([g.lp_norm(grid, apply_ml(grid, f, params, t), p) for t in t_grid])
    slope = fit_slope(t_grid, norms)
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    expo = grid.d * params.beta / params.alpha * (1.0 / q - inv_p)
    sup_c = float(np.max(t_grid ** expo * norms) / g.lp_norm(grid, f, q))
    return slope, sup_c


def scaling_identity_check(alpha: float, beta: float, lam_scale: float, t: float, xi: float) -> float:
    """|E_beta(-(lam^{alpha/beta} t)^beta (xi/lam)^alpha) - E_beta(-t^beta xi^alpha)|."""
    if lam_scale <= 0 or t <= 0 or xi < 0:
        raise ValueError("need lam_scale > 0, t > 0, xi >= 0")
    lhs = ml(beta, 1.0, -((lam_scale ** (alpha / beta) * t) ** beta) * (xi / lam_scale) ** alpha)
    rhs = ml(beta, 1.0, -(t ** beta) * xi ** alpha)
    return abs(lhs - rhs)
