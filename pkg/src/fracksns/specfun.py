"""Gamma, Mittag-Leffler and Mainardi functions on the real arguments the solver needs.

Mittag-Leffler values are computed for nonpositive arguments only.  Three
regimes are used, selected on the scaled variable w = |z|**(1/beta):

* Taylor series for w <= series_cutoff,
* the algebraic asymptotic series for w >= asymptotic_cutoff,
* a real integral representation in between, and as the fallback whenever
  either series fails to converge within ``max_terms``.

The scaled variable is what controls cancellation in the Taylor series
(the largest term is roughly exp(w)), so cutoffs on |z| itself would be
either unsafe for small beta or needlessly conservative for beta near 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .quadrature import tanh_sinh

EPS = np.finfo(float).eps


class AccuracyError(ArithmeticError):
    """Raised when an evaluation cannot reach its error budget."""

    def __init__(self, message: str, bound: float):
        super().__init__(f"{message} (achieved bound {bound:.3g})")
        self.bound = bound


class GammaOverflowError(OverflowError):
    """Gamma overflowed; ``sign`` is the sign of the true value."""

    def __init__(self, x: float, sign: int):
        super().__init__(f"gamma({x!r}) overflows double precision")
        self.sign = sign


def gamma_fn(x: float) -> float:
    """Gamma function with explicit pole and overflow errors."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"gamma has a pole at {x!r}")
    try:
        return math.gamma(x)
    except OverflowError:
        sign = -1 if (x < 0 and math.floor(x) % 2 == 1) else 1
        raise GammaOverflowError(x, sign) from None


@dataclass(frozen=True)
class MLOrder:
    """Parameters (beta, gamma) of the two-parameter Mittag-Leffler function."""

    beta: float
    gamma: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class EvalPolicy:
    """Regime thresholds (on w = |z|**(1/beta)) and accuracy target."""

    series_cutoff: float = 3.0
    asymptotic_cutoff: float = 40.0
    target_rel_err: float = 1e-12
    max_terms: int = 2000
    # estimates above fail_factor * target_rel_err raise AccuracyError
    fail_factor: float = 1e4

    def __post_init__(self):
        if not self.series_cutoff < self.asymptotic_cutoff:
            raise ValueError("series_cutoff must be below asymptotic_cutoff")
        if not self.target_rel_err > 0:
            raise ValueError("target_rel_err must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")


DEFAULT_POLICY = EvalPolicy()


# ---------------------------------------------------------------------------
# Mittag-Leffler regimes; every helper takes x = -z >= 0 as a 1-D array and
# returns (values, relative error estimates, converged mask).


def _ml_taylor(beta, gamma, x, max_terms):
    total = np.zeros_like(x)
    abs_total = np.zeros_like(x)
    done = x == 0.0
    total[done] = special.rgamma(gamma)
    abs_total[done] = abs(total[done])
    w = x ** (1.0 / beta)
    active = ~done
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(max_terms):
            if not active.any():
                break
            xa = x[active]
            term = (-xa) ** j * special.rgamma(beta * j + gamma)
            s = total[active] + term
            a = abs_total[active] + np.abs(term)
            total[active] = s
            abs_total[active] = a
            past_peak = beta * j + gamma > w[active]
            fin = past_peak & (np.abs(term) <= 0.25 * EPS * np.abs(s)) | ~np.isfinite(s)
            idx = np.flatnonzero(active)
            done[idx[fin]] = True
            active[idx[fin]] = False
    ok = done & np.isfinite(total)
    with np.errstate(divide="ignore", invalid="ignore"):
        err = 4.0 * EPS * abs_total / np.abs(total)
    return total, np.where(ok, err, np.inf), ok


def _ml_asymptotic(beta, gamma, x, max_terms):
    total = np.zeros_like(x)
    abs_total = np.zeros_like(x)
    last = np.full_like(x, np.inf)
    prev = np.full_like(x, np.inf)
    done = np.zeros(x.shape, dtype=bool)
    failed = np.zeros(x.shape, dtype=bool)
    inv = 1.0 / x
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        w = x ** (1.0 / beta)
        for k in range(1, max_terms + 1):
            active = ~(done | failed)
            if not active.any():
                break
            idx = np.flatnonzero(active)
            term = (-1.0) ** (k + 1) * inv[idx] ** k * special.rgamma(gamma - beta * k)
            total[idx] += term
            abs_total[idx] += np.abs(term)
            prev[idx] = last[idx]
            last[idx] = np.abs(term)
            if k < 2:
                continue
            small = last[idx] + prev[idx] <= 0.25 * EPS * np.abs(total[idx])
            done[idx[small]] = True
            # beyond the smallest term the series only gets worse
            diverging = ~small & (beta * k > w[idx] + 10.0)
            failed[idx[diverging]] = True
    ok = done & np.isfinite(total) & (total != 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        err = (last + prev + 4.0 * EPS * abs_total) / np.abs(total)
    return total, np.where(ok, err, np.inf), ok


def _sinpi(a):
    """sin(pi a) with the argument reduced exactly before scaling by pi."""
    r = a - 2.0 * np.round(0.5 * a)
    r = np.where(r > 0.5, 1.0 - r, np.where(r < -0.5, -1.0 - r, r))
    return np.sin(np.pi * r)


def _cospi(a):
    return _sinpi(0.5 - a) if abs(a) < 1e8 else np.cos(np.pi * a)


def _rho_from_angle(anchor, delta, rs, wl):
    # abscissa rho at angle theta(anchor) + delta, where
    # theta(rho) = atan((rho - rs) / wl); written to avoid cancellation near the anchor
    s, c = np.sin(delta), np.cos(delta)
    da = anchor - rs
    return anchor + s * (wl * wl + da * da) / (wl * c - da * s)


def _ml_integral_direct(beta, gamma, x):
    """Real integral representation, valid for 0 < beta < 1 and gamma < 1 + beta.

    E(-x) = 1/(pi beta) int_0^inf exp(-rho^(1/beta)) rho^((1-gamma)/beta)
            (rho sin(pi gamma) + x sin(pi(gamma - beta))) / ((rho - rs)^2 + wl^2) drho

    with rs = -x cos(pi beta), wl = x sin(pi beta).  The substitution
    theta = atan((rho - rs)/wl) removes the Lorentzian factor; the range is
    split at rho = 1 and around rs, and truncated at rho = 50**beta.
    """
    rule = tanh_sinh()
    xc = x[:, None]
    rs = -xc * _cospi(beta)
    wl = xc * _sinpi(beta)
    rho_max = 50.0 ** beta
    sg, sgb = _sinpi(gamma), _sinpi(gamma - beta)

    def g(rho):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore", under="ignore"):
            val = (np.exp(-(rho ** (1.0 / beta))) * rho ** ((1.0 - gamma) / beta)
                   * (rho * sg + xc * sgb))
        return np.where(rho > 0.0, val, 0.0)

    # pieces in rho: 0, 1, rho_max, plus a geometric mesh around the
    # Lorentzian centre rs so that every piece stays smooth in theta
    n_geo = int(np.clip(np.ceil(np.log10(rho_max / np.min(wl))), 0, 16)) + 1
    geo = wl * 10.0 ** np.arange(n_geo)
    cand = [np.zeros_like(rs), np.ones_like(rs), np.full_like(rs, rho_max), rs, rs - geo, rs + geo]
    bps = np.sort(np.clip(np.concatenate(cand, axis=1), 0.0, rho_max), axis=1)
    half = rule.first_half
    fine = np.zeros(x.shape)
    coarse = np.zeros(x.shape)
    absint = np.zeros(x.shape)
    for i in range(bps.shape[1] - 1):
        lo, hi = bps[:, i:i + 1], bps[:, i + 1:i + 2]
        # angle between the two ends, without differencing two arctangents
        length = np.arctan2((hi - lo) * wl, wl * wl + (hi - rs) * (lo - rs))
        rho = np.where(half, _rho_from_angle(lo, rule.left * length, rs, wl),
                       _rho_from_angle(hi, -rule.right * length, rs, wl))
        gv = g(rho)
        fine += (gv @ rule.weights) * length[:, 0]
        coarse += (gv @ rule.coarse_weights) * length[:, 0]
        absint += (np.abs(gv) @ rule.weights) * length[:, 0]
    scale = 1.0 / (np.pi * beta * wl[:, 0])
    val = fine * scale
    # tanh-sinh roughly doubles its correct digits per halving of h, so the
    # fine-rule error is about the square of the coarse-rule discrepancy
    diff = np.abs(fine - coarse) / np.maximum(np.abs(fine), 1e-300)
    err = diff * diff + 16.0 * EPS * absint / np.maximum(np.abs(fine), 1e-300)
    return val, err


def _ml_integral(beta, gamma, x):
    """Integral regime for beta < 1, reducing gamma with the term-shift recurrence."""
    if gamma > 1.0 + 0.5 * beta:
        inner, inner_err = _ml_integral(beta, gamma - beta, x)
        val = (special.rgamma(gamma - beta) - inner) / x
        with np.errstate(divide="ignore", invalid="ignore"):
            err = inner_err * np.abs(inner) / np.abs(x * val) + EPS
        return val, err
    return _ml_integral_direct(beta, gamma, x)


def _ml_beta_one(gamma, x):
    """E_{1,gamma}(-x) for x above the Taylor regime."""
    if gamma == 1.0:
        return np.exp(-x), np.full_like(x, EPS)
    if gamma == 2.0:
        return -np.expm1(-x) / x, np.full_like(x, 2 * EPS)
    if gamma < 1.5:
        # keeps the endpoint singularity of the integral below mild
        inner, inner_err = _ml_beta_one(gamma + 1.0, x)
        val = special.rgamma(gamma) - x * inner
        with np.errstate(divide="ignore", invalid="ignore"):
            err = (inner_err * np.abs(x * inner) + EPS * abs(special.rgamma(gamma))) / np.abs(val)
        return val, err
    # (1/Gamma(gamma-1)) int_0^1 exp(-x s) (1-s)^(gamma-2) ds, with the range
    # in s cut to [0, c/x], c = min(x, 45), beyond which exp(-x s) is negligible
    rule = tanh_sinh()
    xc = x[:, None]
    c = np.minimum(xc, 45.0)
    full = c == xc
    one_minus = np.where(full, rule.right, 1.0 - c * rule.left / xc)
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        vals = np.exp(-c * rule.left) * one_minus ** (gamma - 2.0)
    vals = np.where(one_minus > 0, vals, 0.0)
    fine = vals @ rule.weights
    coarse = vals @ rule.coarse_weights
    scale = (c[:, 0] / x) * special.rgamma(gamma - 1.0)
    diff = np.abs(fine - coarse) / np.abs(fine)
    return fine * scale, diff * diff + 16.0 * EPS


def ml_with_error(beta: float, gamma: float, z, policy: EvalPolicy = DEFAULT_POLICY):
    """Evaluate E_{beta,gamma}(z) for z <= 0; returns (values, est_rel_err).

    Works elementwise on arrays and does not raise on poor accuracy; see
    :func:`mittag_leffler` for the checked interface.
    """
    order = MLOrder(beta, gamma)
    beta, gamma = float(order.beta), float(order.gamma)
    z = np.asarray(z, dtype=float)
    if np.any(z > 0) or np.any(np.isnan(z)):
        raise ValueError("mittag_leffler is implemented for z <= 0 only")
    x = -z.ravel()
    val = np.empty_like(x)
    err = np.empty_like(x)
    with np.errstate(over="ignore"):
        w = x ** (1.0 / beta)

    todo = np.ones(x.shape, dtype=bool)
    ser = w <= policy.series_cutoff
    if ser.any():
        v, e, ok = _ml_taylor(beta, gamma, x[ser], policy.max_terms)
        idx = np.flatnonzero(ser)[ok]
        val[idx], err[idx] = v[ok], e[ok]
        todo[idx] = False
    asy = todo & (w >= policy.asymptotic_cutoff) & (beta < 1.0)
    if asy.any():
        v, e, ok = _ml_asymptotic(beta, gamma, x[asy], policy.max_terms)
        idx = np.flatnonzero(asy)[ok]
        val[idx], err[idx] = v[ok], e[ok]
        todo[idx] = False
    if todo.any():
        if beta == 1.0:
            v, e = _ml_beta_one(gamma, x[todo])
        else:
            v, e = _ml_integral(beta, gamma, x[todo])
        val[todo], err[todo] = v, e
    return val.reshape(z.shape), err.reshape(z.shape)


def mittag_leffler(order: MLOrder, z, policy: EvalPolicy = DEFAULT_POLICY):
    """E_{beta,gamma}(z) for real z <= 0.

    Raises :class:`AccuracyError` when the internal error estimate exceeds
    ``policy.fail_factor * policy.target_rel_err`` at any point.
    """
    val, err = ml_with_error(order.beta, order.gamma, z, policy)
    bad = ~np.isfinite(val) | (err > policy.fail_factor * policy.target_rel_err)
    if np.any(bad):
        raise AccuracyError("Mittag-Leffler evaluation did not converge",
                            float(np.max(np.where(bad, err, 0.0))))
    if val.ndim == 0:
        return float(val)
    return val


def ml(beta: float, gamma: float, z, policy: EvalPolicy = DEFAULT_POLICY):
    """Shorthand for ``mittag_leffler(MLOrder(beta, gamma), z, policy)``."""
    return mittag_leffler(MLOrder(beta, gamma), z, policy)


# ---------------------------------------------------------------------------
# Mainardi function M_beta(s) = W_{-beta, 1-beta}(-s)

# Up to this argument the Wright series is tried first and kept when its
# cancellation estimate is within budget; otherwise, and beyond it, the
# positive-integrand representation is used (no cancellation, only underflow).
MAINARDI_SERIES_BOUND = 2.0


def _mainardi_series(beta, s, n_terms=400):
    """Wright series; returns (value, abs error, usable mask)."""
    j = np.arange(0, n_terms)
    y = beta * (j + 1.0)
    # 1/Gamma(1 - y) = Gamma(y) sin(pi y) / pi; magnitudes assembled in logs
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        log_s = np.log(s[:, None])
        powers = np.where(j == 0, 0.0, j * log_s)
        terms = ((-1.0) ** j * np.exp(powers + special.gammaln(y) - special.gammaln(j + 1.0))
                 * _sinpi(y) / np.pi)
    finite = np.all(np.isfinite(terms), axis=1)
    terms = np.where(np.isfinite(terms), terms, 0.0)
    val = terms.sum(axis=1)
    mag = np.abs(terms).sum(axis=1)
    tail = np.abs(terms[:, -20:]).max(axis=1)
    err = 8.0 * EPS * mag + tail
    usable = finite & (err <= 1e-14 * np.abs(val))
    return val, err, usable


def _kanter_a(beta, phi, sin_phi):
    # A(phi) = [sin(beta phi)/sin(phi)]^(1/(1-beta)) sin((1-beta) phi)/sin(beta phi);
    # sin(phi) is passed in so callers can form it from the distance to pi
    sb = np.sin(beta * phi)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = (sb / sin_phi) ** (1.0 / (1.0 - beta)) * np.sin((1.0 - beta) * phi) / sb
    a0 = (1.0 - beta) * beta ** (beta / (1.0 - beta))
    return np.where(phi > 0, a, a0)


def _kanter_sum(beta, big, level):
    rule = tanh_sinh(level)
    phi = np.pi * rule.left
    sin_phi = np.where(rule.first_half, np.sin(phi), np.sin(np.pi * rule.right))
    a = _kanter_a(beta, phi, sin_phi)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        vals = a * np.exp(-big[:, None] * a)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    return np.pi * (vals @ rule.weights)


def _mainardi_integral(beta, s, max_level=9):
    """Kanter-type representation with a positive integrand on [0, pi].

    The tanh-sinh step is halved until successive levels agree; orders
    near 1 make the integrand steep and need the finer levels.
    """
    big = s ** (1.0 / (1.0 - beta))
    prev = _kanter_sum(beta, big, 4)
    fine = _kanter_sum(beta, big, 5)
    diff = np.abs(fine - prev)
    todo = diff > 1e-15 * np.abs(fine)
    for level in range(6, max_level + 1):
        if not todo.any():
            break
        new = _kanter_sum(beta, big[todo], level)
        diff[todo] = np.abs(new - fine[todo])
        fine[todo] = new
        todo[todo] = diff[todo] > 1e-15 * np.abs(new)
    pref = s ** (beta / (1.0 - beta)) / ((1.0 - beta) * np.pi)
    val = pref * fine
    abs_err = pref * diff + 32.0 * EPS * np.abs(val)
    # when the integrand underflows, the bound is its largest possible size
    floor = pref * np.pi * np.exp(-np.minimum(big * _kanter_a(beta, 0.0, 0.0), 745.0))
    abs_err = np.where(val == 0.0, floor, abs_err)
    return val, abs_err


def mainardi_with_error(beta: float, s, policy: EvalPolicy = DEFAULT_POLICY):
    """M_beta(s) for s >= 0 with an absolute error bound per point."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(np.isnan(s)):
        raise ValueError("mainardi is defined here for s >= 0")
    flat = s.ravel()
    val = np.empty_like(flat)
    err = np.empty_like(flat)
    todo = np.ones(flat.shape, dtype=bool)
    small = flat <= MAINARDI_SERIES_BOUND
    if small.any():
        v, e, ok = _mainardi_series(beta, flat[small])
        idx = np.flatnonzero(small)[ok]
        val[idx], err[idx] = v[ok], e[ok]
        todo[idx] = False
    if todo.any():
        val[todo], err[todo] = _mainardi_integral(beta, flat[todo])
    return val.reshape(s.shape), err.reshape(s.shape)


def mainardi(beta: float, s, policy: EvalPolicy = DEFAULT_POLICY):
    """Mainardi function M_beta(s), s >= 0.

    Relative accuracy holds wherever the value is representable; where it
    underflows the result is 0 with an absolute bound available from
    :func:`mainardi_with_error`.
    """
    val, err = mainardi_with_error(beta, s, policy)
    scale = np.maximum(np.abs(val), np.finfo(float).tiny)
    bad = (err / scale > policy.fail_factor * policy.target_rel_err) & (val != 0.0)
    if np.any(bad):
        raise AccuracyError("Mainardi evaluation lost accuracy", float(np.max(err)))
    if val.ndim == 0:
        return float(val)
    return val


def mainardi_cutoff(beta: float, power: float = 0.0, log_tol: float = 50.0) -> float:
    """Point beyond which s**power * M_beta(s) is below exp(-log_tol) of its scale.

    Uses the decay M_beta(s) ~ s^((beta-1/2)/(1-beta)) exp(-b s^(1/(1-beta)))
    with b = (1-beta) beta^(beta/(1-beta)).
    """
    b = (1.0 - beta) * beta ** (beta / (1.0 - beta))
    expo = max(0.0, power + (beta - 0.5) / (1.0 - beta))
    s = 1.0
    for _ in range(50):
        s = ((log_tol + expo * math.log(max(s, 1.0))) / b) ** (1.0 - beta)
    return max(s, 1.0)


def _mainardi_scalar(beta):
    def f(s):
        return float(mainardi_with_error(beta, np.array([s]))[0][0])
    return f


def _weighted_moment(beta, r, rate):
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if not r > -1.0:
        raise ValueError(f"moment order must exceed -1, got {r}")
    m = _mainardi_scalar(beta)
    s_max = mainardi_cutoff(beta, r)
    if rate > 0:
        fun = lambda s: m(s) * math.exp(-rate * s)  # noqa: E731
    else:
        fun = m
    val, abserr = integrate.quad(fun, 0.0, s_max, weight="alg", wvar=(r, 0.0),
                                 epsabs=0.0, epsrel=1e-11, limit=200)
    if not abserr <= 1e-8 * max(abs(val), 1e-300):
        raise AccuracyError("Mainardi moment quadrature did not converge", abserr)
    return val


def mainardi_moment(beta: float, r: float) -> tuple[float, float]:
    """Return (quadrature, Gamma(1+r)/Gamma(1+beta r)) for int_0^inf s^r M_beta(s) ds."""
    quad = _weighted_moment(beta, r, 0.0)
    return quad, gamma_fn(1.0 + r) / gamma_fn(1.0 + beta * r)


def a_sigma(sigma: float, beta: float, gamma: float, t: float) -> float:
    """A_sigma(t) = int_0^inf s^sigma M_beta(s) exp(-s t^beta gamma) ds by quadrature."""
    if gamma < 0 or t <= 0:
        raise ValueError("a_sigma needs gamma >= 0 and t > 0")
    if beta == 1.0:
        # M_1 is the point mass at s = 1
        return math.exp(-gamma * t)
    return _weighted_moment(beta, sigma, gamma * t ** beta)


def subordinated_exponential(beta: float, lam: float, t: float) -> float:
    """Quadrature of int_0^inf M_beta(s) exp(-s lam t^beta) ds (equals E_beta(-lam t^beta))."""
    return a_sigma(0.0, beta, lam, t)


def recurrence_residual(beta: float, z) -> np.ndarray:
    """Relative residual of E_beta(z) = 1 + z E_{beta,beta+1}(z), in its better-conditioned form.

    Where E_beta is tiny the form above amplifies rounding in E_{beta,beta+1}
    by (1 + |z E'|)/|E|; there the equivalent E' = (E_beta - 1)/z is checked.
    """
    z = np.asarray(z, dtype=float)
    e = np.asarray(ml(beta, 1.0, z))
    e1 = np.asarray(ml(beta, beta + 1.0, z))
    x = -z
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        res_a = np.abs(e - (1.0 - x * e1)) / np.abs(e)
        cond_a = (1.0 + x * np.abs(e1)) / np.abs(e)
        res_b = np.abs(e1 - (1.0 - e) / x) / np.abs(e1)
        cond_b = (1.0 + np.abs(e)) / (x * np.abs(e1))
    use_a = (x == 0) | (cond_a <= cond_b)
    return np.where(use_a, res_a, res_b)
