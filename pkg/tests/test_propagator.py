import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracksns import propagator, specfun
from fracksns.grid import FracParams, TorusGrid

# mpmath quadrature of s^(beta-1) E_{beta,beta}(-lam s^beta) over [a, b], 30 digits
WEIGHT_ORACLE = [
    (0.5, 1.0, 2.0, 0.7, 0.062299291802631187048),
    (0.0, 0.3, 5.0, 0.4, 0.16171951237932278537),
    (1.0, 1.5, 0.5, 0.9, 0.23100465840278602953),
]


@pytest.mark.parametrize("a,b,lam,beta,want", WEIGHT_ORACLE)
def test_weight_oracle(a, b, lam, beta, want):
    assert propagator.duhamel_weight(a, b, lam, beta) == pytest.approx(want, rel=1e-11)


def test_weight_closed_forms():
    assert propagator.duhamel_weight(0, 2, 3.0, 1.0) == pytest.approx((1 - math.exp(-6)) / 3, rel=1e-14)
    # lam = 0: int_0^1 s^(-1/2) ds / Gamma(1/2) = 2 / sqrt(pi)
    assert propagator.duhamel_weight(0, 1, 0.0, 0.5) == pytest.approx(2 / math.sqrt(math.pi), rel=1e-14)
    with pytest.raises(ValueError):
        propagator.duhamel_weight(1.0, 0.5, 1.0, 0.5)


def test_lag_antiderivatives_telescope():
    lam = np.array([0.0, 0.5, 4.0, 30.0])
    rows = propagator.lag_antiderivatives(0.6, lam, 0.05, 20)
    w = np.diff(rows, axis=0)
    assert np.allclose(w.sum(axis=0), propagator.duhamel_antiderivative(1.0, lam, 0.6), atol=1e-14)
    assert np.all(w > 0)


def test_beta_one_table_is_heat_semigroup():
    grid = TorusGrid(2, 16)
    tab = propagator.build_table(grid, FracParams(2.0, 1.0, 0.0), 0.3)
    assert np.allclose(tab.e_beta, np.exp(-0.3 * grid.xi_pow(2.0)), atol=1e-14)


def test_apply_ml_on_mode_and_cache():
    grid = TorusGrid(2, 16)
    x, y = grid.coords()
    prm = FracParams(1.5, 0.6, 0.2)
    cache = propagator.MultiplierCache(capacity=2)
    out = propagator.apply_ml(grid, np.cos(x + y), prm, 0.4, cache=cache)
    want = specfun.ml(0.6, 1.0, -(0.4 ** 0.6) * (2 ** 0.75 + 0.2))
    assert np.allclose(out, want * np.cos(x + y), atol=1e-13)
    propagator.apply_ml(grid, np.cos(x), prm, 0.4, cache=cache)
    assert len(cache) == 1
    for t in (0.1, 0.2, 0.3):
        cache.get(grid, prm, t)
    assert len(cache) == 2
    with pytest.raises(ValueError):
        propagator.apply_ml(grid, np.cos(x), prm, 0.4, kind="bogus")


def test_unique_lambda_compresses():
    grid = TorusGrid(2, 64)
    vals, inv = propagator.unique_lambda(grid, 1.8)
    assert len(vals) < grid.n ** 2 // 8
    assert np.array_equal(vals[inv], grid.xi_pow(1.8))


def test_smoothing_exponent_small_time():
    grid = TorusGrid(1, 4096, length=2000.0)
    (x,) = grid.coords()
    f = np.exp(-0.5 * ((x - 1000.0) / 0.5) ** 2)
    f = f - f.mean()
    prm = FracParams(2.0, 1.0, 0.0)
    t = np.geomspace(2.0, 20.0, 6)
    slope, sup_c = propagator.measure_smoothing_exponent(grid, f, prm, math.inf, t)
    assert slope == pytest.approx(-0.5, abs=0.05)
    assert math.isfinite(sup_c)


@settings(max_examples=100, deadline=None)
@given(alpha=st.floats(1.01, 2.0), beta=st.floats(0.05, 1.0), lam=st.floats(0.1, 10.0),
       t=st.floats(0.01, 5.0), xi=st.floats(0.0, 10.0))
def test_scaling_identity(alpha, beta, lam, t, xi):
    assert propagator.scaling_identity_check(alpha, beta, lam, t, xi) <= 1e-12
