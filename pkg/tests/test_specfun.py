import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracksns import specfun

# mpmath series at 80 digits
ML_ORACLE = [
    (0.5, 1.0, -1.0, 0.42758357615580700441),
    (0.5, 1.0, -3.0, 0.17900115118138995042),
    (0.3, 1.0, -2.0, 0.29023222616787535504),
    (0.8, 0.8, -4.0, 0.020359797587363690506),
    (0.7, 1.7, -10.0, 0.096382673445769084185),
    (0.9, 1.0, -0.25, 0.77386953164960228531),
    (0.6, 1.6, -20.0, 0.048852671786337084074),
    (0.25, 1.0, -8.0, 0.093724110665607016969),
]

# mpmath Wright series, 400 terms summed directly at 60 digits
MAINARDI_ORACLE = [
    (0.5, 0.5, 0.53000706468805712175),
    (0.5, 2.0, 0.20755374871029735167),
    (0.3, 1.0, 0.39052334188638717881),
    (0.7, 0.8, 0.53501358825132742674),
    (0.9, 1.0, 1.0081467456212712044),
    (0.25, 3.0, 0.061922084251616722262),
]


@pytest.mark.parametrize("beta,gamma,z,want", ML_ORACLE)
def test_ml_oracle(beta, gamma, z, want):
    assert specfun.ml(beta, gamma, z) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("beta,s,want", MAINARDI_ORACLE)
def test_mainardi_oracle(beta, s, want):
    assert specfun.mainardi(beta, s) == pytest.approx(want, rel=1e-10)


def test_ml_closed_forms():
    x = np.linspace(0, 30, 301)
    assert np.max(np.abs(specfun.ml(1.0, 1.0, -x) - np.exp(-x))) < 1e-12
    # E_{1/2}(-x) = exp(x^2) erfc(x)
    from scipy.special import erfcx
    xs = np.linspace(0, 20, 81)
    assert np.allclose(specfun.ml(0.5, 1.0, -xs), erfcx(xs), rtol=1e-12, atol=0)


def test_ml_error_estimates_are_small():
    z = -np.geomspace(1e-3, 200, 60)
    for b in (0.1, 0.45, 0.8, 1.0):
        vals, errs = specfun.ml_with_error(b, 1.0, z)
        assert np.all(errs < 1e-10)
        assert np.all(np.isfinite(vals))


def test_ml_order_validation():
    with pytest.raises(ValueError):
        specfun.MLOrder(0.0, 1.0)
    with pytest.raises(ValueError):
        specfun.ml(1.5, 1.0, -1.0)


def test_mainardi_half_is_gaussian():
    s = np.linspace(0, 8, 33)
    assert np.allclose(specfun.mainardi(0.5, s), np.exp(-s ** 2 / 4) / math.sqrt(math.pi), rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.7, 0.9])
@pytest.mark.parametrize("r", [0.0, 1.0, 2.0, 3.5])
def test_mainardi_moments(beta, r):
    q, c = specfun.mainardi_moment(beta, r)
    assert q == pytest.approx(c, rel=1e-6)


def test_gamma_overflow():
    with pytest.raises(specfun.GammaOverflowError):
        specfun.gamma_fn(200.0)


def test_a_sigma_beta_one_is_exponential():
    assert specfun.a_sigma(0.5, 1.0, 2.0, 0.3) == pytest.approx(math.exp(-0.6), rel=1e-15)


@settings(max_examples=60, deadline=None)
@given(beta=st.floats(0.01, 1.0), x=st.floats(0.0, 50.0))
def test_recurrence_property(beta, x):
    assert float(specfun.recurrence_residual(beta, -x)) < 1e-11


@settings(max_examples=40, deadline=None)
@given(beta=st.floats(0.05, 1.0), x=st.floats(0.0, 40.0), h=st.floats(0.01, 5.0))
def test_complete_monotonicity_decreasing(beta, x, h):
    assert specfun.ml(beta, 1.0, -(x + h)) < specfun.ml(beta, 1.0, -x)


@settings(max_examples=30, deadline=None)
@given(beta=st.floats(0.2, 0.95), lam=st.floats(0.1, 10.0), t=st.floats(0.1, 5.0))
def test_subordination_property(beta, lam, t):
    assert specfun.subordinated_exponential(beta, lam, t) == pytest.approx(
        specfun.ml(beta, 1.0, -lam * t ** beta), abs=1e-8)
