import math

import numpy as np
import pytest

from fracksns import kernel

# mpmath quadosc of (1/pi) int_0^inf cos(x r) exp(-r^alpha) dr, 40 digits
KERNEL_ORACLE = [
    (1.5, 0.0, 0.28735275145216444502),
    (1.5, 1.0, 0.20203815960789469992),
    (1.2, 3.0, 0.03230955779555219585),
    (1.8, 0.5, 0.26385189589825980488),
    (2.0, 1.0, 0.21969564473386119852),
    (1.5, 10.0, 0.0010477760249296130252),
]


@pytest.mark.parametrize("alpha,x,want", KERNEL_ORACLE)
def test_kernel_oracle(alpha, x, want):
    val, err = kernel.eval_kernel_with_error(alpha, 1, x)
    assert val == pytest.approx(want, rel=1e-10, abs=1e-13)
    assert err < 1e-10


def test_kernel_origin_and_gaussian():
    for a in (1.1, 1.5, 2.0):
        assert kernel.eval_kernel(a, 1, 0.0) == pytest.approx(kernel.kernel_origin(a), rel=1e-12)
    x = np.linspace(0, 6, 13)
    vals = [kernel.eval_kernel(2.0, 1, xi, 0.7) for xi in x]
    assert np.allclose(vals, np.exp(-x ** 2 / 2.8) / math.sqrt(2.8 * math.pi), atol=1e-13)


def test_d2_kernel_is_radial_gaussian_for_alpha_two():
    for r in (0.0, 0.5, 2.0):
        assert kernel.eval_kernel(2.0, 2, r) == pytest.approx(math.exp(-r * r / 4) / (4 * math.pi), abs=1e-13)


def test_tail_matches_quadrature():
    for a in (1.2, 1.5, 1.8):
        x = np.array([60.0, 120.0])
        direct = [kernel.eval_kernel(a, 1, xi) for xi in x]
        assert np.allclose(kernel.kernel_tail(a, x), direct, rtol=1e-8)
        lead = kernel.heavy_tail_constant(a) * x ** (-1 - a)
        assert np.allclose(direct, lead, rtol=0.05)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8, 2.0])
def test_mass_is_one(alpha):
    mass, err = kernel.kernel_mass(alpha)
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_decay_bound():
    rep = kernel.decay_bound_check(1.5, 1, 50.0, n_points=60)
    assert math.isfinite(rep.sup) and rep.tail_slope <= 0.05
    sup, _, _ = kernel.gradient_bound_check(1.5, n_points=40)
    assert math.isfinite(sup)


def test_table_csv_and_validation():
    tab = kernel.build_kernel_table(1.5, [0.0, 1.0])
    lines = tab.to_csv().splitlines()
    assert lines[0] == "radius,value,abs_err" and len(lines) == 3
    with pytest.raises(ValueError):
        kernel.build_kernel_table(1.5, [1.0, 0.5])


def test_self_similarity():
    for t in (0.3, 4.0):
        for x in (0.0, 1.3, 7.0):
            direct, err = kernel.eval_kernel_with_error(1.4, 1, x, t)
            scaled = t ** (-1 / 1.4) * kernel.eval_kernel(1.4, 1, t ** (-1 / 1.4) * x)
            assert abs(direct - scaled) <= 2 * err + 1e-16


def test_smoothing_rate_and_negative_control():
    kern = kernel.KernelInterpolant(1.5)
    t = np.geomspace(1.0, 10.0, 5)
    got = kernel.kernel_smoothing_check(1.5, 1.0, math.inf, t, kern=kern)
    assert got == pytest.approx(kernel.expected_smoothing_slope(1.5, 1.0, math.inf), rel=0.05)
    # q = p: no gain; a bump much wider than the kernel keeps its L^2 norm
    flat = kernel.kernel_smoothing_check(1.5, 2.0, 2.0, t / 100, bump_width=5.0, kern=kern)
    assert abs(flat) < 0.05
    with pytest.raises(ValueError):
        kernel.kernel_smoothing_check(1.5, 2.0, 1.0, t, kern=kern)


@pytest.mark.parametrize("beta,alpha,t,x", [(0.5, 2.0, 1.0, 0.0), (0.5, 1.5, 1.0, 1.0), (0.8, 1.8, 0.5, 2.0)])
def test_subordination_of_kernels(beta, alpha, t, x):
    lhs, rhs = kernel.subordination_check(beta, alpha, t, x)
    assert lhs == pytest.approx(rhs, abs=1e-8)
