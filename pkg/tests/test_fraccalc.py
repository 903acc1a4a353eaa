import math

import numpy as np
import pytest

from fbmsde import fraccalc as fc
from fbmsde.noise import generate_fbm
from fbmsde.paths import GridError, SamplePath, TimeGrid


@pytest.fixture
def g512():
    return TimeGrid.uniform_grid(1.0, 512)


@pytest.mark.parametrize("k,alpha", [(0, 0.5), (1, 0.3), (2, 0.7)])
def test_power_rule_integral(g512, k, alpha):
    f = SamplePath.from_function(g512, lambda t: t ** k)
    want = math.gamma(k + 1) / math.gamma(k + 1 + alpha)
    # exact for piecewise-linear input, O(h^2) otherwise
    assert fc.rl_integral_left(f, alpha, 1.0) == pytest.approx(want, rel=1e-10 if k < 2 else 1e-5)


@pytest.mark.parametrize("k,alpha", [(1, 0.3), (2, 0.6)])
def test_power_rule_derivative(g512, k, alpha):
    f = SamplePath.from_function(g512, lambda t: t ** k)
    want = math.gamma(k + 1) / math.gamma(k + 1 - alpha)
    assert fc.weyl_derivative_left(f, alpha, 1.0) == pytest.approx(want, rel=1e-4)


def test_right_integral_reflects_left(g512):
    f = SamplePath.from_function(g512, lambda t: (1 - t) ** 2)
    want = math.gamma(3) / math.gamma(3.4)
    assert fc.rl_integral_right(f, 0.4, 0.0) == pytest.approx(want, rel=1e-5)
    assert fc.rl_integral_right_path(f, 0.4).values[0, 0] == pytest.approx(fc.rl_integral_right(f, 0.4, 0.0), rel=1e-12)


def test_path_versions_match_pointwise(g512):
    f = SamplePath.from_function(g512, lambda t: np.sin(2 * t) + t ** 2)
    Dl = fc.weyl_derivative_left_path(f, 0.3)
    Dr = fc.weyl_derivative_right_path(f, 0.4, centered=True)
    I = fc.rl_integral_left_path(f, 0.3)
    for k in (5, 200, 511):
        x = f.t[k]
        assert Dl[k, 0] == pytest.approx(fc.weyl_derivative_left(f, 0.3, x), rel=1e-10)
        assert Dr[k, 0] == pytest.approx(fc.weyl_derivative_right(f, 0.4, x, centered=True), rel=1e-10)
        assert I.values[k, 0] == pytest.approx(fc.rl_integral_left(f, 0.3, x), rel=1e-10)
    assert np.isnan(Dl[0, 0]) and np.isnan(Dr[-1, 0])


def test_endpoint_singularities(g512):
    f = SamplePath.from_function(g512, lambda t: t)
    with pytest.raises(GridError):
        fc.weyl_derivative_left(f, 0.3, 0.0)
    with pytest.raises(GridError):
        fc.weyl_derivative_right(f, 0.3, 1.0)


def test_integral_of_one_and_linear(g512):
    one = SamplePath.from_function(g512, np.ones_like)
    g = SamplePath.from_function(g512, lambda t: t ** 2)
    r = fc.stieltjes_integral_fractional(one, g, alpha=0.5)
    assert r.route == "fractional_formula"
    assert r.value == pytest.approx(1.0, abs=1e-12)
    errs = []
    for n in (128, 512):
        x = SamplePath.from_function(TimeGrid.uniform_grid(1.0, n), lambda t: t)
        errs.append(abs(fc.stieltjes_integral_fractional(x, x, alpha=0.4).value - 0.5))
    assert errs[1] < errs[0] / 2 and errs[1] < 1e-4


def test_routes_agree_on_smooth_times_fbm(g512):
    B = generate_fbm(g512, 0.75, 1, seed=11)
    f = SamplePath.from_function(g512, lambda t: np.cos(3 * t))
    a = fc.stieltjes_integral_fractional(f, B, alpha=0.4)
    b = fc.stieltjes_integral_rs_sums(f, B)
    assert abs(a.value - b.value) <= 5 * (a.est_error + b.est_error) + 1e-3


def test_alpha_window(g512):
    f = SamplePath.from_function(g512, lambda t: t)
    assert fc.choose_alpha(f, f, holder=(0.9, 0.8)) == pytest.approx(0.5 * (0.2 + 0.9))
    with pytest.raises(fc.ParameterError):
        fc.choose_alpha(f, f, alpha=0.1, holder=(0.9, 0.8))
    with pytest.raises(fc.ParameterError):
        fc.admissible_window((0.5, 0.4))


def test_alpha_from_estimated_exponents(g512):
    B = generate_fbm(g512, 0.75, 1, seed=1)
    a = fc.choose_alpha(B, B)
    assert 0.15 < a < 0.85


def test_gfa1_analytic_case():
    g = TimeGrid.uniform_grid(1.0, 1024)
    one = SamplePath.from_function(g, np.ones_like)
    x = SamplePath.from_function(g, lambda t: t)
    r = fc.bound_check_gfa1(one, x, 0.5)
    assert r.lhs == pytest.approx(1.0, abs=1e-3)
    assert r.rhs == pytest.approx(4 / math.pi, abs=1e-3)
    assert r.passed and r.name == "Gfa1"


def test_rs_cumulative_last_equals_sum(g512):
    B = generate_fbm(g512, 0.75, 1, seed=2)
    f = SamplePath.from_function(g512, lambda t: 1 + t)
    assert fc.rs_cumulative(f, B)[-1, 0] == pytest.approx(fc.stieltjes_integral_rs_sums(f, B).value)
