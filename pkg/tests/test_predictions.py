import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from discretizer.predictions import (SpacetimePoint, cross_ratio_flat, cross_ratio_general,
                                     cross_ratio_milne, effective_cutoff_y, ellipk,
                                     fit_cutoff_a, fit_linear_log, fit_negativity_constant,
                                     interval, milne_entropy_law, milne_point, negativity_law)


def test_cross_ratio_flat_examples():
    assert cross_ratio_flat(0, 1, 2, 3) == pytest.approx(0.25, rel=1e-15)
    assert cross_ratio_flat(0, 1, 1, 2) == 1.0
    with pytest.raises(ValueError):
        cross_ratio_flat(0, 2, 1, 3)


@given(st.floats(0.1, 10), st.floats(-5, 5))
def test_cross_ratio_flat_affine_invariance(a, b):
    xs = (0.0, 0.7, 1.3, 2.9)
    assert cross_ratio_flat(*(a * x + b for x in xs)) == pytest.approx(cross_ratio_flat(*xs), rel=1e-12)


def test_cross_ratio_general_equal_time():
    xs = (-1.0, 0.2, 0.9, 2.5)
    pts = [SpacetimePoint(3.0, x) for x in xs]
    assert cross_ratio_general(*pts) == pytest.approx(cross_ratio_flat(*xs), rel=1e-14)


def test_interval_not_spacelike():
    with pytest.raises(ValueError, match="interval not spacelike"):
        interval(SpacetimePoint(0, 0), SpacetimePoint(2, 1))


@given(st.floats(-3, 3))
def test_cross_ratio_general_boost_invariance(eta):
    ch, sh = math.cosh(eta), math.sinh(eta)
    pts = [SpacetimePoint(0.3 * x, x) for x in (-2.0, -0.5, 0.4, 1.7)]
    boosted = [SpacetimePoint(ch * p.t + sh * p.x, sh * p.t + ch * p.x) for p in pts]
    assert cross_ratio_general(*boosted) == pytest.approx(cross_ratio_general(*pts), rel=1e-9)


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4, unique=True), st.floats(0.05, 5))
def test_milne_consistency(zs, tau):
    zs = sorted(zs)
    if min(np.diff(zs)) < 1e-3:
        return
    pts = [milne_point(z, tau) for z in zs]
    assert cross_ratio_general(*pts) == pytest.approx(cross_ratio_milne(*zs), rel=1e-10)


def test_milne_small_rapidity_limit():
    d = 1e-5
    assert cross_ratio_milne(-2 * d, -d, d, 2 * d) == pytest.approx(1 / 9, rel=1e-8)


def test_milne_infinite_regions():
    z0 = 0.4
    assert cross_ratio_milne(-math.inf, -z0, z0, math.inf) == pytest.approx(math.exp(-2 * z0), rel=1e-14)
    assert cross_ratio_milne(-math.inf, -z0, z0, 30.0) == pytest.approx(
        cross_ratio_milne(-60.0, -z0, z0, 30.0), rel=1e-12)


def test_ellipk_against_scipy():
    m = np.concatenate([np.linspace(0, 0.99, 50), [0.999, 0.999999]])
    assert np.allclose(ellipk(m), special.ellipk(m), rtol=1e-12, atol=0)
    assert ellipk(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    with pytest.raises(ValueError):
        ellipk(1.0)


def test_negativity_law_shape():
    y = np.linspace(0.05, 0.999, 400)
    assert np.all(np.diff(negativity_law(y)) > 0)
    assert negativity_law(1 - 1e-12) > negativity_law(1 - 1e-6) > negativity_law(0.9)
    with pytest.raises(ValueError):
        negativity_law(1.0)
    with pytest.raises(ValueError):
        negativity_law(0.0)


def test_negativity_law_conventions():
    y = 0.6
    base = -0.25 * math.log(1 - y)
    assert negativity_law(y, 0.0) == pytest.approx(base - 0.5 * math.log(special.ellipk(y)), rel=1e-12)
    assert negativity_law(y, 0.0, "modulus") == pytest.approx(
        base - 0.5 * math.log(special.ellipk(y * y)), rel=1e-12)


def test_effective_cutoff_y():
    assert effective_cutoff_y(10) == pytest.approx((1 + 1.176 / (20 * math.pi)) ** -2, rel=1e-15)
    assert effective_cutoff_y(10) == pytest.approx(0.96359, abs=1e-5)
    assert effective_cutoff_y(7, a=0.0) == 1.0
    assert effective_cutoff_y(10 ** 9) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        effective_cutoff_y(0)


def test_milne_entropy_law():
    assert milne_entropy_law(0.3, 5, 0.5, 0.1) == milne_entropy_law(0.3, 5, 2.0, 0.1)
    small = milne_entropy_law(1e-6, 3, 1.0, 0.01)
    assert small == pytest.approx(math.log(3e-6 / 0.01) / 3, abs=1e-10)
    x = 0.7
    gain = milne_entropy_law(0.2, 7, 1.0, 0.3) - milne_entropy_law(0.1, 7, 1.0, 0.3)
    assert gain == pytest.approx(math.log(2 * math.cosh(x / 2)) / 3, rel=1e-12)


def test_fit_linear_log():
    N = np.array([4, 8, 16, 32])
    fit = fit_linear_log(zip(N, np.log(N) / 3 + 0.7))
    assert fit["slope"] == pytest.approx(1 / 3, rel=1e-12)
    assert fit["offset"] == pytest.approx(0.7, rel=1e-12)
    assert fit.rms < 1e-12 and fit.n_samples == 4
    assert fit_linear_log([(1, 2.0), (2, 2.0), (3, 2.0)])["slope"] == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        fit_linear_log([(1, 1.0), (2, 2.0)])
    with pytest.raises(ValueError):
        fit_linear_log([(2, 1.0), (1, 2.0), (3, 2.0)])


def test_fit_negativity_constant_recovers_c():
    y = np.linspace(0.5, 0.95, 9)
    fit = fit_negativity_constant(y, negativity_law(y, 0.2))
    assert fit["C"] == pytest.approx(0.2, rel=1e-12)
    assert fit.rms < 1e-12


def test_fit_cutoff_a_recovers_a():
    N = np.arange(2, 31)
    en = negativity_law(np.array([effective_cutoff_y(n, 1.3) for n in N]))
    fit = fit_cutoff_a(N, en)
    assert fit["a"] == pytest.approx(1.3, rel=1e-6)
