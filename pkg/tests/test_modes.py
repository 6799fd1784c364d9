import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from discretizer.modes import Interval, ModeBasis, mode_function, smearing_weights


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    iv = Interval(-1.0, 2.0)
    assert iv.length == 3.0 and iv.midpoint == 0.5


def test_first_mode_at_midpoint():
    b = ModeBasis(Interval(0.5, 2.5), 3)
    assert mode_function(b, 1, 1.5) == pytest.approx(math.sqrt(2 / 2.0), rel=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5, 8])
def test_modes_vanish_at_walls(n):
    b = ModeBasis(Interval(0.3, 1.7), 8)
    assert mode_function(b, n, 0.3) == 0.0
    assert mode_function(b, n, 1.7) == 0.0


def test_orthonormality_by_quadrature():
    b = ModeBasis(Interval(-0.4, 1.1), 8)
    t, w = np.polynomial.legendre.leggauss(200)
    x = 0.75 * t + 0.35
    h = b.shapes(x)
    gram = (h * (0.75 * w)) @ h.T
    assert np.abs(gram - np.eye(8)).max() < 1e-10


def test_index_and_domain_errors():
    b = ModeBasis(Interval(0.0, 1.0), 4)
    with pytest.raises(IndexError):
        mode_function(b, 5, 0.5)
    with pytest.raises(IndexError):
        mode_function(b, 0, 0.5)
    with pytest.raises(ValueError):
        mode_function(b, 1, 1.5)
    with pytest.raises(ValueError):
        ModeBasis(Interval(0.0, 1.0), 0)


def test_weights_massless_arithmetic():
    b = ModeBasis(Interval(0.0, 1.0), 4, mass=0.0)
    f, p = smearing_weights(b, 2)
    assert f == pytest.approx(math.sqrt(2 * math.pi), rel=1e-15)
    assert p == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-15)


def test_weights_high_mode_and_unweighted():
    b = ModeBasis(Interval(0.0, 1.0), 200, mass=1e-3)
    f, _ = smearing_weights(b, 200)
    assert f == pytest.approx(math.sqrt(200 * math.pi), rel=1e-9)
    assert smearing_weights(ModeBasis(Interval(0.0, 1.0), 3), 2) == (1.0, 1.0)
    fw, pw = ModeBasis(Interval(0.0, 1.0), 3).weights()
    assert np.all(fw == 1) and np.all(pw == 1)
    with pytest.raises(ValueError):
        ModeBasis(Interval(0.0, 1.0), 3).frequencies()


@given(st.integers(1, 50), st.floats(0.0, 10.0), st.floats(0.1, 5.0))
def test_weight_product_is_one(n, mass, R):
    b = ModeBasis(Interval(0.0, R), 50, mass=mass)
    f, p = smearing_weights(b, n)
    assert f * p == pytest.approx(1.0, rel=1e-15)
    fw, pw = b.weights()
    assert np.allclose(fw * pw, 1.0, rtol=1e-15, atol=0)


def test_projection_residual_decreases():
    iv = Interval(0.0, 1.0)
    bump = lambda x: np.exp(-((x - 0.4) / 0.1) ** 2)
    xs = np.linspace(0, 1, 2001)
    residuals = []
    for N in (4, 8, 16, 32):
        b = ModeBasis(iv, N)
        r = bump(xs) - b.reconstruct(b.project(bump), xs)
        residuals.append(np.sqrt(np.trapezoid(r * r, xs)))
    assert all(a > b for a, b in zip(residuals, residuals[1:]))
    assert residuals[-1] < 1e-3
