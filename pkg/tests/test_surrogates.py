import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from daisac.qoe import transmission_rate
from daisac.sca.surrogates import (McCormickBounds, envelope_interval, linearize_inv_rate, mccormick_envelope,
                                   quadratic_transform_step, rate_gradient)


def richardson(f, x, h):
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h / 2) - f(x - h / 2)) / h
    return (4 * d2 - d1) / 3


@settings(max_examples=200, deadline=None)
@given(st.floats(1e6, 4e8), st.floats(0.01, 40.0), st.floats(1e6, 1e12))
def test_rate_gradient_matches_richardson(B, P, a):
    dB, dP = rate_gradient(B, P, a)
    fB = richardson(lambda b: transmission_rate(b, P, a, 1.0), B, B * 1e-4)
    fP = richardson(lambda p: transmission_rate(B, p, a, 1.0), P, P * 1e-4)
    assert dB == pytest.approx(fB, rel=1e-6, abs=1e-9)
    assert dP == pytest.approx(fP, rel=1e-6)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e6, 4e8), st.floats(0.01, 40.0), st.floats(1e6, 1e12))
def test_euler_identity(B, P, a):
    dB, dP = rate_gradient(B, P, a)
    assert B * dB + P * dP == pytest.approx(transmission_rate(B, P, a, 1.0), rel=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e6, 4e8), st.floats(0.01, 40.0), st.floats(1e6, 1e12))
def test_inverse_rate_tangent_touches_and_supports(B, P, a):
    R = transmission_rate(B, P, a, 1.0)
    c0, cB, cP = linearize_inv_rate(B, P, R, a)
    assert c0 + cB * B + cP * P == pytest.approx(1.0 / R, rel=1e-9)
    # first-order agreement along both coordinates
    g = lambda b, p: c0 + cB * b + cP * p
    for db, dp in ((B * 1e-6, 0.0), (0.0, P * 1e-6)):
        true = 1.0 / transmission_rate(B + db, P + dp, a, 1.0)
        assert abs(g(B + db, P + dp) - true) <= 1e-9 / R


def test_linearize_rejects_zero_rate():
    with pytest.raises(ValueError):
        linearize_inv_rate(1e6, 1.0, 0.0, 1e9)


def test_mccormick_brackets_product(rng):
    for _ in range(1000):
        p_lo, b_lo = rng.uniform(0, 2, 2)
        p_hi, b_hi = p_lo + rng.uniform(0, 2), b_lo + rng.uniform(0, 2)
        P, B = rng.uniform(p_lo, p_hi), rng.uniform(b_lo, b_hi)
        res = mccormick_envelope((p_lo, p_hi, b_lo, b_hi), P, B, P * B)
        assert np.all(res >= -1e-12)
        lo, hi = envelope_interval((p_lo, p_hi, b_lo, b_hi), P, B)
        assert lo - 1e-12 <= P * B <= hi + 1e-12


def test_mccormick_exact_at_corners():
    bounds = (1.0, 3.0, 2.0, 5.0)
    for P in (1.0, 3.0):
        for B in (2.0, 5.0):
            lo, hi = envelope_interval(bounds, P, B)
            assert lo == pytest.approx(P * B) or hi == pytest.approx(P * B)


def test_bounds_validation_and_around():
    with pytest.raises(ValueError):
        McCormickBounds(2.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        McCormickBounds(-1.0, 1.0, 0.0, 1.0)
    box = McCormickBounds.around(np.array([0.4, 0.9]), np.array([0.2, 0.8]), spread=0.5)
    assert np.allclose(box.p_hi, [0.6, 1.0]) and np.allclose(box.b_lo, [0.1, 0.4])


@settings(max_examples=300, deadline=None)
@given(st.floats(1e-3, 100), st.floats(1e-3, 100), st.floats(-10, 10))
def test_quadratic_transform_lower_bound(gamma, lat, phi):
    val, phi_star = quadratic_transform_step(gamma, lat, phi)
    assert val <= gamma / lat * (1 + 1e-12) + 1e-12
    at_star, _ = quadratic_transform_step(gamma, lat, phi_star)
    assert at_star == pytest.approx(gamma / lat, rel=1e-10)


def test_quadratic_transform_errors():
    with pytest.raises(ValueError):
        quadratic_transform_step(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        quadratic_transform_step(-1.0, 1.0, 1.0)
