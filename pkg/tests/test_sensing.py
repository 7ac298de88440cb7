import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from daisac.sensing import (CrbThresholds, SensingChannel, WaveformParams, all_crbs, crb_azimuth, crb_distance,
                            crb_satisfied, crb_velocity, effective_bandwidth_sq, pathloss_variance,
                            sensing_channel_gain, sensing_feasibility)

C = 299792458.0


def test_effective_bandwidth_value():
    # 4e8 / (2 * pi^2 * 2.5e-9)
    assert effective_bandwidth_sq(4e8, 2.5e-9) == pytest.approx(8.105694691387022e15, rel=1e-12)


def test_pathloss_variance_hand_value():
    lam = C / 28e9
    expected = 5.0 * lam ** 2 / ((4 * math.pi) ** 3 * 100.0 ** 4)
    assert pathloss_variance(100.0, lam) == pytest.approx(expected, rel=1e-14)


def test_gain_quarter_power_law():
    lam = C / 28e9
    g1 = sensing_channel_gain(50.0, lam)
    g2 = sensing_channel_gain(100.0, lam)
    assert g1 / g2 == pytest.approx(16.0, rel=1e-12)


def test_channel_dataclass_matches_function():
    ch = SensingChannel(120.0, noise_bandwidth_hz=4e8)
    direct = sensing_channel_gain(120.0, C / 28e9, noise_power=ch.noise_psd_w_per_hz * 4e8)
    assert ch.gain == pytest.approx(float(direct), rel=1e-14)


def test_crb_hand_values():
    P, g = 2.0, 3e-6
    wf = WaveformParams()
    bw2 = 4e8 / (2 * math.pi ** 2 * 2.5e-9)
    assert crb_distance(P, g, bw2, 1.0) == pytest.approx(1.0 / (P * g * g * bw2), rel=1e-12)
    assert crb_velocity(P, g, 1e-3, 1e-20) == pytest.approx(1e-20 / (P * g * g * 1e-6), rel=1e-12)
    bnn = math.radians(0.076)
    assert crb_azimuth(P, g, bnn, 1e-13) == pytest.approx(1e-13 * bnn / (P * g * g), rel=1e-12)
    stack = all_crbs(P, 4e8, g, CrbThresholds(), wf)
    assert stack.shape == (3,)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_non_positive_inputs_raise(bad):
    with pytest.raises(ValueError):
        crb_velocity(bad, 1e-6, 1e-3)
    with pytest.raises(ValueError):
        effective_bandwidth_sq(bad, 2.5e-9)
    with pytest.raises(ValueError):
        sensing_channel_gain(bad, 0.01)


def test_crbs_decrease_with_power():
    g = 1e-6
    lo = all_crbs(1.0, 1e8, g, CrbThresholds())
    hi = all_crbs(2.0, 1e8, g, CrbThresholds())
    assert np.all(hi < lo)
    assert np.allclose(lo / hi, 2.0)


def test_feasibility_inversion_is_tight():
    g = 2e-6
    thr = CrbThresholds()
    m = sensing_feasibility(g, thr)
    B = 1e8
    P = max(m.p_min_w, m.pb_product_min / B)
    assert crb_satisfied(P, B, g, thr)
    assert not crb_satisfied(P * (1 - 1e-6), B, g, thr)


def test_infinite_ceiling_gives_zero_minima():
    m = sensing_feasibility(1e-6, CrbThresholds(alpha=(math.inf,) * 3))
    assert m.p_min_w == 0.0 and m.pb_product_min == 0.0


def test_threshold_replace():
    t = CrbThresholds().replace(alpha2=0.001, lambda3=2e-13)
    assert t.alpha == (0.01, 0.001, 0.01)
    assert t.lam == (1.0, 1e-20, 2e-13)
    with pytest.raises(TypeError):
        CrbThresholds().replace(alpha4=1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-8, 1e-2), st.floats(1e6, 1e9), st.floats(1.0, 100.0))
def test_minima_satisfy_constraints(g, B, boost):
    thr = CrbThresholds()
    m = sensing_feasibility(g, thr)
    P = boost * max(m.p_min_w, m.pb_product_min / B)
    assert crb_satisfied(P, B, g, thr)


def test_zero_allocation_not_satisfied():
    out = crb_satisfied(np.array([0.0, 1.0]), np.array([1e8, 0.0]), 1e-3, CrbThresholds())
    assert not out.any()
