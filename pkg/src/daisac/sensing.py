"""Sensing channel gains and Cramer-Rao bounds for distance, velocity and azimuth.

All CRBs scale as ``1 / (P * |gain|^2)``; the distance bound also falls with
bandwidth through the effective (RMS) bandwidth of a rectangular pulse.
Functions accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .units import SPEED_OF_LIGHT


def _require_positive(name, value):
    arr = np.asarray(value, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError(f"{name} must be strictly positive, got {value!r}")


@dataclass(frozen=True)
class WaveformParams:
    pulse_width_s: float = 2.5e-9
    effective_time_s: float = 1e-3
    null_to_null_beamwidth_rad: float = math.radians(0.076)

    def __post_init__(self):
        _require_positive("pulse_width_s", self.pulse_width_s)
        _require_positive("effective_time_s", self.effective_time_s)
        _require_positive("null_to_null_beamwidth_rad", self.null_to_null_beamwidth_rad)


@dataclass(frozen=True)
class SensingChannel:
    """Radar-equation sensing link between a base station and one user.

    ``noise_psd_w_per_hz * noise_bandwidth_hz`` is the receiver noise term in
    the gain denominator. Leave ``noise_bandwidth_hz`` at 1 to use the PSD
    directly, or set it to the sensing band to use in-band noise power.
    """

    distance_m: float
    carrier_wavelength_m: float = SPEED_OF_LIGHT / 28e9
    radar_cross_section_m2: float = 5.0
    array_gain: float = 0.8
    tx_beam_gain: float = 1.0
    rx_beam_gain: float = 1.0
    n_rx_antennas: int = 32
    noise_psd_w_per_hz: float = 10.0 ** ((-174.0 - 30.0) / 10.0)
    noise_bandwidth_hz: float = 1.0

    def __post_init__(self):
        _require_positive("distance_m", self.distance_m)
        _require_positive("carrier_wavelength_m", self.carrier_wavelength_m)
        _require_positive("n_rx_antennas", self.n_rx_antennas)
        _require_positive("noise_psd_w_per_hz", self.noise_psd_w_per_hz)

    @property
    def gain(self) -> float:
        return float(sensing_channel_gain(
            self.distance_m, self.carrier_wavelength_m,
            radar_cross_section_m2=self.radar_cross_section_m2,
            array_gain=self.array_gain,
            tx_beam_gain=self.tx_beam_gain,
            rx_beam_gain=self.rx_beam_gain,
            n_rx_antennas=self.n_rx_antennas,
            noise_power=self.noise_psd_w_per_hz * self.noise_bandwidth_hz,
        ))


@dataclass(frozen=True)
class CrbThresholds:
    """CRB ceilings ``alpha`` and requirement weights ``lam`` for (distance, velocity, azimuth)."""

    alpha: tuple = (0.01, 0.01, 0.01)
    lam: tuple = (1.0, 1e-20, 1e-13)

    def __post_init__(self):
        if len(self.alpha) != 3 or len(self.lam) != 3:
            raise ValueError("alpha and lam must both have three entries")
        _require_positive("alpha", self.alpha)
        _require_positive("lam", self.lam)

    def replace(self, **kw) -> "CrbThresholds":
        alpha = list(self.alpha)
        lam = list(self.lam)
        for i in range(3):
            if f"alpha{i + 1}" in kw:
                alpha[i] = kw.pop(f"alpha{i + 1}")
            if f"lambda{i + 1}" in kw:
                lam[i] = kw.pop(f"lambda{i + 1}")
        if kw:
            raise TypeError(f"unknown threshold fields {sorted(kw)}")
        return CrbThresholds(tuple(alpha), tuple(lam))


@dataclass(frozen=True)
class SensingMinima:
    """Smallest power and power-bandwidth product meeting all three CRB ceilings."""

    p_min_w: np.ndarray | float
    pb_product_min: np.ndarray | float
    binding: np.ndarray | str = field(default="")


def effective_bandwidth_sq(bandwidth_hz, pulse_width_s):
    """Squared RMS bandwidth of a rectangular pulse: ``B / (2 pi^2 T_p)``."""
    _require_positive("bandwidth_hz", bandwidth_hz)
    _require_positive("pulse_width_s", pulse_width_s)
    return np.asarray(bandwidth_hz, dtype=float) / (2.0 * math.pi ** 2 * pulse_width_s)


def pathloss_variance(distance_m, wavelength_m, radar_cross_section_m2=5.0):
    """Radar equation: ``rcs * lambda^2 / ((4 pi)^3 d^4)``."""
    _require_positive("distance_m", distance_m)
    _require_positive("wavelength_m", wavelength_m)
    d = np.asarray(distance_m, dtype=float)
    return radar_cross_section_m2 * np.asarray(wavelength_m, dtype=float) ** 2 / ((4.0 * math.pi) ** 3 * d ** 4)


def sensing_channel_gain(distance_m, wavelength_m, *, radar_cross_section_m2=5.0,
                         array_gain=0.8, tx_beam_gain=1.0, rx_beam_gain=1.0,
                         n_rx_antennas=32, noise_power=1.0):
    variance = pathloss_variance(distance_m, wavelength_m, radar_cross_section_m2)
    return (variance * array_gain ** 4 * tx_beam_gain ** 2 * rx_beam_gain ** 2
            / (n_rx_antennas * noise_power))


def _snr_term(power_w, gain):
    _require_positive("power_w", power_w)
    _require_positive("gain", np.abs(np.asarray(gain)))
    return np.asarray(power_w, dtype=float) * np.abs(np.asarray(gain, dtype=float)) ** 2


def crb_distance(power_w, gain, eff_bw_sq, lambda1=1.0):
    _require_positive("eff_bw_sq", eff_bw_sq)
    return lambda1 / (_snr_term(power_w, gain) * np.asarray(eff_bw_sq, dtype=float))


def crb_velocity(power_w, gain, eff_time_s, lambda2=1e-20):
    _require_positive("eff_time_s", eff_time_s)
    return lambda2 / (_snr_term(power_w, gain) * np.asarray(eff_time_s, dtype=float) ** 2)


def crb_azimuth(power_w, gain, beamwidth_rad, lambda3=1e-13):
    _require_positive("beamwidth_rad", beamwidth_rad)
    return lambda3 / (_snr_term(power_w, gain) / np.asarray(beamwidth_rad, dtype=float))


def all_crbs(power_w, bandwidth_hz, gain, thresholds: CrbThresholds,
             waveform: WaveformParams = WaveformParams()):
    """Stack of the three CRBs, shape ``(3, ...)``."""
    lam = thresholds.lam
    return np.stack([
        crb_distance(power_w, gain, effective_bandwidth_sq(bandwidth_hz, waveform.pulse_width_s), lam[0]),
        crb_velocity(power_w, gain, waveform.effective_time_s, lam[1]),
        crb_azimuth(power_w, gain, waveform.null_to_null_beamwidth_rad, lam[2]),
    ])


def crb_satisfied(power_w, bandwidth_hz, gain, thresholds: CrbThresholds,
                  waveform: WaveformParams = WaveformParams(), rtol=1e-9):
    """Boolean per user: all three CRBs at or below their ceilings (relative slack ``rtol``)."""
    p = np.asarray(power_w, dtype=float)
    b = np.asarray(bandwidth_hz, dtype=float)
    ok = (p > 0) & (b > 0)
    out = np.zeros(np.broadcast(p, b, np.asarray(gain)).shape, dtype=bool)
    if not np.any(ok):
        return out
    g = np.broadcast_to(np.asarray(gain, dtype=float), out.shape)
    pp = np.broadcast_to(p, out.shape)[ok]
    bb = np.broadcast_to(b, out.shape)[ok]
    crbs = all_crbs(pp, bb, g[ok], thresholds, waveform)
    alpha = np.asarray(thresholds.alpha, dtype=float)[:, None]
    out[ok] = np.all(crbs <= alpha * (1.0 + rtol), axis=0)
    return out


def sensing_feasibility(gain, thresholds: CrbThresholds,
                        waveform: WaveformParams = WaveformParams()) -> SensingMinima:
    """Invert the CRB ceilings.

    Velocity and azimuth bounds only involve power, giving ``P >= p_min``; the
    distance bound gives ``P * B >= pb_product_min``. Infinite ceilings yield
    zero minima.
    """
    g2 = np.abs(np.asarray(gain, dtype=float)) ** 2
    _require_positive("gain", g2)
    a1, a2, a3 = (float(a) for a in thresholds.alpha)
    l1, l2, l3 = (float(v) for v in thresholds.lam)
    t_eff = waveform.effective_time_s
    p_velocity = l2 / (a2 * g2 * t_eff ** 2)
    p_azimuth = l3 * waveform.null_to_null_beamwidth_rad / (a3 * g2)
    p_min = np.maximum(p_velocity, p_azimuth)
    pb_min = l1 * 2.0 * math.pi ** 2 * waveform.pulse_width_s / (a1 * g2)
    binding = np.where(p_velocity >= p_azimuth, "velocity", "azimuth")
    if np.ndim(p_min) == 0:
        return SensingMinima(float(p_min), float(pb_min), str(binding))
    return SensingMinima(p_min, pb_min, binding)
