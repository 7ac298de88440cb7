"""Convex surrogates used by the group-level SCA solver."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def rate_gradient(bandwidth_hz, power_w, snr_coeff):
    """Partial derivatives of ``R = B log2(1 + a P / B)`` with respect to B and P.

    ``snr_coeff`` is ``|h|^2 / N0``. Since R is positively homogeneous of
    degree one, ``R = B dR/dB + P dR/dP`` and its tangent plane passes
    through the origin.
    """
    x = snr_coeff * power_w / bandwidth_hz
    d_b = math.log2(1.0 + x) - x / ((1.0 + x) * math.log(2.0))
    d_p = snr_coeff / ((1.0 + x) * math.log(2.0))
    return d_b, d_p


def linearize_inv_rate(bandwidth_hz, power_w, rate_bps, snr_coeff):
    """Affine surrogate ``c0 + cB * B + cP * P`` of ``1 / R`` around the current point.

    ``1/R ~ 1/R_t - (R~ - R_t) / R_t^2`` with ``R~`` the tangent plane of the
    rate through the log-linearisation ``ln(1 + x) ~ ln(1 + x_t) + (x - x_t)/(1 + x_t)``.
    The surrogate equals ``1/R_t`` at the expansion point.
    """
    if not rate_bps > 0:
        raise ValueError(f"linearization needs a positive rate, got {rate_bps}")
    d_b, d_p = rate_gradient(bandwidth_hz, power_w, snr_coeff)
    r2 = rate_bps * rate_bps
    c0 = 1.0 / rate_bps + (d_b * bandwidth_hz + d_p * power_w) / r2
    return c0, -d_b / r2, -d_p / r2


def mccormick_envelope(bounds, power, bandwidth, product):
    """Residuals (>= 0 when satisfied) of the four envelope inequalities.

    ``bounds`` is ``(p_lo, p_hi, b_lo, b_hi)``. Rows:
    ``Y - (P b_lo + B p_lo - p_lo b_lo)``, ``P b_hi - Y``, ``B p_hi - Y``, ``Y``.
    """
    p_lo, p_hi, b_lo, b_hi = (np.asarray(v, dtype=float) for v in bounds)
    P = np.asarray(power, dtype=float)
    B = np.asarray(bandwidth, dtype=float)
    Y = np.asarray(product, dtype=float)
    return np.stack([
        Y - (P * b_lo + B * p_lo - p_lo * b_lo),
        P * b_hi - Y,
        B * p_hi - Y,
        Y,
    ])


def envelope_interval(bounds, power, bandwidth):
    """Range of ``Y`` admitted by the envelope at a given (P, B)."""
    p_lo, p_hi, b_lo, b_hi = bounds
    lo = max(power * b_lo + bandwidth * p_lo - p_lo * b_lo, 0.0)
    hi = min(power * b_hi, bandwidth * p_hi)
    return lo, hi


def quadratic_transform_step(gamma, latency, phi):
    """Evaluate ``2 phi sqrt(gamma) - phi^2 latency`` and return it with the maximizing ``phi``.

    At the returned multiplier the surrogate equals ``gamma / latency``, and for
    any other multiplier it is a lower bound on that ratio.
    """
    if not latency > 0:
        raise ValueError(f"latency must be positive, got {latency}")
    if gamma < 0:
        raise ValueError(f"numerator must be non-negative, got {gamma}")
    root = math.sqrt(gamma)
    return 2.0 * phi * root - phi * phi * latency, root / latency


@dataclass(frozen=True)
class McCormickBounds:
    p_lo: np.ndarray
    p_hi: np.ndarray
    b_lo: np.ndarray
    b_hi: np.ndarray

    def __post_init__(self):
        arrs = [np.atleast_1d(np.asarray(v, dtype=float)) for v in (self.p_lo, self.p_hi, self.b_lo, self.b_hi)]
        for name, a in zip(("p_lo", "p_hi", "b_lo", "b_hi"), arrs):
            object.__setattr__(self, name, a)
        if np.any(arrs[0] < 0) or np.any(arrs[2] < 0):
            raise ValueError("McCormick bounds must be non-negative")
        if np.any(arrs[0] > arrs[1]) or np.any(arrs[2] > arrs[3]):
            raise ValueError("McCormick bounds need lo <= hi")

    @classmethod
    def around(cls, power, bandwidth, spread=0.5, p_cap=1.0, b_cap=1.0):
        """Box of +-``spread`` around the current iterate, clipped to ``[0, cap]``."""
        p = np.asarray(power, dtype=float)
        b = np.asarray(bandwidth, dtype=float)
        return cls(np.clip(p * (1 - spread), 0, p_cap), np.clip(p * (1 + spread), 0, p_cap),
                   np.clip(b * (1 - spread), 0, b_cap), np.clip(b * (1 + spread), 0, b_cap))

    def as_tuple(self, k=slice(None)):
        return self.p_lo[k], self.p_hi[k], self.b_lo[k], self.b_hi[k]
