"""Synthetic MOS feedback: truncated-normal scores on [1, 5] per rating principle."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr, ndtri

PRINCIPLES = ("latency", "quality", "combined")
MOS_LO, MOS_HI = 1.0, 5.0


def mos_mean_var(principle, latency_s, quality):
    """Untruncated mean and variance of the principle's score distribution."""
    if principle == "latency":
        return 5.0 - 0.4 * latency_s, 8.0
    if principle == "quality":
        return 1.0 + 4.0 * quality, 1.0
    if principle == "combined":
        return 1.0 + 4.0 * quality - 0.4 * latency_s, 0.8
    raise ValueError(f"unknown MOS principle {principle!r}")


def _inverse_cdf_draw(mean, sd, rng):
    a = ndtr((MOS_LO - mean) / sd)
    b = ndtr((MOS_HI - mean) / sd)
    if b - a < 1e-300:
        return MOS_LO if mean < MOS_LO else MOS_HI
    return float(np.clip(mean + sd * ndtri(a + rng.random() * (b - a)), MOS_LO, MOS_HI))


def mos_oracle(principle, latency_s, quality, rng, max_tries=200):
    """One MOS draw. Rejection sampling, with an inverse-CDF draw when acceptance is tiny."""
    if latency_s < 0:
        raise ValueError("latency must be non-negative")
    mean, var = mos_mean_var(principle, min(latency_s, 1e6), quality)
    sd = np.sqrt(var)
    for _ in range(max_tries):
        x = mean + sd * rng.standard_normal()
        if MOS_LO <= x <= MOS_HI:
            return float(x)
    return _inverse_cdf_draw(mean, sd, rng)


def expected_mos(principle, latency_s, quality):
    """Mean of the truncated distribution (closed form)."""
    mean, var = mos_mean_var(principle, latency_s, quality)
    sd = np.sqrt(var)
    alpha = (MOS_LO - mean) / sd
    beta = (MOS_HI - mean) / sd
    # take the mass from the tail nearer the mean to avoid cancellation
    z = ndtr(-alpha) - ndtr(-beta) if alpha > 0 else ndtr(beta) - ndtr(alpha)
    pdf = lambda x: np.exp(-0.5 * x * x) / np.sqrt(2 * np.pi)
    if z < 1e-300:
        return MOS_LO if mean < MOS_LO else MOS_HI
    return float(np.clip(mean + sd * (pdf(alpha) - pdf(beta)) / z, MOS_LO, MOS_HI))
