"""Vectorized per-user QoE and the conservation monitor."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..qoe import content_quality, impact, qos_from_factors, transmission_rate
from ..sensing import crb_satisfied

QOE_RANGE = (1.0, 5.0)


def user_latency(users, alloc):
    """Service latency per user for a (K, 3) allocation of (B, P, C)."""
    B, P, C = alloc[:, 0], alloc[:, 1], alloc[:, 2]
    rate = np.asarray(transmission_rate(B, P, users["comm_gain"], users["noise_psd"]), dtype=float)
    F = users["file_size_bits"]
    with np.errstate(divide="ignore"):
        lat = users["cycles_per_bit"] * F / C + F / rate
    return np.where((C > 0) & (rate > 0), lat, np.inf)


def user_qoe(users, alloc, clip=None, latency_cap=None):
    """``impact * QoS`` for each user under its own model; optionally clipped to a range.

    ``latency_cap`` bounds the latency fed to the model (a request that is
    not served within the cap counts as served at the cap).
    """
    lat = user_latency(users, alloc)
    if latency_cap is not None:
        lat = np.minimum(lat, latency_cap)
    q = content_quality(users["file_size_bits"] / 8e6, users["xi"])
    finite = np.isfinite(lat)
    safe = np.where(finite, lat, 1.0)
    out = qos_from_factors(users["structure"], users["omega"], q, safe) * users["impact"]
    is_l2 = users["structure"] == "L2"
    out = np.where(finite, out, np.where(is_l2, 0.0, -np.inf))
    if clip is not None:
        out = np.clip(out, *clip)
    return out


def impact_of(behavior, env, h_max):
    return np.asarray(impact(behavior, env, h_max, 1.0), dtype=float)


@dataclass
class ConservationMonitor:
    """Checks every emitted allocation against the budgets and, where flagged feasible, the CRBs."""

    rtol: float = 1e-9
    checked: int = 0
    violations: list = field(default_factory=list)

    def check(self, tag, alloc, totals, overhead_hz, feasible, sensing_gain, thresholds, waveform):
        self.checked += 1
        B_tot, P_tot, C_tot = totals
        sums = alloc.sum(axis=0)
        if sums[0] + overhead_hz > B_tot * (1 + self.rtol):
            self.violations.append((tag, "bandwidth", sums[0] + overhead_hz, B_tot))
        if sums[1] > P_tot * (1 + self.rtol):
            self.violations.append((tag, "power", sums[1], P_tot))
        if sums[2] > C_tot * (1 + self.rtol):
            self.violations.append((tag, "compute", sums[2], C_tot))
        if np.any(alloc < 0):
            self.violations.append((tag, "negative", float(alloc.min()), 0.0))
        idx = np.flatnonzero(feasible)
        if idx.size:
            ok = crb_satisfied(alloc[idx, 1], alloc[idx, 0], sensing_gain[idx], thresholds, waveform, self.rtol)
            for k in idx[~ok]:
                self.violations.append((tag, "crb", int(k), 0.0))

    @property
    def clean(self):
        return not self.violations
