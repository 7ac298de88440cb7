"""Per-user QoS/QoE evaluation.

QoE is QoS scaled by a sigmoid impact factor of behavioral dynamics and
environmental complexity. QoS comes in two structural families:

* ``L1``: ``w1 * quality - w2 * latency`` (``w2`` carries 1/seconds)
* ``L2``: ``w3 * quality / latency``

Content quality is ``xi F / (1 + xi F)`` with ``F`` in megabytes. Latency is
computing delay plus transmission delay, with file sizes in bits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .units import BITS_PER_MB, bits_to_mb


class QoeStructure(str, enum.Enum):
    L1 = "L1"
    L2 = "L2"


@dataclass(frozen=True)
class QoeModelSpec:
    structure: QoeStructure
    omega: tuple = (1.0, 1.0, 0.0)
    xi: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "structure", QoeStructure(self.structure))
        omega = tuple(float(w) for w in self.omega)
        if len(omega) != 3:
            raise ValueError("omega must have three components")
        if any(w < 0 for w in omega):
            raise ValueError(f"omega components must be non-negative, got {omega}")
        if not self.xi > 0:
            raise ValueError("xi must be positive")
        object.__setattr__(self, "omega", omega)


GENERIC_MODEL = QoeModelSpec(QoeStructure.L1, (1.0, 1.0, 0.0))


@dataclass(frozen=True)
class UserContext:
    behavior_dynamics: float
    env_complexity: float
    h_max: float = 1.0
    e_max: float = 1.0

    def __post_init__(self):
        if not (self.h_max > 0 and self.e_max > 0):
            raise ValueError("h_max and e_max must be positive")


@dataclass(frozen=True)
class ServiceDemand:
    file_size_bits: float
    computing_density_cycles_per_bit: float = 1e7 / BITS_PER_MB

    def __post_init__(self):
        if not (self.file_size_bits > 0 and self.computing_density_cycles_per_bit > 0):
            raise ValueError("file size and computing density must be positive")

    @classmethod
    def from_mb(cls, file_size_mb, cycles_per_mb=1e7):
        return cls(file_size_mb * BITS_PER_MB, cycles_per_mb / BITS_PER_MB)

    @property
    def file_size_mb(self):
        return bits_to_mb(self.file_size_bits)


@dataclass(frozen=True)
class Allocation:
    bandwidth_hz: float
    power_w: float
    compute_cycles_per_s: float

    def __post_init__(self):
        if min(self.bandwidth_hz, self.power_w, self.compute_cycles_per_s) < 0:
            raise ValueError("allocations must be non-negative")


def transmission_rate(bandwidth_hz, power_w, comm_gain_h, noise_psd):
    """Shannon rate ``B log2(1 + P |h|^2 / (B N0))`` in bits/s; zero bandwidth gives zero."""
    b = np.asarray(bandwidth_hz, dtype=float)
    p = np.asarray(power_w, dtype=float)
    if np.any(b < 0) or np.any(p < 0):
        raise ValueError("bandwidth and power must be non-negative")
    snr_coeff = np.abs(np.asarray(comm_gain_h, dtype=float)) / noise_psd
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = b * np.log2(1.0 + p * snr_coeff / b)
    rate = np.where(b > 0, rate, 0.0)
    return rate if rate.ndim else float(rate)


def content_quality(file_size_mb, xi=2.0):
    xf = xi * np.asarray(file_size_mb, dtype=float)
    out = xf / (1.0 + xf)
    return out if out.ndim else float(out)


def service_latency(file_size_bits, compute_cycles_per_s, rate_bps, density_cycles_per_bit):
    """Computing plus transmission delay; a zero resource makes the latency infinite."""
    f = np.asarray(file_size_bits, dtype=float)
    c = np.asarray(compute_cycles_per_s, dtype=float)
    r = np.asarray(rate_bps, dtype=float)
    with np.errstate(divide="ignore"):
        lat = density_cycles_per_bit * f / c + f / r
    lat = np.where((c > 0) & (r > 0), lat, np.inf)
    return lat if lat.ndim else float(lat)


def impact(behavior_dynamics, env_complexity, h_max=1.0, e_max=1.0):
    """Sigmoid impact factor in (0.7, 1); normalized inputs are clipped at 1."""
    h = np.minimum(np.asarray(behavior_dynamics, dtype=float) / h_max, 1.0)
    e = np.minimum(np.asarray(env_complexity, dtype=float) / e_max, 1.0)
    if np.any(h < 0) or np.any(e < 0):
        raise ValueError("behavior dynamics and environmental complexity must be >= 0")
    out = 1.0 - 0.3 / (1.0 + np.exp(-5.0 * (h + e - 1.0)))
    return out if out.ndim else float(out)


def context_impact(context: UserContext) -> float:
    return impact(context.behavior_dynamics, context.env_complexity, context.h_max, context.e_max)


def qos_from_factors(structure, omega, quality, latency):
    """Vectorized QoS. ``structure`` may be a single value or an array of 'L1'/'L2'."""
    omega = np.asarray(omega, dtype=float)
    q = np.asarray(quality, dtype=float)
    lat = np.asarray(latency, dtype=float)
    is_l2 = np.asarray(structure) == QoeStructure.L2.value
    if np.ndim(is_l2) == 0 and omega.ndim == 1:
        if is_l2:
            if np.any(lat == 0):
                raise ValueError("L2 QoS undefined at zero latency")
            with np.errstate(divide="ignore"):
                out = omega[2] * q / lat
        else:
            out = omega[0] * q - omega[1] * lat
        return out if np.ndim(out) else float(out)
    w = np.atleast_2d(omega)
    if np.any(is_l2 & (lat == 0)):
        raise ValueError("L2 QoS undefined at zero latency")
    with np.errstate(divide="ignore", invalid="ignore"):
        l2 = w[..., 2] * q / lat
        l1 = w[..., 0] * q - w[..., 1] * lat
    return np.where(is_l2, l2, l1)


def qos(spec: QoeModelSpec, allocation: Allocation, demand: ServiceDemand, rate) -> float:
    quality = content_quality(demand.file_size_mb, spec.xi)
    latency = service_latency(demand.file_size_bits, allocation.compute_cycles_per_s, rate,
                              demand.computing_density_cycles_per_bit)
    if spec.structure is QoeStructure.L2 and latency == 0:
        raise ValueError("L2 QoS undefined at zero latency")
    if math.isinf(latency):
        return 0.0 if spec.structure is QoeStructure.L2 else -math.inf
    return qos_from_factors(spec.structure.value, spec.omega, quality, latency)


def qoe(spec: QoeModelSpec, context: UserContext, allocation: Allocation,
        demand: ServiceDemand, comm_gain, noise_psd) -> float:
    rate = transmission_rate(allocation.bandwidth_hz, allocation.power_w, comm_gain, noise_psd)
    return qos(spec, allocation, demand, rate) * context_impact(context)
