"""Distance correlation and QoS factor selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ZeroVarianceError(ValueError):
    """Raised when a sample has zero distance variance (coefficient undefined)."""


def _double_centered_distances(x):
    x = np.asarray(x, dtype=float).ravel()
    d = np.abs(x[:, None] - x[None, :])
    return d - d.mean(axis=0, keepdims=True) - d.mean(axis=1, keepdims=True) + d.mean()


def distance_covariance_sq(x, y):
    a = _double_centered_distances(x)
    b = _double_centered_distances(y)
    if a.shape != b.shape:
        raise ValueError("x and y must have the same length")
    return float(np.mean(a * b))


def distance_correlation(x, y) -> float:
    """Distance correlation coefficient in [0, 1].

    Raises ZeroVarianceError if either sample is constant.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise ValueError("x and y must have the same length")
    if x.size < 2:
        raise ValueError("need at least two observations")
    a = _double_centered_distances(x)
    b = _double_centered_distances(y)
    vxx = np.mean(a * a)
    vyy = np.mean(b * b)
    if vxx <= 0 or vyy <= 0:
        raise ZeroVarianceError("constant input: distance variance is zero")
    vxy = max(np.mean(a * b), 0.0)
    # ratio of square roots of the squared (co)variances
    r = np.sqrt(vxy) / np.sqrt(np.sqrt(vxx) * np.sqrt(vyy))
    return float(min(r, 1.0))


QOS_FACTORS = ("latency", "quality")


@dataclass
class DccResult:
    coefficients: dict = field(default_factory=dict)
    selected: dict = field(default_factory=dict)

    @property
    def selected_factors(self) -> tuple:
        return tuple(f for f in QOS_FACTORS if self.selected.get(f))


def select_qos_factors(windows, threshold=0.3) -> DccResult:
    """Pick the QoS factors whose distance correlation with MOS reaches ``threshold``.

    Degenerate factors are skipped; if nothing clears the threshold the
    strongest factor is kept so the QoE basis is never empty.
    """
    if len(windows) < 2:
        raise ValueError("need at least two windows")
    mos = np.array([w.mean_mos for w in windows], dtype=float)
    series = {
        "latency": np.array([w.mean_latency_s for w in windows], dtype=float),
        "quality": np.array([w.mean_quality for w in windows], dtype=float),
    }
    coeffs = {}
    for name in QOS_FACTORS:
        try:
            coeffs[name] = distance_correlation(series[name], mos)
        except ZeroVarianceError:
            continue
    if not coeffs:
        raise ZeroVarianceError("no informative factor: every candidate (or MOS) is constant")
    selected = {name: coeffs[name] >= threshold for name in coeffs}
    if not any(selected.values()):
        best = max(coeffs, key=coeffs.get)
        selected[best] = True
    return DccResult(coeffs, selected)
