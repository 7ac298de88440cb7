"""Adaptive DA data collection: sampling rates that decay with prediction accuracy."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .arima import accuracy_score

ATTRIBUTES = ("behavior", "performance", "environment")


def collection_frequency(base_rate_hz, attenuation, accuracy):
    """``base_rate * exp(-attenuation * accuracy)`` in Hz."""
    a = np.asarray(accuracy, dtype=float)
    if np.any((a < 0) | (a > 1)):
        raise ValueError("accuracy must lie in [0, 1]")
    out = base_rate_hz * np.exp(-np.asarray(attenuation, dtype=float) * a)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class CollectionPolicy:
    base_rate_hz: tuple = (2.0, 1.0, 0.5)
    attenuation: tuple = (2.4, 2.1, 1.1)
    overhead_bits: float = 4096.0

    def __post_init__(self):
        if len(self.base_rate_hz) != 3 or len(self.attenuation) != 3:
            raise ValueError("one base rate and one attenuation per attribute")
        if any(r <= 0 for r in self.base_rate_hz):
            raise ValueError("base rates must be positive")
        if any(v < 0 for v in self.attenuation):
            raise ValueError("attenuation rates must be non-negative")
        if self.overhead_bits < 0:
            raise ValueError("overhead must be non-negative")

    def frequency(self, attribute, accuracy):
        i = ATTRIBUTES.index(attribute) if isinstance(attribute, str) else int(attribute)
        return collection_frequency(self.base_rate_hz[i], self.attenuation[i], accuracy)


class AccuracyTracker:
    """Rolling record of (forecast, observed) pairs for one attribute."""

    def __init__(self, window=20):
        self.pred = deque(maxlen=window)
        self.obs = deque(maxlen=window)

    def record(self, predicted, observed):
        self.pred.append(float(predicted))
        self.obs.append(float(observed))

    @property
    def accuracy(self) -> float:
        if len(self.obs) < 2:
            return 0.0
        return accuracy_score(list(self.pred), list(self.obs))


class SampleClock:
    """Deterministic sampler: accumulate ``rate * dt`` credit, collect whole samples."""

    def __init__(self, phase=0.0):
        self.credit = float(phase)

    def tick(self, rate_hz, dt_s) -> int:
        self.credit += rate_hz * dt_s
        n = int(np.floor(self.credit))
        self.credit -= n
        return n
