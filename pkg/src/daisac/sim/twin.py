"""Per-user digital agent inside the simulator.

Each agent samples three attribute streams at accuracy-dependent rates:
behaviour dynamics, performance feedback (latency with the MOS report), and
environmental complexity. Between samples it serves ARIMA forecasts. Every
``window_slots`` slots it closes a window of means and, when the current QoE
model mispredicts, refits factor selection and the QoE model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..da.arima import arima_fit, arima_predict
from ..da.collection import ATTRIBUTES, AccuracyTracker, CollectionPolicy, SampleClock
from ..da.dcor import QOS_FACTORS, ZeroVarianceError, select_qos_factors
from ..da.fitting import DaWindow, FittedQoe, fit_qoe_model, predicted_mos, update_trigger
from ..qoe import GENERIC_MODEL, QoeModelSpec

SERIES_KEEP = 64
MIN_FIT = 10
REFIT_EVERY = 8


class AttributeStream:
    """Collected samples of one scalar attribute plus a forecaster for the gaps."""

    def __init__(self, phase=0.0):
        self.samples = []
        self.clock = SampleClock(phase)
        self.tracker = AccuracyTracker()
        self.model = None
        self.since_fit = 0

    def forecast(self):
        if not self.samples:
            return None
        if self.model is not None and len(self.samples) > self.model.w:
            value = arima_predict(self.model, self.samples)
            if np.isfinite(value):
                return value
        return self.samples[-1]

    def observe(self, value):
        guess = self.forecast()
        if guess is not None:
            self.tracker.record(guess, value)
        self.samples.append(float(value))
        if len(self.samples) > SERIES_KEEP:
            del self.samples[0]
        self.since_fit += 1
        if len(self.samples) >= MIN_FIT and (self.model is None or self.since_fit >= REFIT_EVERY):
            try:
                self.model = arima_fit(self.samples)
            except ValueError:
                self.model = None
            self.since_fit = 0


@dataclass
class SlotRecord:
    latency_s: list = field(default_factory=list)
    quality: list = field(default_factory=list)
    mos: list = field(default_factory=list)
    behavior: list = field(default_factory=list)
    env: list = field(default_factory=list)


class UserTwin:
    def __init__(self, user_id, policy: CollectionPolicy, *, window_slots=4, h_max=1.0, xi=2.0,
                 dcc_threshold=0.3, refit_threshold=0.5, mos_floor=2.0, history_windows=24, phase=0.0):
        self.user_id = user_id
        self.policy = policy
        self.window_slots = window_slots
        self.h_max = h_max
        self.xi = xi
        self.dcc_threshold = dcc_threshold
        self.refit_threshold = refit_threshold
        self.mos_floor = mos_floor
        self.history_windows = history_windows
        self.streams = {a: AttributeStream(phase) for a in ATTRIBUTES}
        self.windows = []
        self.model: FittedQoe | None = None
        self.selected = QOS_FACTORS
        self.current = SlotRecord()
        self.slot_in_window = 0
        self.window_index = 0
        self.refits = 0
        self.estimates = {"behavior": 0.0, "environment": 0.0}

    def rates(self):
        return np.array([self.policy.frequency(a, self.streams[a].tracker.accuracy) for a in ATTRIBUTES])

    def collect(self, behavior, env, dt):
        """Advance the sampling clocks one slot; returns which attributes were sampled."""
        taken = {}
        for a, r in zip(ATTRIBUTES, self.rates()):
            taken[a] = self.streams[a].clock.tick(r, dt)
        for a, value in (("behavior", behavior), ("environment", env)):
            if taken[a]:
                self.streams[a].observe(value)
                self.estimates[a] = float(value)
            else:
                guess = self.streams[a].forecast()
                self.estimates[a] = float(guess) if guess is not None else self.estimates[a]
        self.estimates["behavior"] = max(self.estimates["behavior"], 0.0)
        self.estimates["environment"] = float(np.clip(self.estimates["environment"], 0.0, 1.0))
        return taken

    def feedback(self, sampled_performance, latency_s, quality, mos):
        """Close the slot: store performance feedback if it was collected, maybe close a window."""
        rec = self.current
        rec.behavior.append(self.estimates["behavior"])
        rec.env.append(self.estimates["environment"])
        if sampled_performance and np.isfinite(latency_s):
            self.streams["performance"].observe(latency_s)
            rec.latency_s.append(latency_s)
            rec.quality.append(quality)
            rec.mos.append(mos)
        self.slot_in_window += 1
        if self.slot_in_window >= self.window_slots:
            self._close_window()

    def _close_window(self):
        rec = self.current
        if rec.mos:
            self.windows.append(DaWindow(self.window_index, float(np.mean(rec.latency_s)),
                                         float(np.mean(rec.quality)), float(np.mean(rec.behavior)),
                                         float(np.mean(rec.env)), float(np.mean(rec.mos))))
            if len(self.windows) > self.history_windows:
                del self.windows[0]
            self._maybe_refit()
        self.window_index += 1
        self.current = SlotRecord()
        self.slot_in_window = 0

    def _maybe_refit(self):
        if len(self.windows) < 6:
            return
        if self.model is not None:
            recent = self.windows[-2:]
            pred = predicted_mos(self.model, recent, self.h_max)
            if not update_trigger([w.mean_mos for w in recent], pred, self.refit_threshold, self.mos_floor):
                return
        try:
            self.selected = select_qos_factors(self.windows, self.dcc_threshold).selected_factors
        except ZeroVarianceError:
            self.selected = QOS_FACTORS
        try:
            self.model = fit_qoe_model(self.windows, self.selected, previous=self.model, h_max=self.h_max)
            self.refits += 1
        except (ValueError, np.linalg.LinAlgError):
            pass

    def spec(self) -> QoeModelSpec:
        return self.model.spec(self.xi) if self.model is not None else GENERIC_MODEL


def fit_reference_model(windows, h_max, dcc_threshold=0.3) -> FittedQoe:
    """Model fitted once from dense feedback; used as the common scorer."""
    try:
        selected = select_qos_factors(windows, dcc_threshold).selected_factors
    except ZeroVarianceError:
        selected = QOS_FACTORS
    return fit_qoe_model(windows, selected, h_max=h_max)
