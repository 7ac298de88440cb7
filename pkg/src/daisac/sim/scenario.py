"""User population, mobility traces and channel gains for a two-cell ISAC network."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..sensing import CrbThresholds, sensing_channel_gain
from ..units import SPEED_OF_LIGHT, dbm_per_hz_to_w_per_hz, kmh_to_ms
from .config import ScenarioConfig
from .mos import PRINCIPLES

SWIPE_TRIALS = 10


def environmental_complexity(velocity_kmh, v_max_kmh):
    """``exp((v^2 - v_max^2) / (2 rho^2))`` with ``rho = v_max / 1.96``; speeds above v_max are clamped."""
    v = np.asarray(velocity_kmh, dtype=float)
    if np.any(v < 0):
        raise ValueError("velocity must be non-negative")
    if np.any(v > v_max_kmh):
        warnings.warn("velocity above v_max clamped", RuntimeWarning, stacklevel=2)
        v = np.minimum(v, v_max_kmh)
    rho = v_max_kmh / 1.96
    out = np.exp((v ** 2 - v_max_kmh ** 2) / (2.0 * rho ** 2))
    return out if out.ndim else float(out)


def comm_channel_gain(distance_m, carrier_ghz):
    """Power gain ``10^(-PL/10)`` with ``PL = 32.4 + 20 log10(d) + 20 log10(f_GHz)`` dB."""
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    pl = 32.4 + 20.0 * np.log10(d) + 20.0 * np.log10(carrier_ghz)
    out = 10.0 ** (-pl / 10.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class UserProfile:
    user_id: int
    cell: int
    velocity_kmh: float
    principle: str
    swipe_prob: float
    file_size_mb: tuple       # (low, high) of this user's log-uniform request sizes


@dataclass
class EpisodeTrace:
    """Per-slot ground truth, arrays of shape (n_slots, n_users)."""

    distance_m: np.ndarray
    speed_kmh: np.ndarray
    env_complexity: np.ndarray
    behavior_dynamics: np.ndarray
    file_size_mb: np.ndarray
    comm_gain: np.ndarray
    sensing_gain: np.ndarray


class Scenario:
    def __init__(self, config: ScenarioConfig, seed: int):
        self.config = config
        self.seed = int(seed)
        self.noise_psd = dbm_per_hz_to_w_per_hz(config.noise_psd_dbm_hz)
        self.thresholds = CrbThresholds(tuple(config.alpha), tuple(config.lam))
        rng = np.random.default_rng([self.seed, 0])
        self.users = self._population(rng)
        self.h_max = self._behavior_scale()
        self._cache = {}

    # -- population ------------------------------------------------------------
    def _population(self, rng):
        c = self.config
        n_cells = len(c.carriers_ghz)
        principles = rng.choice(len(PRINCIPLES), size=c.n_users, p=c.mos_mix)
        lo, hi = np.log(c.file_size_mb[0]), np.log(c.file_size_mb[1])
        users = []
        for k in range(c.n_users):
            centre = rng.uniform(lo, hi)
            half = 0.25 * (hi - lo)
            users.append(UserProfile(
                user_id=k,
                cell=k % n_cells,
                velocity_kmh=float(rng.uniform(*c.velocity_kmh)),
                principle=PRINCIPLES[principles[k]],
                swipe_prob=float(rng.uniform(*c.swipe_prob)),
                file_size_mb=(float(np.exp(max(lo, centre - half))), float(np.exp(min(hi, centre + half)))),
            ))
        return users

    def _behavior_scale(self):
        """99th percentile of smoothed swipe counts over a warmup run."""
        rng = np.random.default_rng([self.seed, 1])
        probs = np.array([u.swipe_prob for u in self.users])
        h = self._swipe_process(rng, probs, 200)
        return max(float(np.percentile(h, 99)), 1e-9)

    def _swipe_process(self, rng, probs, n_slots):
        s = self.config.swipe_smoothing
        counts = rng.binomial(SWIPE_TRIALS, probs, size=(n_slots, probs.size)).astype(float)
        h = np.empty_like(counts)
        level = probs * SWIPE_TRIALS
        for t in range(n_slots):
            level = (1.0 - s) * level + s * counts[t]
            h[t] = level
        return h

    # -- traces ----------------------------------------------------------------------
    def cell_centre(self, cell):
        xy = self.config.bs_xy_m
        return np.array([xy[2 * cell], xy[2 * cell + 1]], dtype=float)

    def _random_point(self, rng, cell):
        c = self.config
        r = c.cell_radius_m * math.sqrt(rng.uniform((c.min_distance_m / c.cell_radius_m) ** 2, 1.0))
        a = rng.uniform(0.0, 2.0 * math.pi)
        return self.cell_centre(cell) + r * np.array([math.cos(a), math.sin(a)])

    def _trajectory(self, rng, user: UserProfile, n_slots):
        c = self.config
        pos = self._random_point(rng, user.cell)
        target = self._random_point(rng, user.cell)
        dist = np.empty(n_slots)
        speed = np.empty(n_slots)
        lo, hi = c.velocity_kmh
        for t in range(n_slots):
            v = float(np.clip(user.velocity_kmh * (1.0 + c.speed_jitter * rng.standard_normal()), 0.0, c.v_max_kmh))
            speed[t] = v
            step = kmh_to_ms(v) * c.slot_duration_s
            while step > 0:
                gap = np.linalg.norm(target - pos)
                if gap <= step:
                    pos, step = target, step - gap
                    target = self._random_point(rng, user.cell)
                else:
                    pos = pos + (target - pos) * (step / gap)
                    step = 0.0
            dist[t] = max(float(np.linalg.norm(pos - self.cell_centre(user.cell))), c.min_distance_m)
        return dist, speed

    def episode(self, index) -> EpisodeTrace:
        if index in self._cache:
            return self._cache[index]
        c = self.config
        rng = np.random.default_rng([self.seed, 2, int(index)])
        n, K = c.n_slots, c.n_users
        dist = np.empty((n, K))
        speed = np.empty((n, K))
        for k, u in enumerate(self.users):
            dist[:, k], speed[:, k] = self._trajectory(rng, u, n)
        probs = np.array([u.swipe_prob for u in self.users])
        behavior = self._swipe_process(rng, probs, n)
        lo = np.log([u.file_size_mb[0] for u in self.users])
        hi = np.log([u.file_size_mb[1] for u in self.users])
        sizes = np.exp(lo + (hi - lo) * rng.random((n, K)))
        carriers = np.array([c.carriers_ghz[u.cell] for u in self.users])
        comm = comm_channel_gain(dist, carriers[None, :])
        wavelength = SPEED_OF_LIGHT / (carriers * 1e9)
        sensing = sensing_channel_gain(dist, wavelength[None, :],
                                       noise_power=self.noise_psd * c.sensing_noise_bandwidth_hz)
        trace = EpisodeTrace(dist, speed, environmental_complexity(speed, c.v_max_kmh), behavior, sizes,
                             comm, sensing)
        if len(self._cache) < 64:
            self._cache[index] = trace
        return trace


def generate_scenario(config: ScenarioConfig, seed=None) -> Scenario:
    return Scenario(config, config.seed if seed is None else seed)
