"""Scenario configuration and its flat key-value file format.

Files are INI-style with sections purely for grouping; each key names a
ScenarioConfig field. Quantities may carry a unit suffix, converted to SI:

    MHz, GHz, kHz, Hz        -> Hz
    W, mW                    -> W
    GCyc, MCyc, Cyc          -> cycles/s
    kmh                      -> km/h (speeds stay in km/h)
    dBmHz                    -> dBm/Hz (kept in dB)
    s, ms                    -> s
    m                        -> m
    MB                       -> MB
    bit                      -> bits

Tuples are comma-separated.
"""

from __future__ import annotations

import configparser
import dataclasses
import re
from dataclasses import dataclass, field, fields

_UNITS = {
    "GHz": 1e9, "MHz": 1e6, "kHz": 1e3, "Hz": 1.0,
    "mW": 1e-3, "W": 1.0,
    "GCyc": 1e9, "MCyc": 1e6, "Cyc": 1.0,
    "kmh": 1.0, "dBmHz": 1.0,
    "ms": 1e-3, "s": 1.0, "m": 1.0, "MB": 1.0, "bit": 1.0,
}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")


def parse_quantity(text):
    m = _QUANTITY.match(text)
    if not m:
        raise ValueError(f"cannot parse quantity {text!r}")
    value, unit = m.groups()
    if unit and unit not in _UNITS:
        raise ValueError(f"unknown unit suffix {unit!r} in {text!r}")
    return float(value) * _UNITS.get(unit, 1.0)


@dataclass
class ScenarioConfig:
    # population and time
    n_users: int = 8
    n_slots: int = 40
    n_episodes: int = 60
    slot_duration_s: float = 1.0
    latency_cap_s: float = 60.0
    seed: int = 0
    # budgets
    # desk scale keeps the per-user resources of the 30-user network
    bandwidth_hz: float = 400e6 * 8 / 30
    power_w: float = 40.0 * 8 / 30
    compute_cycles_per_s: float = 15e9 * 8 / 30
    # geometry and channels
    carriers_ghz: tuple = (28.0, 39.0)
    bs_xy_m: tuple = (0.0, 0.0, -250.0, -667.0)
    cell_radius_m: float = 200.0
    min_distance_m: float = 20.0
    noise_psd_dbm_hz: float = -174.0
    sensing_noise_bandwidth_hz: float = 400e6
    velocity_kmh: tuple = (30.0, 80.0)
    v_max_kmh: float = 80.0
    speed_jitter: float = 0.15
    # demand and QoE
    file_size_mb: tuple = (4.0, 64.0)
    cycles_per_mb: float = 1e7
    xi: float = 2.0
    mos_mix: tuple = (0.4, 0.2, 0.4)       # latency, quality, combined
    swipe_prob: tuple = (0.05, 0.6)
    swipe_smoothing: float = 0.3
    # sensing
    alpha: tuple = (0.01, 0.01, 0.01)
    lam: tuple = (1.0, 1e-20, 1e-13)
    # DA
    base_rate_hz: tuple = (2.0, 1.0, 0.5)
    attenuation: tuple = (2.4, 2.1, 1.1)
    overhead_bits: float = 2e6
    overhead_spectral_eff: float = 5.0
    window_slots: int = 4
    dcc_threshold: float = 0.3
    refit_threshold: float = 0.5
    mos_floor: float = 2.0
    history_windows: int = 24
    reference_slots: int = 400
    # solver
    crb_path: str = "direct"
    max_outer: int = 20
    tol_outer: float = 1e-4
    # agent
    hidden: tuple = (256, 128, 64)
    gamma: float = 0.9
    lr: float = 1e-3
    actor_lr: float = 1e-4
    center_rewards: bool = True
    optimizer: str = "adam"
    epsilon_start: float = 0.2
    epsilon_final: float = 0.01
    sync_period: int = 50
    memory_size: int = 6000
    batch_size: int = 128
    updates_per_step: int = 1
    # baselines
    greedy_quanta: int = 5
    eval_episodes: int = 3
    checkpoint_every: int = 0

    def __post_init__(self):
        if self.n_users < 1:
            raise ValueError("need at least one user")
        if min(self.bandwidth_hz, self.power_w, self.compute_cycles_per_s) <= 0:
            raise ValueError("budgets must be positive")
        if self.velocity_kmh[1] > self.v_max_kmh or self.velocity_kmh[0] < 0:
            raise ValueError("velocity range must lie in [0, v_max]")
        if len(self.bs_xy_m) != 2 * len(self.carriers_ghz):
            raise ValueError("one (x, y) pair per base station")
        if abs(sum(self.mos_mix) - 1.0) > 1e-9:
            raise ValueError("MOS principle mix must sum to one")
        if self.crb_path not in ("direct", "mccormick"):
            raise ValueError("crb_path must be 'direct' or 'mccormick'")

    def replace(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)


def desk_preset(**kw) -> ScenarioConfig:
    return ScenarioConfig(**kw)


def paper_preset(**kw) -> ScenarioConfig:
    """Full-scale run: 30 users, 240 episodes of 60 steps, plain gradient descent."""
    base = dict(n_users=30, n_slots=60, n_episodes=240, optimizer="sgd",
                lr=1e-4, actor_lr=1e-4, updates_per_step=1,
                bandwidth_hz=400e6, power_w=40.0, compute_cycles_per_s=15e9)
    base.update(kw)
    return ScenarioConfig(**base)


def _convert(raw, current):
    if isinstance(current, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(current, tuple):
        parts = [p for p in raw.split(",") if p.strip()]
        as_int = bool(current) and all(isinstance(v, int) for v in current)
        return tuple(int(parse_quantity(p)) if as_int else parse_quantity(p) for p in parts)
    if isinstance(current, int):
        return int(parse_quantity(raw))
    if isinstance(current, float):
        return parse_quantity(raw)
    return raw.strip()


def load_config(path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    base = base or ScenarioConfig()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    with open(path) as fh:
        parser.read_file(fh)
    known = {f.name for f in fields(ScenarioConfig)}
    updates = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in known:
                raise ValueError(f"unknown config key {key!r} in [{section}]")
            updates[key] = _convert(raw, getattr(base, key))
    return dataclasses.replace(base, **updates)


_SECTIONS = {
    "scenario": ("n_users", "n_slots", "n_episodes", "slot_duration_s", "latency_cap_s", "seed"),
    "budgets": ("bandwidth_hz", "power_w", "compute_cycles_per_s"),
    "channel": ("carriers_ghz", "bs_xy_m", "cell_radius_m", "min_distance_m", "noise_psd_dbm_hz",
                "sensing_noise_bandwidth_hz", "velocity_kmh", "v_max_kmh", "speed_jitter"),
    "qoe": ("file_size_mb", "cycles_per_mb", "xi", "mos_mix", "swipe_prob", "swipe_smoothing"),
    "sensing": ("alpha", "lam"),
    "collection": ("base_rate_hz", "attenuation", "overhead_bits", "overhead_spectral_eff", "window_slots",
                   "dcc_threshold", "refit_threshold", "mos_floor", "history_windows", "reference_slots"),
    "solver": ("crb_path", "max_outer", "tol_outer"),
    "agent": ("hidden", "gamma", "lr", "actor_lr", "center_rewards", "optimizer", "epsilon_start", "epsilon_final", "sync_period",
              "memory_size", "batch_size", "updates_per_step"),
    "baselines": ("greedy_quanta", "eval_episodes", "checkpoint_every"),
}
_SUFFIX = {"bandwidth_hz": "MHz", "sensing_noise_bandwidth_hz": "MHz", "power_w": "W",
           "compute_cycles_per_s": "GCyc", "velocity_kmh": "kmh", "v_max_kmh": "kmh",
           "noise_psd_dbm_hz": "dBmHz", "slot_duration_s": "s", "latency_cap_s": "s", "file_size_mb": "MB", "overhead_bits": "bit"}


def _format(key, value):
    unit = _SUFFIX.get(key, "")
    scale = _UNITS.get(unit, 1.0)
    if isinstance(value, tuple):
        return ", ".join(f"{v / scale:.12g}{unit}" for v in value)
    if isinstance(value, float):
        return f"{value / scale:.12g}{unit}"
    return str(value)


def dump_config(path, config: ScenarioConfig):
    with open(path, "w") as fh:
        for section, keys in _SECTIONS.items():
            fh.write(f"[{section}]\n")
            for key in keys:
                fh.write(f"{key} = {_format(key, getattr(config, key))}\n")
            fh.write("\n")
