"""Group-level state features and action normalization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..sca.solver import GroupBudget

FEATURES = ("behavior_dynamics", "env_complexity", "sensing_gain_db", "comm_gain_db",
            "file_size_mb", "omega1", "omega2", "omega3", "user_share")
STATE_DIM = 2 * len(FEATURES)
ACTION_DIM = 6


@dataclass(frozen=True)
class GroupSummary:
    """Means over one group's users; ``n_users == 0`` marks an empty group."""

    n_users: int
    behavior_dynamics: float = 0.0
    env_complexity: float = 0.0
    sensing_gain: float = 0.0
    comm_gain: float = 0.0
    file_size_mb: float = 0.0
    omega: tuple = (0.0, 0.0, 0.0)
    total_users: int = 0

    @classmethod
    def from_users(cls, behavior, env, sensing_gain, comm_gain, file_size_mb, omegas, total_users):
        n = len(behavior)
        if n == 0:
            return cls(0, total_users=total_users)
        om = np.asarray(omegas, dtype=float).reshape(n, 3).mean(axis=0)
        return cls(n, float(np.mean(behavior)), float(np.mean(env)), float(np.mean(sensing_gain)),
                   float(np.mean(comm_gain)), float(np.mean(file_size_mb)), tuple(om), total_users)


@dataclass(frozen=True)
class NormalizationRanges:
    """(low, high) per feature; gains are normalized in dB."""

    ranges: dict = field(default_factory=lambda: {
        "behavior_dynamics": (0.0, 1.0),
        "env_complexity": (0.0, 1.0),
        "sensing_gain_db": (-40.0, 60.0),
        "comm_gain_db": (-120.0, -60.0),
        "file_size_mb": (0.0, 20.0),
        "omega1": (0.0, 6.0),
        "omega2": (0.0, 6.0),
        "omega3": (0.0, 6.0),
        "user_share": (0.0, 1.0),
    })

    def scale(self, name, value):
        lo, hi = self.ranges[name]
        if hi <= lo:
            raise ValueError(f"empty range for {name}")
        return float(np.clip((value - lo) / (hi - lo), 0.0, 1.0))


def _db(x):
    return 10.0 * np.log10(max(abs(x), 1e-300))


def observe_state(groups, ranges: NormalizationRanges = NormalizationRanges()):
    """Concatenate the two groups' normalized summaries; an empty group contributes zeros."""
    if len(groups) != 2:
        raise ValueError("expected exactly two group summaries")
    out = np.zeros(STATE_DIM)
    for i, g in enumerate(groups):
        if g.n_users == 0:
            continue
        raw = {
            "behavior_dynamics": g.behavior_dynamics,
            "env_complexity": g.env_complexity,
            # the sensing gain enters the bounds squared, so its power is the natural scale
            "sensing_gain_db": _db(g.sensing_gain ** 2),
            "comm_gain_db": _db(g.comm_gain),
            "file_size_mb": g.file_size_mb,
            "omega1": g.omega[0],
            "omega2": g.omega[1],
            "omega3": g.omega[2],
            "user_share": g.n_users / max(g.total_users, g.n_users),
        }
        out[i * len(FEATURES):(i + 1) * len(FEATURES)] = [ranges.scale(f, raw[f]) for f in FEATURES]
    return out


def normalize_action(action, totals: GroupBudget):
    """Split each budget between the two groups in proportion to the raw action.

    ``action`` is ``(B1, P1, C1, B2, P2, C2)``. A resource whose two raw shares
    are both zero is split equally. The split ignores group membership, so a
    share granted to an empty group stays unused.
    """
    a = np.clip(np.asarray(action, dtype=float).reshape(2, 3), 0.0, 1.0)
    tot = totals.as_array()
    shares = np.empty((2, 3))
    for r in range(3):
        s = a[0, r] + a[1, r]
        if s <= 0:
            shares[:, r] = (0.5, 0.5)
        else:
            shares[0, r] = a[0, r] / s
            shares[1, r] = 1.0 - shares[0, r]
    amounts = shares * tot
    # make the pair sum to the total exactly in floating point
    amounts[1] = tot - amounts[0]
    return GroupBudget(*amounts[0]), GroupBudget(*amounts[1])
