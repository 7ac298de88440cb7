"""CSV exports. Floats are written with ``repr`` so a rerun is byte-identical."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_reward_curve(path, episodes):
    """One row per training step: (episode, step, reward, epsilon, mean_abs_td)."""
    rows = []
    step = 0
    for m in episodes:
        for r, eps, td in zip(m.rewards, m.epsilons, m.step_td):
            rows.append((m.episode, step, r, eps, td))
            step += 1
    return write_csv(path, ("episode", "step", "reward", "epsilon", "mean_abs_td"), rows)


def write_qoe_per_slot(path, episodes):
    rows = []
    for m in episodes:
        for t, (q, g) in enumerate(zip(m.slot_qoe, m.generic_qoe)):
            rows.append((m.scheme, m.episode, t, q, g))
    return write_csv(path, ("scheme", "episode", "slot", "mean_qoe", "generic_qoe"), rows)


def qoe_cdf(values):
    """Empirical CDF points (sorted value, fraction at or below)."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    return v, np.arange(1, v.size + 1) / v.size


def write_qoe_cdf(path, episodes_by_scheme):
    rows = []
    for scheme, episodes in episodes_by_scheme.items():
        values = np.concatenate([np.concatenate(m.user_qoe) for m in episodes]) if episodes else np.zeros(0)
        for x, f in zip(*qoe_cdf(values)):
            rows.append((scheme, x, f))
    return write_csv(path, ("scheme", "qoe", "cdf"), rows)


def write_sweep(path, table):
    return write_csv(path, ("axis", "value", "scheme", "mean_qoe", "std_qoe"),
                     [(r.axis, r.value, r.scheme, r.mean_qoe, r.std_qoe) for r in table])
