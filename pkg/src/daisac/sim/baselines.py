"""Reference schemes: equal-split round robin and a marginal-gain greedy allocator."""

from __future__ import annotations

import numpy as np

from ..sensing import sensing_feasibility
from .metrics import user_qoe


def baseline_round_robin(n_users, totals):
    """Equal split of every budget; reads nothing about users. Returns (K, 3) of (B, P, C)."""
    if n_users < 1:
        raise ValueError("need at least one user")
    return np.tile(np.asarray(totals, dtype=float) / n_users, (n_users, 1))


def baseline_greedy(users, totals, thresholds, waveform, quanta_per_user=5):
    """Sensing minima first, then repeated grants of a fixed quantum to the best marginal QoE.

    ``users`` is a dict of per-user arrays (see ``metrics.user_qoe``) plus
    ``sensing_gain``. Returns the (K, 3) allocation and a per-user flag telling
    whether the sensing minima could be honoured.
    """
    totals = np.asarray(totals, dtype=float)
    K = len(users["file_size_bits"])
    alloc = np.zeros((K, 3))
    minima = sensing_feasibility(users["sensing_gain"], thresholds, waveform)
    p_min = np.atleast_1d(minima.p_min_w).astype(float)
    pb_min = np.atleast_1d(minima.pb_product_min).astype(float)
    feasible = np.ones(K, dtype=bool)
    if p_min.sum() <= totals[1]:
        alloc[:, 1] = p_min
        b_need = np.where(pb_min > 0, pb_min / np.maximum(p_min, 1e-300), 0.0)
        if b_need.sum() <= totals[0]:
            alloc[:, 0] = b_need
        else:
            feasible[:] = False
    else:
        feasible[:] = False
    remaining = totals - alloc.sum(axis=0)
    n_quanta = quanta_per_user * K
    quantum = np.maximum(remaining, 0.0) / n_quanta
    # a first quantum of each resource for everyone keeps every latency finite
    for r in range(3):
        take = min(quantum[r] * K, remaining[r])
        alloc[:, r] += take / K
        remaining[r] -= take
    current = user_qoe(users, alloc)
    while True:
        open_r = [r for r in range(3) if remaining[r] > 1e-12 * totals[r]]
        if not open_r:
            break
        best_gain, best = -np.inf, None
        for r in open_r:
            grant = min(quantum[r], remaining[r])
            trial = alloc.copy()
            trial[:, r] += grant
            gain = user_qoe(users, trial) - current
            k = int(np.argmax(gain))           # lowest index wins ties
            if gain[k] > best_gain:
                best_gain, best = gain[k], (k, r, grant)
        k, r, grant = best
        alloc[k, r] += grant
        remaining[r] -= grant
        current[k] = user_qoe({key: v[k:k + 1] for key, v in users.items()}, alloc[k:k + 1])[0]
    return alloc, feasible
