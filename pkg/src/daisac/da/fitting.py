"""QoE model fitting, update triggering and structure-based clustering."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..qoe import QoeModelSpec, QoeStructure, impact
from .dcor import QOS_FACTORS


@dataclass(frozen=True)
class DaWindow:
    """Aggregates over one large time window of a user's DA data."""

    index: int
    mean_latency_s: float
    mean_quality: float
    mean_behavior_dynamics: float
    mean_env_complexity: float
    mean_mos: float

    def __post_init__(self):
        if not 1.0 <= self.mean_mos <= 5.0:
            raise ValueError(f"MOS must lie in [1, 5], got {self.mean_mos}")


@dataclass(frozen=True)
class FittedQoe:
    structure: QoeStructure
    omega: tuple
    fit_mse: float
    last_update_window: int
    mse_by_structure: tuple = (np.nan, np.nan)
    stale: bool = False

    def spec(self, xi=2.0) -> QoeModelSpec:
        return QoeModelSpec(self.structure, self.omega, xi)


def _nnls2(X, y):
    """Exact non-negative least squares for two columns."""
    sol = np.linalg.lstsq(X, y, rcond=None)[0]
    if np.all(sol >= 0):
        return sol
    best, best_err = np.zeros(2), float(y @ y)
    for j in range(2):
        xj = X[:, j]
        denom = xj @ xj
        if denom <= 0:
            continue
        c = max(0.0, (xj @ y) / denom)
        cand = np.zeros(2)
        cand[j] = c
        err = float(np.sum((X @ cand - y) ** 2))
        if err < best_err:
            best, best_err = cand, err
    return best


def _design(windows, selected, h_max, e_max):
    lat = np.array([w.mean_latency_s for w in windows], dtype=float)
    q = np.array([w.mean_quality for w in windows], dtype=float)
    mos = np.array([w.mean_mos for w in windows], dtype=float)
    imp = impact(np.array([w.mean_behavior_dynamics for w in windows]),
                 np.array([w.mean_env_complexity for w in windows]), h_max, e_max)
    # an unselected factor keeps its level but loses its variation
    if "latency" not in selected:
        lat = np.full_like(lat, lat.mean())
    if "quality" not in selected:
        q = np.full_like(q, q.mean())
    return lat, q, mos, np.atleast_1d(imp)


def fit_qoe_model(windows, selected_factors=QOS_FACTORS, *, previous: FittedQoe | None = None,
                  h_max=1.0, e_max=1.0, min_windows=6) -> FittedQoe:
    """Fit both QoS families against MOS and keep the one with lower MSE.

    The fit is least squares in MOS space, with the impact factor applied to
    each window (``MOS ~ impact * QoS``). L1 weights are constrained to be
    non-negative; L2 has a single closed-form ratio weight. A rank-deficient
    design returns ``previous`` flagged stale (or raises when there is none).
    """
    if len(windows) < min_windows:
        raise ValueError(f"need at least {min_windows} windows, got {len(windows)}")
    lat, q, mos, imp = _design(windows, tuple(selected_factors), h_max, e_max)
    index = max(w.index for w in windows)

    X1 = np.column_stack([imp * q, -imp * lat])
    if np.linalg.matrix_rank(X1) < 2:
        if previous is None:
            raise np.linalg.LinAlgError("rank-deficient design and no previous model")
        return replace(previous, stale=True)
    w12 = _nnls2(X1, mos)
    mse1 = float(np.mean((X1 @ w12 - mos) ** 2))

    x2 = imp * q / lat
    w3 = max(0.0, float(x2 @ mos) / float(x2 @ x2))
    mse2 = float(np.mean((w3 * x2 - mos) ** 2))

    if mse2 < mse1:
        return FittedQoe(QoeStructure.L2, (0.0, 0.0, w3), mse2, index, (mse1, mse2))
    return FittedQoe(QoeStructure.L1, (float(w12[0]), float(w12[1]), 0.0), mse1, index, (mse1, mse2))


def predicted_mos(model: FittedQoe, windows, h_max=1.0, e_max=1.0):
    lat = np.array([w.mean_latency_s for w in windows], dtype=float)
    q = np.array([w.mean_quality for w in windows], dtype=float)
    imp = impact(np.array([w.mean_behavior_dynamics for w in windows]),
                 np.array([w.mean_env_complexity for w in windows]), h_max, e_max)
    w1, w2, w3 = model.omega
    if model.structure is QoeStructure.L2:
        return imp * w3 * q / lat
    return imp * (w1 * q - w2 * lat)


def update_trigger(recent_mos, model_predicted_mos, threshold=0.5, mos_floor=2.0) -> bool:
    """True when the model's mean absolute error or the mean MOS itself is unacceptable.

    Both comparisons are strict, so a tie does not trigger.
    """
    obs = np.asarray(recent_mos, dtype=float)
    pred = np.asarray(model_predicted_mos, dtype=float)
    if obs.size == 0:
        raise ValueError("no windows to compare")
    return bool(np.mean(np.abs(obs - pred)) > threshold or np.mean(obs) < mos_floor)


def cluster_users(models) -> tuple[list, list]:
    """Split users by fitted structure: (L1 users, L2 users), ids sorted."""
    g1 = sorted(uid for uid, m in models.items() if m.structure is QoeStructure.L1)
    g2 = sorted(uid for uid, m in models.items() if m.structure is QoeStructure.L2)
    return g1, g2
