"""Lightweight ARIMA(p, w, q) for user-status prediction.

Estimation is conditional least squares in closed form (Hannan-Rissanen):
a long autoregression supplies innovation estimates, then the differenced
series is regressed on its own lags and lagged innovations. Pre-sample
innovations are zero. No intercept term is fitted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

_COND_LIMIT = 1e12


@dataclass
class ArimaModel:
    p: int
    w: int
    q: int
    phi: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    residual_history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ar_only_fallback: bool = False

    def __post_init__(self):
        if self.w not in (1, 2):
            raise ValueError("differencing order must be 1 or 2")
        self.phi = np.asarray(self.phi, dtype=float).reshape(-1)
        self.theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if self.phi.size != self.p or self.theta.size != self.q:
            raise ValueError("coefficient vectors must match the declared orders")


def difference(series, w):
    """Apply ``(1 - L)^w``; output is ``w`` samples shorter."""
    return np.diff(np.asarray(series, dtype=float), n=w)


def _lag_matrix(x, lags, start):
    """Rows t = start..len(x)-1, columns x[t-1], ..., x[t-lags]."""
    n = len(x)
    cols = [x[start - k:n - k] for k in range(1, lags + 1)]
    return np.column_stack(cols) if cols else np.zeros((n - start, 0))


def _solve_normal(X, y):
    """Least squares via normal equations; None if they are singular."""
    if X.shape[1] == 0:
        return np.zeros(0)
    xtx = X.T @ X
    if not np.all(np.isfinite(xtx)) or np.linalg.cond(xtx) > _COND_LIMIT:
        return None
    return np.linalg.solve(xtx, X.T @ y)


def residuals(y, phi, theta):
    """One-step innovations of a zero-mean ARMA with zero pre-sample shocks."""
    y = np.asarray(y, dtype=float)
    num = np.concatenate([[1.0], -np.asarray(phi, dtype=float)])
    den = np.concatenate([[1.0], np.asarray(theta, dtype=float)])
    return lfilter(num, den, y)


def arima_fit(series, p=2, w=1, q=1) -> ArimaModel:
    series = np.asarray(series, dtype=float)
    if series.size <= p + q + w + 2:
        raise ValueError(f"series of length {series.size} too short for ARIMA({p},{w},{q})")
    if w not in (1, 2):
        raise ValueError("differencing order must be 1 or 2")
    y = difference(series, w)
    n = y.size

    fallback = q == 0
    phi = theta = None
    if q > 0:
        long_order = min(max(p + q, 4), max(1, n // 3))
        a = _solve_normal(_lag_matrix(y, long_order, long_order), y[long_order:])
        if a is not None:
            eps_hat = np.zeros(n)
            eps_hat[long_order:] = y[long_order:] - _lag_matrix(y, long_order, long_order) @ a
            start = max(p, q) + long_order
            if n - start > p + q:
                X = np.column_stack([_lag_matrix(y, p, start), _lag_matrix(eps_hat, q, start)])
                coef = _solve_normal(X, y[start:])
                if coef is not None:
                    phi, theta = coef[:p], np.clip(coef[p:], -0.99, 0.99)
        if phi is None:
            fallback = True

    if phi is None:
        X = _lag_matrix(y, p, p)
        coef = _solve_normal(X, y[p:])
        if coef is None:
            coef = np.linalg.lstsq(X, y[p:], rcond=None)[0] if p else np.zeros(0)
        phi, theta = coef, np.zeros(q)

    return ArimaModel(p, w, q, phi, theta, residuals(y, phi, theta), fallback and q > 0)


def arima_predict(model: ArimaModel, series) -> float:
    """One-step-ahead forecast in the original (undifferenced) scale."""
    series = np.asarray(series, dtype=float)
    if series.size < model.w + 1:
        raise ValueError("series too short to invert differencing")
    y = difference(series, model.w)
    eps = residuals(y, model.phi, model.theta)
    y_hat = 0.0
    for i in range(1, model.p + 1):
        if y.size - i >= 0:
            y_hat += model.phi[i - 1] * y[-i]
    for j in range(1, model.q + 1):
        if eps.size - j >= 0:
            y_hat += model.theta[j - 1] * eps[-j]
    if model.w == 1:
        return float(y_hat + series[-1])
    return float(y_hat + 2.0 * series[-1] - series[-2])


def accuracy_score(predicted, actual) -> float:
    """``max(0, 1 - MAE / range(actual))``; a zero range scores 1 only for exact predictions."""
    predicted = np.asarray(predicted, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if actual.size == 0:
        raise ValueError("empty held-out window")
    mae = float(np.mean(np.abs(predicted - actual)))
    spread = float(actual.max() - actual.min())
    if spread == 0:
        return 1.0 if mae == 0 else 0.0
    return max(0.0, 1.0 - mae / spread)


def prediction_accuracy(model: ArimaModel, history, heldout) -> float:
    """Rolling one-step forecasts over ``heldout`` given the preceding ``history``."""
    history = list(np.asarray(history, dtype=float))
    preds = []
    for value in np.asarray(heldout, dtype=float):
        preds.append(arima_predict(model, history))
        history.append(value)
    return accuracy_score(preds, heldout)
