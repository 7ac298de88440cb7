"""Inner convex solver: SLSQP with an independent KKT-residual certificate."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize, nnls

TOL_KKT = 1e-6
MAX_ITER = 150


@dataclass
class ConvexSubproblem:
    """``min f(x)`` subject to ``g(x) >= 0`` and ``lo <= x <= hi``.

    ``ineq`` returns a 1-D array of constraint values and ``ineq_jac`` its
    Jacobian (rows per constraint). Either may be None for a box-only problem.
    """

    objective: Callable
    gradient: Callable
    x0: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    ineq: Optional[Callable] = None
    ineq_jac: Optional[Callable] = None


@dataclass
class InnerResult:
    x: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    failed: bool


def kkt_residual(problem: ConvexSubproblem, x, active_tol=1e-7) -> float:
    """Scaled stationarity error with NNLS multipliers on active constraints, plus infeasibility."""
    x = np.asarray(x, dtype=float)
    grad = np.asarray(problem.gradient(x), dtype=float)
    lo = np.asarray(problem.lo, dtype=float)
    hi = np.asarray(problem.hi, dtype=float)
    n = x.size
    cols = []
    infeas = max(0.0, float(np.max(lo - x, initial=0.0)), float(np.max(x - hi, initial=0.0)))
    scale = np.maximum(1.0, np.abs(x))
    for i in range(n):
        e = np.zeros(n)
        if x[i] - lo[i] <= active_tol * scale[i]:
            e[i] = 1.0
            cols.append(e)
        elif hi[i] - x[i] <= active_tol * scale[i]:
            e[i] = -1.0
            cols.append(e)
    if problem.ineq is not None:
        g = np.atleast_1d(np.asarray(problem.ineq(x), dtype=float))
        jac = np.atleast_2d(np.asarray(problem.ineq_jac(x), dtype=float))
        infeas = max(infeas, float(np.max(-g, initial=0.0)))
        for i in np.flatnonzero(g <= active_tol * np.maximum(1.0, np.linalg.norm(jac, axis=1))):
            cols.append(jac[i])
    if cols:
        A = np.column_stack(cols)
        lam, _ = nnls(A, grad)
        stat = grad - A @ lam
    else:
        stat = grad
    return float(max(np.max(np.abs(stat)) / max(1.0, np.max(np.abs(grad))), infeas))


def inner_convex_solve(problem: ConvexSubproblem, tol=TOL_KKT, maxiter=MAX_ITER) -> InnerResult:
    lo = np.asarray(problem.lo, dtype=float)
    hi = np.asarray(problem.hi, dtype=float)
    x0 = np.clip(np.asarray(problem.x0, dtype=float), lo, hi)
    cons = []
    if problem.ineq is not None:
        cons.append({"type": "ineq", "fun": problem.ineq, "jac": problem.ineq_jac})
    iterations = 0
    x = x0
    residual = np.inf
    # a warm restart usually tightens SLSQP's stationarity when the first pass stops on ftol
    for _ in range(3):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = minimize(problem.objective, x, jac=problem.gradient, method="SLSQP",
                           bounds=list(zip(lo, hi)), constraints=cons,
                           options={"maxiter": maxiter - iterations, "ftol": 1e-15})
        iterations += int(res.nit)
        cand = np.clip(res.x, lo, hi)
        if np.all(np.isfinite(cand)):
            cand_res = kkt_residual(problem, cand)
            if cand_res < residual:
                x, residual = cand, cand_res
        if residual <= tol or iterations >= maxiter:
            break
    return InnerResult(x, float(problem.objective(x)), residual, iterations, residual > 100 * tol)
