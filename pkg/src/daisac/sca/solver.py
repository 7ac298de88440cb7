"""Group-level resource allocation by successive convex approximation.

Decision variables are budget shares ``b, p, c`` in [0, 1] per user. Each
outer iteration replaces ``1/R`` by its affine expansion at the current point
(and, for ratio objectives, applies the quadratic transform), solves the
resulting convex subproblem with a proximal term, then moves toward the
subproblem solution with a backtracking step on the true objective. Only
steps that keep the true constraints and do not lower the true objective are
taken, so the true objective never decreases across iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..qoe import Allocation, QoeModelSpec, QoeStructure, ServiceDemand, content_quality, transmission_rate
from ..sensing import CrbThresholds, WaveformParams, crb_satisfied, sensing_feasibility
from ..units import dbm_per_hz_to_w_per_hz
from .inner import ConvexSubproblem, inner_convex_solve
from .surrogates import McCormickBounds, linearize_inv_rate, mccormick_envelope

NOISE_PSD = dbm_per_hz_to_w_per_hz(-174.0)


@dataclass(frozen=True)
class GroupBudget:
    bandwidth_hz: float
    power_w: float
    compute_cycles_per_s: float

    def __post_init__(self):
        if min(self.bandwidth_hz, self.power_w, self.compute_cycles_per_s) < 0:
            raise ValueError("budgets must be non-negative")

    def scaled(self, s):
        return GroupBudget(self.bandwidth_hz * s, self.power_w * s, self.compute_cycles_per_s * s)

    def as_array(self):
        return np.array([self.bandwidth_hz, self.power_w, self.compute_cycles_per_s])


@dataclass(frozen=True)
class GroupUser:
    """Everything the solver needs about one user in a group.

    ``comm_gain`` is the communication power gain ``|h|^2``; ``sensing_gain``
    is the (amplitude) sensing gain whose square enters the CRBs.
    """

    user_id: int
    model: QoeModelSpec
    demand: ServiceDemand
    comm_gain: float
    sensing_gain: float
    impact: float = 1.0
    noise_psd: float = NOISE_PSD


@dataclass
class SolveConfig:
    tol_outer: float = 1e-4
    max_outer: int = 20
    crb_path: str = "direct"          # or "mccormick"
    box_spread: float = 0.5
    prox_init: float = 1.0
    prox_min: float = 1e-6
    prox_max: float = 1e8
    backtracks: int = 8
    share_floor: float = 1e-9
    inner_tol: float = 1e-6
    inner_maxiter: int = 150
    waveform: WaveformParams = field(default_factory=WaveformParams)

    def __post_init__(self):
        if self.crb_path not in ("direct", "mccormick"):
            raise ValueError(f"unknown CRB path {self.crb_path!r}")


@dataclass
class LinearizationPoint:
    bandwidth_hz: np.ndarray
    power_w: np.ndarray
    compute_cycles_per_s: np.ndarray
    rate_bps: np.ndarray
    phi: np.ndarray


@dataclass
class FeasibilityReport:
    feasible: bool
    p_min_w: np.ndarray
    pb_product_min: np.ndarray
    power_w: np.ndarray               # power split used to certify the bandwidth side
    bandwidth_min_hz: np.ndarray
    binding_users: list


@dataclass
class SolveResult:
    user_ids: list
    allocations: list
    objective_value: float
    outer_iterations: int
    kkt_residual: float
    feasible: bool
    degraded: bool = False
    objective_trace: list = field(default_factory=list)
    surrogate_trace: list = field(default_factory=list)

    def totals(self):
        if not self.allocations:
            return np.zeros(3)
        return np.array([[a.bandwidth_hz, a.power_w, a.compute_cycles_per_s] for a in self.allocations]).sum(axis=0)


def _water_fill_power(p_min, weights, total):
    """Minimize ``sum(w_k / p_k)`` over ``sum p = total, p >= p_min``: ``p_k = max(m_k, sqrt(w_k) t)``."""
    root = np.sqrt(np.maximum(weights, 0.0))
    if total <= p_min.sum() or not np.any(root > 0):
        return _project_shares(p_min, total)
    lo, hi = 0.0, total / root[root > 0].min()
    for _ in range(200):
        t = 0.5 * (lo + hi)
        if np.maximum(p_min, root * t).sum() > total:
            hi = t
        else:
            lo = t
    p = np.maximum(p_min, root * lo)
    # hand the bisection crumbs to the unconstrained users
    free = root * lo > p_min
    if np.any(free):
        p[free] += (total - p.sum()) * root[free] / root[free].sum()
    return p


def _project_shares(minima, total=1.0):
    """Equal split of ``total`` lifted to per-user minima; slack is taken from the others."""
    minima = np.asarray(minima, dtype=float)
    n = minima.size
    if n == 0:
        return minima
    share = total / n
    room = np.maximum(share - minima, 0.0)
    slack = total - minima.sum()
    if room.sum() <= 0:
        return minima + max(slack, 0.0) / n
    return minima + max(slack, 0.0) * room / room.sum()


def feasibility_check(budget: GroupBudget, users, thresholds: CrbThresholds,
                      waveform: WaveformParams = WaveformParams()) -> FeasibilityReport:
    """Do the three CRB ceilings fit inside the group's power and bandwidth budgets?

    Power: ``sum p_min <= P_tot``. Bandwidth: with the power split that
    minimises the total bandwidth ``sum pb_min_k / p_k`` (water-filling above the
    power minima), that total must not exceed ``B_tot``. Ties are feasible.
    """
    n = len(users)
    if n == 0:
        z = np.zeros(0)
        return FeasibilityReport(True, z, z, z, z, [])
    minima = sensing_feasibility(np.array([u.sensing_gain for u in users], dtype=float), thresholds, waveform)
    p_min = np.atleast_1d(np.asarray(minima.p_min_w, dtype=float))
    pb_min = np.atleast_1d(np.asarray(minima.pb_product_min, dtype=float))
    tol = 1e-12
    if p_min.sum() > budget.power_w * (1 + tol):
        binding = [users[k].user_id for k in np.argsort(-p_min) if p_min[k] > budget.power_w / n]
        return FeasibilityReport(False, p_min, pb_min, p_min.copy(), np.full(n, np.inf), binding)
    power = _water_fill_power(p_min, pb_min, budget.power_w)
    with np.errstate(divide="ignore", invalid="ignore"):
        b_min = np.where(pb_min > 0, pb_min / power, 0.0)
    feasible = bool(np.all(np.isfinite(b_min)) and b_min.sum() <= budget.bandwidth_hz * (1 + tol))
    binding = [users[k].user_id for k in range(n)
               if p_min[k] > budget.power_w / n or b_min[k] > budget.bandwidth_hz / n]
    return FeasibilityReport(feasible, p_min, pb_min, power, b_min, binding)


class _Group:
    """Vectorized per-user constants in share units."""

    def __init__(self, budget: GroupBudget, users, report: FeasibilityReport, floor):
        self.n = len(users)
        self.budget = budget
        self.F = np.array([u.demand.file_size_bits for u in users], dtype=float)
        self.mu = np.array([u.demand.computing_density_cycles_per_bit for u in users], dtype=float)
        self.snr = np.array([u.comm_gain / u.noise_psd for u in users], dtype=float)
        self.impact = np.array([u.impact for u in users], dtype=float)
        self.omega = np.array([u.model.omega for u in users], dtype=float)
        self.q = np.array([content_quality(u.demand.file_size_mb, u.model.xi) for u in users], dtype=float)
        self.sensing_gain = np.array([u.sensing_gain for u in users], dtype=float)
        self.p_min = np.maximum(report.p_min_w / budget.power_w, floor)
        self.pb_min = report.pb_product_min / (budget.power_w * budget.bandwidth_hz)
        self.floor = floor

    def rate(self, b, p):
        return transmission_rate(b * self.budget.bandwidth_hz, p * self.budget.power_w, self.snr, 1.0)

    def latency(self, b, p, c):
        with np.errstate(divide="ignore"):
            return self.mu * self.F / (c * self.budget.compute_cycles_per_s) + self.F / self.rate(b, p)


def _true_objective(g: _Group, structure, b, p, c):
    lat = g.latency(b, p, c)
    if structure is QoeStructure.L2:
        return float(np.mean(g.impact * g.omega[:, 2] * g.q / lat))
    return float(np.mean(g.impact * (g.omega[:, 0] * g.q - g.omega[:, 1] * lat)))


def _reduce_to_budget(x, minima):
    excess = x.sum() - 1.0
    if excess <= 0:
        return x
    room = x - minima
    if room.sum() <= 0:
        return x
    return minima + room * max(0.0, 1.0 - excess / room.sum())


def _repair(g: _Group, b, p, c):
    """Push a nearly feasible share vector back onto the true constraint set."""
    p = _reduce_to_budget(np.maximum(p, g.p_min), g.p_min)
    b_min = np.maximum(g.pb_min / p * (1 + 1e-12), g.floor)
    b = _reduce_to_budget(np.maximum(b, b_min), b_min)
    c = _reduce_to_budget(np.maximum(c, g.floor), np.full(g.n, g.floor))
    return b, p, c


def _truly_feasible(g: _Group, b, p, c, thresholds, waveform, rtol=1e-9):
    if b.sum() > 1 + rtol or p.sum() > 1 + rtol or c.sum() > 1 + rtol:
        return False
    if np.any(b <= 0) or np.any(p <= 0) or np.any(c <= 0):
        return False
    ok = crb_satisfied(p * g.budget.power_w, b * g.budget.bandwidth_hz, g.sensing_gain,
                       thresholds, waveform, rtol=rtol)
    return bool(np.all(ok))


def _initial_point(g: _Group, report: FeasibilityReport):
    p = _project_shares(g.p_min)
    b_min = g.pb_min / p
    if b_min.sum() > 1.0:
        p = report.power_w / g.budget.power_w
        b_min = g.pb_min / p
    b = _project_shares(np.maximum(b_min, g.floor))
    c = np.full(g.n, 1.0 / g.n)
    return _repair(g, b, p, c)


def _inv_rate_curvature(B, P, R, snr, B_tot, P_tot):
    """Diagonal second derivatives of ``1/R`` in share units, stacked as (bandwidth, power).

    Used to weight the proximal term so each step is scaled like a diagonal Newton step.
    """
    x = snr * P / B
    ln2 = math.log(2.0)
    r_b = np.log2(1.0 + x) - x / ((1.0 + x) * ln2)
    r_p = snr / ((1.0 + x) * ln2)
    r_bb = -x * x / (B * (1.0 + x) ** 2 * ln2)
    r_pp = -snr * snr / (B * (1.0 + x) ** 2 * ln2)
    h_b = (2.0 * r_b ** 2 / R ** 3 - r_bb / R ** 2) * B_tot ** 2
    h_p = (2.0 * r_p ** 2 / R ** 3 - r_pp / R ** 2) * P_tot ** 2
    return np.concatenate([h_b, h_p])


def _subproblem(g: _Group, structure, b, p, c, tau, config: SolveConfig):
    """Convex surrogate (to minimise) around shares ``(b, p, c)``; returns problem and phi."""
    n = g.n
    B_tot, P_tot, C_tot = g.budget.as_array()
    rate = g.rate(b, p)
    coeffs = np.array([linearize_inv_rate(b[k] * B_tot, p[k] * P_tot, rate[k], g.snr[k]) for k in range(n)])
    lat = g.latency(b, p, c)
    if structure is QoeStructure.L2:
        gamma = g.impact * g.omega[:, 2] * g.q
        phi = np.sqrt(gamma) / lat
        weight = phi ** 2
    else:
        phi = np.zeros(n)
        weight = g.impact * g.omega[:, 1]
    scale = float(np.mean(weight * lat))
    if not scale > 0:
        scale = 1.0
    w = weight / (n * scale)
    kb = w * g.F * coeffs[:, 1] * B_tot
    kp = w * g.F * coeffs[:, 2] * P_tot
    kc = w * g.mu * g.F / C_tot
    k0 = w * g.F * coeffs[:, 0]
    x_t = np.concatenate([b, p, c])
    curv = np.concatenate([np.tile(w * g.F, 2) * _inv_rate_curvature(b * B_tot, p * P_tot, rate, g.snr, B_tot, P_tot),
                           2.0 * kc / c ** 3]) + 1e-8
    use_mc = config.crb_path == "mccormick"
    nz = 4 * n if use_mc else 3 * n

    def surrogate(z):
        bb, pp, cc = z[:n], z[n:2 * n], z[2 * n:3 * n]
        return float(np.sum(k0 + kb * bb + kp * pp + kc / cc))

    def objective(z):
        d = z[:3 * n] - x_t
        return surrogate(z) + 0.5 * tau * float(curv @ (d * d))

    def gradient(z):
        grad = np.zeros(nz)
        grad[:n] = kb
        grad[n:2 * n] = kp
        grad[2 * n:3 * n] = -kc / z[2 * n:3 * n] ** 2
        grad[:3 * n] += tau * curv * (z[:3 * n] - x_t)
        return grad

    floor = config.share_floor
    lo = np.concatenate([np.full(n, floor), g.p_min, np.full(n, floor)])
    hi = np.ones(3 * n)
    crb_rows = np.flatnonzero(g.pb_min > 0)

    if use_mc:
        box = McCormickBounds.around(p, b, config.box_spread)
        lo[:n] = np.maximum(lo[:n], box.b_lo)
        hi[:n] = np.maximum(box.b_hi, lo[:n])
        lo[n:2 * n] = np.maximum(lo[n:2 * n], box.p_lo)
        hi[n:2 * n] = np.maximum(box.p_hi, lo[n:2 * n])
        box = McCormickBounds(lo[n:2 * n], hi[n:2 * n], lo[:n], hi[:n])
        lo = np.concatenate([lo, g.pb_min])
        hi = np.concatenate([hi, np.ones(n)])
        z0 = np.concatenate([x_t, p * b])

        def ineq(z):
            env = mccormick_envelope(box.as_tuple(), z[n:2 * n], z[:n], z[3 * n:])
            return np.concatenate([[1 - z[:n].sum(), 1 - z[n:2 * n].sum(), 1 - z[2 * n:3 * n].sum()],
                                   env.ravel()])

        def ineq_jac(z):
            J = np.zeros((3 + 4 * n, nz))
            J[0, :n] = J[1, n:2 * n] = J[2, 2 * n:3 * n] = -1.0
            ar = np.arange(n)
            # row blocks follow mccormick_envelope's ordering; columns b, p, Y
            J[3 + ar, ar] = -box.p_lo
            J[3 + ar, n + ar] = -box.b_lo
            J[3 + ar, 3 * n + ar] = 1.0
            J[3 + n + ar, n + ar] = box.b_hi
            J[3 + n + ar, 3 * n + ar] = -1.0
            J[3 + 2 * n + ar, ar] = box.p_hi
            J[3 + 2 * n + ar, 3 * n + ar] = -1.0
            J[3 + 3 * n + ar, 3 * n + ar] = 1.0
            return J
    else:
        z0 = x_t
        log_pb = np.log(np.where(g.pb_min > 0, g.pb_min, 1.0))

        def ineq(z):
            bb, pp = z[:n], z[n:2 * n]
            sums = [1 - bb.sum(), 1 - pp.sum(), 1 - z[2 * n:].sum()]
            crb = np.log(bb[crb_rows]) + np.log(pp[crb_rows]) - log_pb[crb_rows]
            return np.concatenate([sums, crb])

        def ineq_jac(z):
            J = np.zeros((3 + crb_rows.size, nz))
            J[0, :n] = J[1, n:2 * n] = J[2, 2 * n:] = -1.0
            for r, k in enumerate(crb_rows):
                J[3 + r, k] = 1.0 / z[k]
                J[3 + r, n + k] = 1.0 / z[n + k]
            return J

    problem = ConvexSubproblem(objective, gradient, z0, lo, hi, ineq, ineq_jac)
    prox = lambda z: 0.5 * tau * float(curv @ ((z[:3 * n] - x_t) ** 2))
    return problem, surrogate, prox, phi


def solve_group(budget: GroupBudget, users, structure, thresholds: CrbThresholds,
                config: SolveConfig | None = None) -> SolveResult:
    """Shared SCA loop; ``structure`` selects the linear (L1) or ratio (L2) objective."""
    config = config or SolveConfig()
    structure = QoeStructure(structure)
    ids = [u.user_id for u in users]
    if not users:
        return SolveResult([], [], 0.0, 0, 0.0, True)
    report = feasibility_check(budget, users, thresholds, config.waveform)
    n = len(users)
    if not report.feasible or min(budget.bandwidth_hz, budget.power_w, budget.compute_cycles_per_s) <= 0:
        tot = budget.as_array()
        b = report.bandwidth_min_hz if np.all(np.isfinite(report.bandwidth_min_hz)) else np.zeros(n)
        p = report.p_min_w * min(1.0, tot[1] / max(report.p_min_w.sum(), 1e-300))
        b = b * min(1.0, tot[0] / max(b.sum(), 1e-300))
        allocs = [Allocation(float(b[k]), float(p[k]), tot[2] / n) for k in range(n)]
        return SolveResult(ids, allocs, -math.inf if structure is QoeStructure.L1 else 0.0, 0, math.inf, False)

    g = _Group(budget, users, report, config.share_floor)
    b, p, c = _initial_point(g, report)
    f = _true_objective(g, structure, b, p, c)
    trace = [f]
    surrogate_trace = []
    tau = config.prox_init
    kkt = 0.0
    degraded = False
    iterations = 0
    for it in range(config.max_outer):
        iterations = it + 1
        problem, surrogate, prox, _ = _subproblem(g, structure, b, p, c, tau, config)
        inner = inner_convex_solve(problem, config.inner_tol, config.inner_maxiter)
        kkt = inner.kkt_residual
        if inner.failed:
            degraded = True
            break
        z = inner.x
        # (value at the expansion point, value at the subproblem solution), both to be minimised
        surrogate_trace.append((surrogate(problem.x0), surrogate(z) + prox(z)))
        d = (z[:n] - b, z[n:2 * n] - p, z[2 * n:3 * n] - c)
        step, accepted = 1.0, None
        for _ in range(config.backtracks + 1):
            cand = _repair(g, b + step * d[0], p + step * d[1], c + step * d[2])
            if _truly_feasible(g, *cand, thresholds, config.waveform):
                f_new = _true_objective(g, structure, *cand)
                if f_new >= f:
                    accepted = cand
                    break
            step *= 0.5
        if accepted is None:
            tau = min(tau * 4.0, config.prox_max)
            trace.append(f)
            if tau >= config.prox_max:
                break
            continue
        tau = max(tau * 0.5, config.prox_min) if step == 1.0 else min(tau * 2.0, config.prox_max)
        b, p, c = accepted
        change = abs(f_new - f) / max(abs(f), 1e-12)
        f = f_new
        trace.append(f)
        if change < config.tol_outer and step == 1.0:
            break

    B_tot, P_tot, C_tot = budget.as_array()
    allocs = [Allocation(float(b[k] * B_tot), float(p[k] * P_tot), float(c[k] * C_tot)) for k in range(n)]
    return SolveResult(ids, allocs, f, iterations, kkt, True, degraded, trace, surrogate_trace)


def solve_group_sp1(budget, users_l1, thresholds, config=None) -> SolveResult:
    return solve_group(budget, users_l1, QoeStructure.L1, thresholds, config)


def solve_group_sp2(budget, users_l2, thresholds, config=None) -> SolveResult:
    return solve_group(budget, users_l2, QoeStructure.L2, thresholds, config)


def linearization_point(budget: GroupBudget, users, result: SolveResult) -> LinearizationPoint:
    """Expansion point (with rates and quadratic-transform multipliers) at a solver output."""
    B = np.array([a.bandwidth_hz for a in result.allocations])
    P = np.array([a.power_w for a in result.allocations])
    C = np.array([a.compute_cycles_per_s for a in result.allocations])
    snr = np.array([u.comm_gain / u.noise_psd for u in users])
    R = transmission_rate(B, P, snr, 1.0)
    F = np.array([u.demand.file_size_bits for u in users])
    mu = np.array([u.demand.computing_density_cycles_per_bit for u in users])
    gamma = np.array([u.impact * u.model.omega[2] * content_quality(u.demand.file_size_mb, u.model.xi)
                      for u in users])
    lat = mu * F / C + F / R
    return LinearizationPoint(B, P, C, np.asarray(R), np.sqrt(gamma) / lat)
