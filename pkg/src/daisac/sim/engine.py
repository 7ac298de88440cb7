"""Slot-level simulation tying DA twins, the group agent and the group solvers together."""

from __future__ import annotations

import copy
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..da.collection import ATTRIBUTES, CollectionPolicy
from ..da.fitting import DaWindow
from ..qoe import GENERIC_MODEL, QoeStructure, ServiceDemand
from ..rl.state import GroupSummary, NormalizationRanges, normalize_action, observe_state
from ..rl.taylor_td import AgentConfig, TaylorTdAgent, select_action
from ..sca.solver import GroupBudget, GroupUser, SolveConfig, solve_group
from ..sensing import WaveformParams, crb_satisfied
from ..units import BITS_PER_MB
from .baselines import baseline_greedy, baseline_round_robin
from .config import ScenarioConfig
from .metrics import QOE_RANGE, ConservationMonitor, impact_of, user_latency, user_qoe
from .mos import expected_mos, mos_oracle
from .scenario import Scenario, generate_scenario
from .twin import UserTwin, fit_reference_model

SCHEMES = ("proposed", "round-robin", "greedy")
TRAIN_TRACE, WARMUP_TRACE, EVAL_TRACE, REFERENCE_TRACE = 0, 100_000, 200_000, 300_000


@dataclass
class SlotOutcome:
    qoe: np.ndarray
    reward: float
    alloc: np.ndarray
    feasible: np.ndarray
    overhead_hz: float
    overhead_bits: float
    qoe_generic: np.ndarray
    degraded: int = 0
    infeasible: int = 0
    state: np.ndarray | None = None
    action: np.ndarray | None = None


@dataclass
class EpisodeMetrics:
    scheme: str
    episode: int
    slot_qoe: list = field(default_factory=list)
    user_qoe: list = field(default_factory=list)
    generic_qoe: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    crb_ok: int = 0
    crb_total: int = 0
    utilization: list = field(default_factory=list)
    overhead_bits: float = 0.0
    mean_abs_td: list = field(default_factory=list)
    step_td: list = field(default_factory=list)
    epsilons: list = field(default_factory=list)
    degraded: int = 0
    infeasible: int = 0

    @property
    def crb_rate(self):
        return self.crb_ok / self.crb_total if self.crb_total else 1.0

    @property
    def mean_qoe(self):
        return float(np.mean(self.slot_qoe)) if self.slot_qoe else float("nan")


class Simulation:
    """One population (fixed by seed) with its DA twins, reference scorer and optional agent."""

    def __init__(self, config: ScenarioConfig, seed=None, agent: TaylorTdAgent | None = None,
                 monitor: ConservationMonitor | None = None):
        self.config = config
        self.seed = config.seed if seed is None else int(seed)
        self.scenario: Scenario = generate_scenario(config, self.seed)
        self.waveform = WaveformParams()
        self.thresholds = self.scenario.thresholds
        self.policy = CollectionPolicy(tuple(config.base_rate_hz), tuple(config.attenuation), config.overhead_bits)
        self.solve_config = SolveConfig(tol_outer=config.tol_outer, max_outer=config.max_outer,
                                        crb_path=config.crb_path, waveform=self.waveform)
        self.monitor = monitor if monitor is not None else ConservationMonitor()
        self.counters = defaultdict(lambda: {"da_reads": 0, "rl_reads": 0})
        self.rng = np.random.default_rng([self.seed, 3])
        self.explore_rng = np.random.default_rng([self.seed, 4])
        self.agent = agent
        self.ranges = self._ranges()
        self.twins = self._new_twins()
        self.reference = self._fit_reference()
        self.total_steps = config.n_episodes * config.n_slots
        self.step_count = 0

    # -- set-up ----------------------------------------------------------------------
    def _ranges(self):
        c = self.config
        r = dict(NormalizationRanges().ranges)
        r["behavior_dynamics"] = (0.0, self.scenario.h_max)
        r["file_size_mb"] = (0.0, float(c.file_size_mb[1]))
        r["sensing_gain_db"] = (-130.0, -30.0)
        r["comm_gain_db"] = (-120.0, -70.0)
        return NormalizationRanges(r)

    def _new_twins(self):
        c = self.config
        K = c.n_users
        return [UserTwin(k, self.policy, window_slots=c.window_slots, h_max=self.scenario.h_max, xi=c.xi,
                         dcc_threshold=c.dcc_threshold, refit_threshold=c.refit_threshold, mos_floor=c.mos_floor,
                         history_windows=c.history_windows, phase=(k + 0.5) / K) for k in range(K)]

    def _fit_reference(self):
        """Fit each user's scoring model from dense feedback under randomized allocations."""
        c = self.config
        rng = np.random.default_rng([self.seed, 5])
        K, W = c.n_users, c.window_slots
        totals = self.totals()
        rows = {k: [] for k in range(K)}
        n_eps = max(1, -(-c.reference_slots // c.n_slots))
        buf = {k: [] for k in range(K)}
        for e in range(n_eps):
            tr = self.scenario.episode(REFERENCE_TRACE + e)
            for t in range(c.n_slots):
                shares = np.exp(0.6 * rng.standard_normal((K, 3)))
                alloc = shares / shares.sum(axis=0) * totals
                users = self._users(tr, t, [GENERIC_MODEL] * K, true_context=True)
                lat = np.minimum(user_latency(users, alloc), c.latency_cap_s)
                q = users["quality"]
                for k in range(K):
                    # the scorer is fitted to the noise-free expected score
                    mos = expected_mos(self.scenario.users[k].principle, float(lat[k]), float(q[k]))
                    buf[k].append((lat[k], q[k], tr.behavior_dynamics[t, k], tr.env_complexity[t, k], mos))
                    if len(buf[k]) == W:
                        a = np.array(buf[k])
                        rows[k].append(DaWindow(len(rows[k]), *a.mean(axis=0)))
                        buf[k] = []
        models = []
        for k in range(K):
            models.append(fit_reference_model(rows[k], self.scenario.h_max, c.dcc_threshold).spec(c.xi))
        return models

    def totals(self):
        c = self.config
        return np.array([c.bandwidth_hz, c.power_w, c.compute_cycles_per_s], dtype=float)

    def _users(self, trace, t, specs, true_context=False, estimates=None):
        """Per-user arrays for QoE evaluation at slot ``t``."""
        c = self.config
        K = c.n_users
        if true_context or estimates is None:
            H, E = trace.behavior_dynamics[t], trace.env_complexity[t]
        else:
            H, E = estimates
        F = trace.file_size_mb[t] * BITS_PER_MB
        return {
            "file_size_bits": F,
            "cycles_per_bit": np.full(K, c.cycles_per_mb / BITS_PER_MB),
            "comm_gain": trace.comm_gain[t],
            "noise_psd": np.full(K, self.scenario.noise_psd),
            "sensing_gain": trace.sensing_gain[t],
            "impact": impact_of(H, E, self.scenario.h_max),
            "structure": np.array([s.structure.value for s in specs]),
            "omega": np.array([s.omega for s in specs], dtype=float),
            "xi": np.full(K, c.xi),
            "quality": np.asarray(F / BITS_PER_MB * c.xi / (1 + F / BITS_PER_MB * c.xi)),
        }

    # -- DA -------------------------------------------------------------------------------
    def _collect(self, trace, t):
        """Advance every twin's sampling; returns (sampled flags, overhead Hz per user, bits)."""
        c = self.config
        K = c.n_users
        sampled = []
        bits = np.zeros(K)
        for k, tw in enumerate(self.twins):
            taken = tw.collect(float(trace.behavior_dynamics[t, k]), float(trace.env_complexity[t, k]),
                               c.slot_duration_s)
            sampled.append(taken)
            bits[k] = sum(taken.values()) * c.overhead_bits
        hz = bits / c.slot_duration_s / c.overhead_spectral_eff
        return sampled, hz, float(bits.sum())

    def _feedback(self, sampled, lat, quality):
        # a request that outlives the session timeout is reported at the timeout
        lat = np.minimum(lat, self.config.latency_cap_s)
        for k, tw in enumerate(self.twins):
            got = bool(sampled[k]["performance"])
            mos = mos_oracle(self.scenario.users[k].principle, float(lat[k]), float(quality[k]), self.rng)
            tw.feedback(got, float(lat[k]), float(quality[k]), mos)

    # -- schemes ------------------------------------------------------------------------------
    def _score(self, trace, t, alloc):
        users = self._users(trace, t, self.reference, true_context=True)
        # the reference models were fitted on capped latencies; score them on the same domain
        qoe = user_qoe(users, alloc, clip=QOE_RANGE, latency_cap=self.config.latency_cap_s)
        generic = self._users(trace, t, [GENERIC_MODEL] * self.config.n_users, true_context=True)
        generic["impact"] = np.ones(self.config.n_users)
        return qoe, user_qoe(generic, alloc), user_latency(users, alloc), users["quality"]

    def group_summaries(self, trace, t, specs, estimates):
        K = self.config.n_users
        H, E = estimates
        groups = []
        for structure in (QoeStructure.L1, QoeStructure.L2):
            idx = [k for k in range(K) if specs[k].structure is structure]
            groups.append(GroupSummary.from_users(
                H[idx], E[idx], trace.sensing_gain[t, idx], trace.comm_gain[t, idx],
                trace.file_size_mb[t, idx], [specs[k].omega for k in idx], K))
        return groups

    def _proposed(self, trace, t, epsilon, overhead_hz):
        self.counters["proposed"]["da_reads"] += 1
        self.counters["proposed"]["rl_reads"] += 1
        K = self.config.n_users
        specs = [tw.spec() for tw in self.twins]
        H = np.array([tw.estimates["behavior"] for tw in self.twins])
        E = np.array([tw.estimates["environment"] for tw in self.twins])
        state = observe_state(self.group_summaries(trace, t, specs, (H, E)), self.ranges)
        action = select_action(self.agent, state, epsilon, self.explore_rng)
        members = [[k for k in range(K) if specs[k].structure is s] for s in (QoeStructure.L1, QoeStructure.L2)]
        budgets = list(normalize_action(action, GroupBudget(*self.totals())))
        # collection overhead comes out of each group's bandwidth, spilling to the other if needed
        over = [float(overhead_hz[m].sum()) for m in members]
        bw = [budgets[0].bandwidth_hz - over[0], budgets[1].bandwidth_hz - over[1]]
        for i in (0, 1):
            if bw[i] < 0:
                bw[1 - i] += bw[i]
                bw[i] = 0.0
        bw = [max(v, 0.0) for v in bw]
        budgets = [GroupBudget(bw[i], budgets[i].power_w, budgets[i].compute_cycles_per_s) for i in (0, 1)]
        impact = impact_of(H, E, self.scenario.h_max)
        alloc = np.zeros((K, 3))
        feasible = np.zeros(K, dtype=bool)
        degraded = infeasible = 0
        for i, structure in enumerate((QoeStructure.L1, QoeStructure.L2)):
            if not members[i]:
                continue
            gusers = [GroupUser(k, specs[k], ServiceDemand(float(trace.file_size_mb[t, k] * BITS_PER_MB),
                                                           self.config.cycles_per_mb / BITS_PER_MB),
                                float(trace.comm_gain[t, k]), float(trace.sensing_gain[t, k]), float(impact[k]),
                                self.scenario.noise_psd)
                      for k in members[i]]
            res = solve_group(budgets[i], gusers, structure, self.thresholds, self.solve_config)
            degraded += int(res.degraded)
            infeasible += int(not res.feasible)
            for k, a in zip(members[i], res.allocations):
                alloc[k] = (a.bandwidth_hz, a.power_w, a.compute_cycles_per_s)
                feasible[k] = res.feasible
        return alloc, feasible, state, action, degraded, infeasible

    def _greedy(self, trace, t, overhead_hz):
        self.counters["greedy"]["da_reads"] += 1
        specs = [tw.spec() for tw in self.twins]
        H = np.array([tw.estimates["behavior"] for tw in self.twins])
        E = np.array([tw.estimates["environment"] for tw in self.twins])
        users = self._users(trace, t, specs, estimates=(H, E))
        totals = self.totals()
        totals[0] -= float(overhead_hz.sum())
        alloc, feasible = baseline_greedy(users, np.maximum(totals, 0.0), self.thresholds, self.waveform,
                                          self.config.greedy_quanta)
        ok = crb_satisfied(alloc[:, 1], alloc[:, 0], trace.sensing_gain[t], self.thresholds, self.waveform)
        return alloc, feasible & ok

    def _round_robin(self, trace, t):
        alloc = baseline_round_robin(self.config.n_users, self.totals())
        ok = crb_satisfied(alloc[:, 1], alloc[:, 0], trace.sensing_gain[t], self.thresholds, self.waveform)
        return alloc, ok

    def run_slot(self, scheme, trace, t, epsilon=0.0) -> SlotOutcome:
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        uses_da = scheme != "round-robin"
        if uses_da:
            sampled, overhead_hz, bits = self._collect(trace, t)
        else:
            sampled, overhead_hz, bits = None, np.zeros(self.config.n_users), 0.0
        state = action = None
        degraded = infeasible = 0
        if scheme == "proposed":
            alloc, feasible, state, action, degraded, infeasible = self._proposed(trace, t, epsilon, overhead_hz)
        elif scheme == "greedy":
            alloc, feasible = self._greedy(trace, t, overhead_hz)
        else:
            alloc, feasible = self._round_robin(trace, t)
        self.monitor.check((scheme, self.seed, t), alloc, self.totals(), float(overhead_hz.sum()), feasible,
                           trace.sensing_gain[t], self.thresholds, self.waveform)
        qoe, generic, lat, quality = self._score(trace, t, alloc)
        if uses_da:
            self._feedback(sampled, lat, quality)
        return SlotOutcome(qoe, float(np.mean(qoe)), alloc, feasible, float(overhead_hz.sum()), bits, generic,
                           degraded, infeasible, state, action)

    # -- episodes -----------------------------------------------------------------------------
    def run_episode(self, scheme, trace_index, learn=False, fixed_epsilon=None, episode=0) -> EpisodeMetrics:
        c = self.config
        trace = self.scenario.episode(trace_index)
        m = EpisodeMetrics(scheme, episode)
        pending = None
        for t in range(c.n_slots):
            if scheme == "proposed":
                eps = fixed_epsilon if fixed_epsilon is not None else self.agent.epsilon(
                    self.step_count / max(self.total_steps - 1, 1))
            else:
                eps = 0.0
            out = self.run_slot(scheme, trace, t, eps)
            td = float("nan")
            if learn and scheme == "proposed":
                if pending is not None:
                    self.agent.remember(pending.state, pending.action, pending.reward, out.state, False)
                    td = self._learn(m)
                pending = out
                self.step_count += 1
            self._record(m, out, eps, trace.sensing_gain[t])
            m.step_td.append(td)
        if learn and pending is not None:
            self.agent.remember(pending.state, pending.action, pending.reward, pending.state, True)
            td = self._learn(m)
            if np.isfinite(td):
                m.step_td[-1] = td
        return m

    def _learn(self, m):
        """Run this step's updates; returns their mean |TD error| (nan if none ran)."""
        if len(self.agent.memory) < min(self.config.batch_size, self.agent.config.batch_size):
            return float("nan")
        tds = []
        for _ in range(self.config.updates_per_step):
            stats = self.agent.learn()
            if stats is not None and np.isfinite(stats.mean_abs_td):
                tds.append(stats.mean_abs_td)
        m.mean_abs_td.extend(tds)
        return float(np.mean(tds)) if tds else float("nan")

    def _record(self, m, out: SlotOutcome, eps, sensing_gain):
        m.slot_qoe.append(float(np.mean(out.qoe)))
        m.user_qoe.append(out.qoe.copy())
        m.generic_qoe.append(float(np.mean(out.qoe_generic)))
        m.rewards.append(out.reward)
        m.epsilons.append(eps)
        m.crb_ok += int(np.sum(crb_satisfied(out.alloc[:, 1], out.alloc[:, 0],
                                             sensing_gain, self.thresholds, self.waveform)))
        m.crb_total += len(out.qoe)
        m.utilization.append((out.alloc.sum(axis=0) + np.array([out.overhead_hz, 0, 0])) / self.totals())
        m.overhead_bits += out.overhead_bits
        m.degraded += out.degraded
        m.infeasible += out.infeasible


def agent_config(config: ScenarioConfig) -> AgentConfig:
    return AgentConfig(hidden=tuple(int(h) for h in config.hidden), gamma=config.gamma, lr=config.lr,
                       actor_lr=config.actor_lr, center_rewards=config.center_rewards,
                       optimizer=config.optimizer, epsilon_start=config.epsilon_start,
                       epsilon_final=config.epsilon_final, sync_period=config.sync_period,
                       memory_size=config.memory_size, batch_size=config.batch_size)


def clone_twins(twins):
    return copy.deepcopy(twins)
