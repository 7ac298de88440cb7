"""Training runs, scheme evaluation and parameter sweeps."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..rl.checkpoint import save_checkpoint
from ..rl.taylor_td import TaylorTdAgent
from .config import ScenarioConfig, parse_quantity
from .engine import EVAL_TRACE, SCHEMES, TRAIN_TRACE, WARMUP_TRACE, EpisodeMetrics, Simulation, agent_config
from .metrics import ConservationMonitor
from .outputs import write_qoe_cdf, write_qoe_per_slot, write_reward_curve, write_sweep

AXES = ("users", "bandwidth", "compute", "alpha1", "alpha2", "alpha3", "nu1", "nu2", "nu3")


@dataclass
class TrainingResult:
    agent: TaylorTdAgent
    sim: Simulation
    episodes: list

    @property
    def rewards(self):
        return np.concatenate([m.rewards for m in self.episodes])

    @property
    def episode_qoe(self):
        return np.array([m.mean_qoe for m in self.episodes])

    def phase_means(self, fraction=0.2):
        """Mean reward over the first and the last ``fraction`` of all steps."""
        r = self.rewards
        k = max(1, int(round(fraction * r.size)))
        return float(r[:k].mean()), float(r[-k:].mean())


def run_training(config: ScenarioConfig, seed=None, out_dir=None, monitor=None, log=None) -> TrainingResult:
    """Train the group agent online for ``config.n_episodes`` episodes on the training traces."""
    seed = config.seed if seed is None else int(seed)
    agent = TaylorTdAgent(agent_config(config), seed=seed)
    sim = Simulation(config, seed, agent, monitor)
    out = Path(out_dir) if out_dir is not None else None
    episodes = []
    for e in range(config.n_episodes):
        m = sim.run_episode("proposed", TRAIN_TRACE + e, learn=True, episode=e)
        episodes.append(m)
        if log is not None:
            log(f"episode {e} mean_qoe {m.mean_qoe:.4f}")
        if out is not None and config.checkpoint_every and (e + 1) % config.checkpoint_every == 0:
            out.mkdir(parents=True, exist_ok=True)
            save_checkpoint(out / f"agent_ep{e + 1:04d}.ckpt", agent)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_reward_curve(out / "reward_curve.csv", episodes)
        save_checkpoint(out / "agent.ckpt", agent)
    return TrainingResult(agent, sim, episodes)


def evaluate(sim: Simulation, schemes=SCHEMES, n_episodes=None) -> dict:
    """Greedy-policy evaluation on held-out traces.

    Every scheme starts from the same DA twins and feedback noise stream, so
    the comparison isolates the allocation scheme. The simulation's twins
    are left as they were.
    """
    n = sim.config.eval_episodes if n_episodes is None else int(n_episodes)
    twins0, rng0 = sim.twins, sim.rng
    results = {}
    try:
        for scheme in schemes:
            if scheme == "proposed" and sim.agent is None:
                raise ValueError("the proposed scheme needs an agent")
            sim.twins, sim.rng = copy.deepcopy(twins0), copy.deepcopy(rng0)
            results[scheme] = [sim.run_episode(scheme, EVAL_TRACE + i, fixed_epsilon=0.0, episode=i)
                               for i in range(n)]
    finally:
        sim.twins, sim.rng = twins0, rng0
    return results


def mean_qoe(episodes) -> float:
    return float(np.mean([m.mean_qoe for m in episodes]))


def warm_up(sim: Simulation, n_episodes=2):
    """Let the DA twins learn their users under the greedy scheme (no agent involved)."""
    for w in range(n_episodes):
        sim.run_episode("greedy", WARMUP_TRACE + w, episode=w)


def apply_axis(config: ScenarioConfig, axis, value) -> ScenarioConfig:
    if axis not in AXES:
        raise ValueError(f"unknown sweep axis {axis!r}")
    v = parse_quantity(value) if isinstance(value, str) else float(value)
    if axis == "users":
        return config.replace(n_users=int(v))
    if axis == "bandwidth":
        return config.replace(bandwidth_hz=v)
    if axis == "compute":
        return config.replace(compute_cycles_per_s=v)
    i = int(axis[-1]) - 1
    name = "alpha" if axis.startswith("alpha") else "attenuation"
    vals = list(getattr(config, name))
    vals[i] = v
    return config.replace(**{name: tuple(vals)})


@dataclass
class SweepRow:
    axis: str
    value: float
    scheme: str
    mean_qoe: float
    std_qoe: float
    episode_qoe: list = field(default_factory=list)


def sweep(config: ScenarioConfig, axis, values, seeds=(0,), agents=None, retrain=False, schemes=SCHEMES,
          n_episodes=None, warmup_episodes=2, monitor=None, out_dir=None) -> list:
    """Mean QoE per (value, scheme); the spread is over every evaluated (seed, episode) pair.

    ``agents`` maps seed to a trained agent. Missing agents are trained once
    on the base config, or per value when ``retrain`` is set.
    """
    agents = dict(agents or {})
    monitor = monitor if monitor is not None else ConservationMonitor()
    needs_agent = "proposed" in schemes
    if needs_agent and not retrain:
        for s in seeds:
            if s not in agents:
                agents[s] = run_training(config, s, monitor=monitor).agent
    table = []
    for value in values:
        cfg = apply_axis(config, axis, value)
        per_scheme = {s: [] for s in schemes}
        for seed in seeds:
            agent = None
            if needs_agent:
                agent = run_training(cfg, seed, monitor=monitor).agent if retrain else agents[seed]
            sim = Simulation(cfg, seed, agent, monitor)
            warm_up(sim, warmup_episodes)
            for scheme, eps in evaluate(sim, schemes, n_episodes).items():
                per_scheme[scheme].extend(m.mean_qoe for m in eps)
        v = parse_quantity(value) if isinstance(value, str) else float(value)
        for scheme in schemes:
            q = np.array(per_scheme[scheme])
            table.append(SweepRow(axis, v, scheme, float(q.mean()), float(q.std(ddof=1)) if q.size > 1 else 0.0,
                                  list(q)))
    if out_dir is not None:
        write_sweep(Path(out_dir) / "sweep.csv", table)
    return table


def export_evaluation(out_dir, results: dict):
    out = Path(out_dir)
    write_qoe_per_slot(out / "qoe_per_slot.csv", [m for eps in results.values() for m in eps])
    write_qoe_cdf(out / "qoe_cdf.csv", results)


__all__ = ["AXES", "EpisodeMetrics", "SweepRow", "TrainingResult", "apply_axis", "evaluate", "export_evaluation",
           "mean_qoe", "run_training", "sweep", "warm_up"]
