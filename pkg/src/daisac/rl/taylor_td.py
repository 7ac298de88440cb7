"""Deterministic actor-critic trained with a first-order Taylor-corrected TD target.

For a transition ``(s, a, r, s')`` the TD error uses the target actor's action
at ``s'``::

    delta = r + gamma * (1 - done) * Q'(s', mu'(s')) - Q(s, a)

The critic residual adds the first-order change of Q when the stored action is
replaced by the current policy's action, ``dQ/da(s, a) . (mu(s) - a)``, and the
critic descends the squared residual. The actor ascends ``dQ/da`` through the
policy (deterministic policy gradient).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mlp import Mlp, make_optimizer
from .replay import PrioritizedReplay, Transition
from .state import ACTION_DIM, STATE_DIM


@dataclass
class AgentConfig:
    state_dim: int = STATE_DIM
    action_dim: int = ACTION_DIM
    hidden: tuple = (256, 128, 64)
    gamma: float = 0.9
    lr: float = 1e-4
    actor_lr: float | None = None
    optimizer: str = "sgd"
    epsilon_start: float = 0.2
    epsilon_final: float = 0.01
    sync_period: int = 50
    memory_size: int = 6000
    batch_size: int = 128
    priority_alpha: float = 0.6
    priority_floor: float = 1e-3
    actor_delay: int = 0
    taylor: bool = True
    center_rewards: bool = False


@dataclass
class UpdateStats:
    mean_abs_td: float
    skipped: int
    n: int


class TaylorTdAgent:
    def __init__(self, config: AgentConfig | None = None, seed=0):
        self.config = config = config or AgentConfig()
        self.rng = np.random.default_rng(seed)
        c = config
        self.actor = Mlp([c.state_dim, *c.hidden, c.action_dim], "sigmoid", self.rng)
        self.critic = Mlp([c.state_dim + c.action_dim, *c.hidden, 1], "linear", self.rng)
        self.actor_target = self.actor.clone()
        self.critic_target = self.critic.clone()
        self.critic_opt = make_optimizer(c.optimizer, c.lr)
        self.actor_opt = make_optimizer(c.optimizer, c.actor_lr if c.actor_lr is not None else c.lr)
        self.memory = PrioritizedReplay(c.memory_size, c.priority_alpha, c.priority_floor)
        self.updates_since_sync = 0
        self.skipped_total = 0
        self.updates = 0
        self.reward_mean = 0.0
        self.rewards_seen = 0

    # -- evaluation helpers ------------------------------------------------
    def q_value(self, state, action, target=False):
        net = self.critic_target if target else self.critic
        x = np.concatenate([np.atleast_2d(state), np.atleast_2d(action)], axis=1)
        return net.forward(x)[:, 0]

    def dq_da(self, state, action):
        """Gradient of Q with respect to the action, one row per sample."""
        x = np.concatenate([np.atleast_2d(state), np.atleast_2d(action)], axis=1)
        _, acts = self.critic.forward(x, keep=True)
        _, gx = self.critic.backward(acts, np.ones((x.shape[0], 1)))
        return gx[:, self.config.state_dim:]

    def policy(self, state, target=False):
        return (self.actor_target if target else self.actor).forward(state)

    # -- interaction -----------------------------------------------------------
    def epsilon(self, progress):
        """Linear decay from the start to the final exploration rate over ``progress`` in [0, 1]."""
        t = min(max(progress, 0.0), 1.0)
        return self.config.epsilon_start + t * (self.config.epsilon_final - self.config.epsilon_start)

    def remember(self, state, action, reward, next_state, done=False):
        self.rewards_seen += 1
        self.reward_mean += (float(reward) - self.reward_mean) / self.rewards_seen
        return self.memory.push(Transition(np.asarray(state, float), np.asarray(action, float), float(reward),
                                           np.asarray(next_state, float), bool(done)))

    def sync_targets(self):
        self.actor_target.copy_from(self.actor)
        self.critic_target.copy_from(self.critic)
        self.updates_since_sync = 0

    # -- learning ------------------------------------------------------------------
    def td_error(self, states, actions, rewards, next_states, dones, gamma=None):
        gamma = self.config.gamma if gamma is None else gamma
        nxt = self.policy(next_states, target=True)
        boot = self.q_value(next_states, nxt, target=True)
        y = rewards + gamma * (1.0 - dones) * boot
        return y - self.q_value(states, actions)

    def taylor_update(self, batch, update_actor=True) -> tuple[UpdateStats, np.ndarray]:
        """One gradient step on a list of transitions; returns stats and per-item TD errors."""
        if not batch:
            raise ValueError("empty batch")
        s = np.array([t.state for t in batch])
        a = np.array([t.action for t in batch])
        r = np.array([t.reward for t in batch], dtype=float)
        if self.config.center_rewards:
            # a constant shift leaves the greedy policy unchanged but keeps Q near zero
            r = r - self.reward_mean
        s2 = np.array([t.next_state for t in batch])
        d = np.array([t.done for t in batch], dtype=float)
        sd = self.config.state_dim

        delta = self.td_error(s, a, r, s2, d)
        x = np.concatenate([s, a], axis=1)
        _, acts = self.critic.forward(x, keep=True)
        _, gx = self.critic.backward(acts, np.ones((len(batch), 1)))
        grad_a = gx[:, sd:]
        delta_a = self.policy(s) - a
        residual = delta + np.sum(grad_a * delta_a, axis=1) if self.config.taylor else delta

        ok = np.isfinite(residual) & np.all(np.isfinite(grad_a), axis=1)
        skipped = int((~ok).sum())
        self.skipped_total += skipped
        n_ok = int(ok.sum())
        if n_ok:
            # descent on 0.5 * mean(residual^2) with the residual target held fixed
            up = np.where(ok, -residual, 0.0)[:, None] / n_ok
            grads, _ = self.critic.backward(acts, up)
            if all(np.all(np.isfinite(g)) for g in grads):
                self.critic_opt.step(self.critic.params, grads)
            if update_actor:
                self._actor_step(s[ok])
        self.updates_since_sync += 1
        if self.updates_since_sync >= self.config.sync_period:
            self.sync_targets()
        finite_delta = np.where(np.isfinite(delta), delta, 0.0)
        stats = UpdateStats(float(np.mean(np.abs(finite_delta[ok]))) if n_ok else float("nan"), skipped, len(batch))
        return stats, finite_delta

    def _actor_step(self, states):
        pa, a_acts = self.actor.forward(states, keep=True)
        g_q = self.dq_da(states, pa)
        # ascend mean Q: descend its negative
        grads, _ = self.actor.backward(a_acts, -g_q / states.shape[0])
        if all(np.all(np.isfinite(g)) for g in grads):
            self.actor_opt.step(self.actor.params, grads)

    def learn(self):
        """Sample a prioritized batch, update, and refresh the sampled priorities."""
        if len(self.memory) == 0:
            return None
        slots, batch = self.memory.sample(self.config.batch_size, self.rng)
        # the critic gets a head start so early policy moves follow a settled value scale
        stats, delta = self.taylor_update(batch, update_actor=self.updates >= self.config.actor_delay)
        self.updates += 1
        self.memory.update_priorities(slots, delta)
        return stats


def select_action(agent: TaylorTdAgent, state, epsilon, rng):
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if rng.random() < epsilon:
        return rng.random(agent.config.action_dim)
    return np.clip(agent.policy(state), 0.0, 1.0)


def td_error(agent: TaylorTdAgent, transition: Transition, gamma=None):
    return float(agent.td_error(np.atleast_2d(transition.state), np.atleast_2d(transition.action),
                                np.array([transition.reward]), np.atleast_2d(transition.next_state),
                                np.array([float(transition.done)]), gamma)[0])


def taylor_update(agent: TaylorTdAgent, batch):
    return agent.taylor_update(batch)


def sync_targets(agent: TaylorTdAgent):
    agent.sync_targets()
