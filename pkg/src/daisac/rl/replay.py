"""Proportional prioritized replay on a sum tree with FIFO eviction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Transition:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool = False
    priority: float = 1.0


class SumTree:
    """Binary tree over ``capacity`` leaves; internal nodes hold subtree sums."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        size = 1
        while size < self.capacity:
            size *= 2
        self.size = size
        self.tree = np.zeros(2 * size)

    def update(self, leaf, value):
        i = leaf + self.size
        self.tree[i] = value
        i //= 2
        while i >= 1:
            self.tree[i] = self.tree[2 * i] + self.tree[2 * i + 1]
            i //= 2

    def leaf_value(self, leaf):
        return self.tree[leaf + self.size]

    @property
    def total(self):
        return float(self.tree[1])

    def find(self, mass):
        """Leaf whose cumulative interval contains ``mass`` (0 <= mass < total)."""
        i = 1
        while i < self.size:
            left = self.tree[2 * i]
            if mass < left:
                i = 2 * i
            else:
                mass -= left
                i = 2 * i + 1
        return i - self.size


class PrioritizedReplay:
    def __init__(self, capacity=6000, alpha=0.6, priority_floor=1e-3):
        self.capacity = int(capacity)
        self.alpha = alpha
        self.priority_floor = priority_floor
        self.tree = SumTree(self.capacity)
        self.items = [None] * self.capacity
        self.next_slot = 0
        self.count = 0
        self.max_priority = 1.0

    def __len__(self):
        return self.count

    def push(self, transition: Transition, priority=None):
        """Insert with ``priority`` (default: the largest seen so far); evicts the oldest when full."""
        p = self.max_priority if priority is None else float(priority)
        if not p > 0:
            raise ValueError("priority must be positive")
        self.max_priority = max(self.max_priority, p)
        transition.priority = p
        slot = self.next_slot
        self.items[slot] = transition
        self.tree.update(slot, p ** self.alpha)
        self.next_slot = (slot + 1) % self.capacity
        self.count = min(self.count + 1, self.capacity)
        return slot

    def sample(self, batch_size, rng):
        """Draw ``batch_size`` slots with probability proportional to ``priority ** alpha``."""
        if self.count == 0:
            raise ValueError("cannot sample from an empty replay memory")
        total = self.tree.total
        slots = np.empty(batch_size, dtype=int)
        for j, u in enumerate(rng.random(batch_size) * total):
            slot = self.tree.find(u)
            # guard against round-off landing on an empty leaf
            slots[j] = slot if slot < self.count else self.count - 1
        return slots, [self.items[s] for s in slots]

    def update_priorities(self, slots, td_errors):
        for s, d in zip(slots, td_errors):
            p = abs(float(d)) + self.priority_floor
            self.items[s].priority = p
            self.max_priority = max(self.max_priority, p)
            self.tree.update(s, p ** self.alpha)

    def oldest(self):
        if self.count == 0:
            return None
        return self.items[self.next_slot if self.count == self.capacity else 0]


def replay_push(memory: PrioritizedReplay, transition, priority=None):
    return memory.push(transition, priority)


def replay_sample(memory: PrioritizedReplay, batch_size, rng):
    return memory.sample(batch_size, rng)
