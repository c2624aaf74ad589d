"""Fixed-capacity FIFO experience replay with uniform sampling."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np


class Experience(NamedTuple):
    state: np.ndarray | int
    action: int
    reward: float
    next_state: np.ndarray | int
    terminal: bool


class Batch(NamedTuple):
    """Column view of a set of experiences."""
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    terminals: np.ndarray

    def __len__(self):
        return len(self.actions)


class BufferNotReady(RuntimeError):
    """Raised when sampling from a buffer holding fewer than ``min_fill`` entries."""


class ReplayBuffer:
    """Ring buffer of experiences stored column-wise in numpy arrays.

    Storage is allocated on the first push, using the shape and dtype of that
    experience's state (integer states for tabular agents, vectors otherwise).
    """

    def __init__(self, capacity: int = 20000, min_fill: int = 1):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.min_fill = max(1, min_fill)
        self._size = 0
        self._next = 0
        self._states = None

    def _allocate(self, e: Experience):
        state = np.asarray(e.state)
        self._states = np.zeros((self.capacity,) + state.shape, dtype=state.dtype)
        self._next_states = np.zeros_like(self._states)
        self._actions = np.zeros(self.capacity, dtype=np.int64)
        self._rewards = np.zeros(self.capacity)
        self._terminals = np.zeros(self.capacity, dtype=bool)

    def __len__(self):
        return self._size

    @property
    def ready(self) -> bool:
        return self._size >= self.min_fill

    def push(self, e: Experience) -> None:
        if self._states is None:
            self._allocate(e)
        i = self._next
        self._states[i] = e.state
        self._actions[i] = e.action
        self._rewards[i] = e.reward
        self._next_states[i] = e.next_state
        self._terminals[i] = e.terminal
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def _physical(self, logical):
        start = self._next if self._size == self.capacity else 0
        return (start + np.asarray(logical)) % self.capacity

    def sample_indices(self, n, rng: np.random.Generator) -> np.ndarray:
        """Storage positions of ``n`` experiences (an int or a shape) drawn uniformly with replacement.

        Every occupied slot is equally likely, so positions are drawn directly in
        storage order rather than in insertion order.
        """
        if not self.ready:
            raise BufferNotReady(f"buffer holds {self._size} < {self.min_fill} experiences")
        return rng.integers(0, self._size, size=n)

    def arrays(self, positions) -> Batch:
        """Experiences at the given storage positions."""
        idx = np.asarray(positions)
        return Batch(self._states[idx], self._actions[idx], self._rewards[idx],
                     self._next_states[idx], self._terminals[idx])

    def sample_arrays(self, n: int, rng: np.random.Generator) -> Batch:
        return self.arrays(self.sample_indices(n, rng))

    def sample_batch(self, n: int, rng: np.random.Generator) -> list[Experience]:
        return to_experiences(self.sample_arrays(n, rng))

    def entries(self) -> list[Experience]:
        """All stored experiences, oldest first."""
        if self._size == 0:
            return []
        return to_experiences(self.arrays(self._physical(np.arange(self._size))))


def to_experiences(batch: Batch) -> list[Experience]:
    out = []
    for s, a, r, s2, t in zip(*batch):
        if np.ndim(s) == 0:
            s, s2 = int(s), int(s2)
        out.append(Experience(s, int(a), float(r), s2, bool(t)))
    return out


def to_batch(experiences) -> Batch:
    experiences = list(experiences)
    return Batch(
        np.array([e.state for e in experiences]),
        np.array([e.action for e in experiences], dtype=np.int64),
        np.array([e.reward for e in experiences], dtype=float),
        np.array([e.next_state for e in experiences]),
        np.array([e.terminal for e in experiences], dtype=bool),
    )
