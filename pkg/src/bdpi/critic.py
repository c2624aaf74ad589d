"""Aggressive bootstrapped clipped-DQN critics.

Each critic holds two Q-functions. A training iteration swaps them, then
moves the new ``q_a`` toward

    q + alpha * (r + gamma * min(q_a(s', a*), q_b(s', a*)) - q),   a* = argmax q_a(s', .)

with the bootstrap term dropped on terminal transitions.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .approx import MlpFn, TabularFn
from .replay import Batch, to_batch


def as_batch(batch) -> Batch:
    return batch if isinstance(batch, Batch) else to_batch(batch)


def greedy_distribution(values) -> np.ndarray:
    """Uniform distribution over the argmax set of ``values`` (last axis)."""
    values = np.asarray(values, dtype=float)
    top = values == values.max(axis=-1, keepdims=True)
    return top / top.sum(axis=-1, keepdims=True)


def clipped_values(q_a, q_b, next_states) -> np.ndarray:
    qa = q_a.predict_batch(next_states)
    qb = q_b.predict_batch(next_states)
    best = qa.argmax(axis=1)
    rows = np.arange(len(best))
    return np.minimum(qa[rows, best], qb[rows, best])


def clipped_value(q_a, q_b, next_state) -> float:
    qa = q_a.predict(next_state)
    best = int(np.argmax(qa))
    return float(min(qa[best], q_b.predict(next_state)[best]))


@dataclass
class CriticPair:
    q_a: object
    q_b: object
    index: int = 0

    def __post_init__(self):
        if (self.q_a.n_inputs, self.q_a.n_outputs) != (self.q_b.n_inputs, self.q_b.n_outputs):
            raise ValueError("q_a and q_b must have identical dimensions")

    def swap(self) -> None:
        self.q_a, self.q_b = self.q_b, self.q_a


def compute_targets(pair: CriticPair, batch, alpha: float, gamma: float):
    """(states, actions, new values) for one clipped update of ``pair.q_a``."""
    b = as_batch(batch)
    if len(b) == 0:
        raise ValueError("empty batch")
    q = pair.q_a.predict_batch(b.states)[np.arange(len(b)), b.actions]
    v = np.where(b.terminals, 0.0, clipped_values(pair.q_a, pair.q_b, b.next_states))
    return b.states, b.actions, (1.0 - alpha) * q + alpha * (b.rewards + gamma * v)


def _fit_actions(fn, states, actions, values, epochs):
    targets = np.zeros((len(actions), fn.n_outputs))
    mask = np.zeros_like(targets, dtype=bool)
    rows = np.arange(len(actions))
    targets[rows, actions] = values
    mask[rows, actions] = True
    fn.fit(states, targets, mask=mask, epochs=epochs)


def train_iteration(pair: CriticPair, batch, alpha: float, gamma: float, fit_epochs: int = 20) -> None:
    """Swap the two Q-functions, then train the new ``q_a`` on ``batch``."""
    pair.swap()
    states, actions, values = compute_targets(pair, batch, alpha, gamma)
    _fit_actions(pair.q_a, states, actions, values, fit_epochs)


@dataclass
class SingleCritic:
    """One Q-function trained with the plain Q-Learning target (Bootstrapped DQN head)."""
    q_a: object
    index: int = 0


def q_learning_targets(q, batch, alpha: float, gamma: float):
    b = as_batch(batch)
    current = q.predict_batch(b.states)[np.arange(len(b)), b.actions]
    v = np.where(b.terminals, 0.0, q.predict_batch(b.next_states).max(axis=1))
    return b.states, b.actions, (1.0 - alpha) * current + alpha * (b.rewards + gamma * v)


def train_single(critic: SingleCritic, batch, alpha: float, gamma: float, fit_epochs: int = 20) -> None:
    states, actions, values = q_learning_targets(critic.q_a, batch, alpha, gamma)
    _fit_actions(critic.q_a, states, actions, values, fit_epochs)


@dataclass
class CriticEnsemble:
    critics: list
    n_t: int = 4
    alpha: float = 0.2
    gamma: float = 0.99
    fit_epochs: int = 20
    # (n_critics, 2, n_states, n_actions) backing store of tabular clipped critics
    tables: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.critics:
            raise ValueError("an ensemble needs at least one critic")

    def __len__(self):
        return len(self.critics)

    @property
    def clipped(self) -> bool:
        return isinstance(self.critics[0], CriticPair)

    def train(self, i: int, batch) -> None:
        """The critic's training epoch on one batch."""
        critic = self.critics[i]
        if self.clipped:
            for _ in range(self.n_t):
                train_iteration(critic, batch, self.alpha, self.gamma, self.fit_epochs)
        else:
            for _ in range(self.n_t):
                train_single(critic, batch, self.alpha, self.gamma, self.fit_epochs)

    def a_slots(self) -> np.ndarray:
        """For tabular pairs: which of the two stored tables currently plays ``q_a``."""
        return np.array([c.q_a.slot for c in self.critics], dtype=np.int64)


def tabular_ensemble(n_critics: int, n_states: int, n_actions: int, *, clipped: bool = True,
                     n_t: int = 4, alpha: float = 0.2, gamma: float = 0.99,
                     init_scale: float = 0.0, rng: np.random.Generator | None = None) -> CriticEnsemble:
    """Tabular critics sharing one backing array.

    Tables start at zero, or at independent U(-init_scale, init_scale) draws.
    Identical zero tables give every critic the same greedy policy until
    their batches differ enough to break ties.
    """
    slots = 2 if clipped else 1
    tables = np.zeros((n_critics, slots, n_states, n_actions))
    if init_scale > 0:
        if rng is None:
            raise ValueError("a random tabular initialization needs an rng")
        tables[...] = rng.uniform(-init_scale, init_scale, tables.shape)
    critics = []
    for i in range(n_critics):
        fns = []
        for k in range(slots):
            fn = TabularFn(n_states, n_actions, table=tables[i, k])
            fn.slot = k
            fns.append(fn)
        critics.append(CriticPair(fns[0], fns[1], i) if clipped else SingleCritic(fns[0], i))
    return CriticEnsemble(critics, n_t=n_t, alpha=alpha, gamma=gamma, fit_epochs=1,
                          tables=tables if clipped else None)


def mlp_ensemble(n_critics: int, n_inputs: int, n_actions: int, rng: np.random.Generator, *,
                 clipped: bool = True, hidden: int = 32, lr: float = 1e-4, n_t: int = 4,
                 alpha: float = 0.2, gamma: float = 0.99, fit_epochs: int = 20) -> CriticEnsemble:
    """Independently initialized perceptron critics."""
    critics = []
    for i in range(n_critics):
        q_a = MlpFn(n_inputs, n_actions, hidden, rng, lr)
        if clipped:
            critics.append(CriticPair(q_a, MlpFn(n_inputs, n_actions, hidden, rng, lr), i))
        else:
            critics.append(SingleCritic(q_a, i))
    return CriticEnsemble(critics, n_t=n_t, alpha=alpha, gamma=gamma, fit_epochs=fit_epochs)
