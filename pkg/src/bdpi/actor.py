"""The actor: a conservative (trust-region) imitation of the critics' greedy policies."""
from __future__ import annotations

import math

import numpy as np

from .approx import TabularFn
from .critic import greedy_distribution

PROB_FLOOR = 1e-6


def lambda_from_delta(delta):
    """Actor step size keeping the worst-case KL divergence of one update at ``delta``.

    Accepts a scalar or an array of deltas.
    """
    if not np.all(np.asarray(delta) > 0):
        raise ValueError(f"trust region delta must be positive, got {delta}")
    return -np.expm1(-delta)


def cpi_update(pi_s, greedy, lam: float) -> np.ndarray:
    return (1.0 - lam) * np.asarray(pi_s, dtype=float) + lam * np.asarray(greedy, dtype=float)


def policy_entropy(p) -> float:
    """Entropy in nats, with 0 log 0 = 0."""
    return 0.0 - math.fsum(x * math.log(x) for x in np.asarray(p, dtype=float).ravel().tolist() if x > 0)


def to_simplex(outputs) -> np.ndarray:
    """Clamp at zero and renormalize along the last axis (uniform if everything is clamped)."""
    p = np.maximum(np.asarray(outputs, dtype=float), 0.0)
    total = p.sum(axis=-1, keepdims=True)
    n = p.shape[-1]
    return np.where(total > 0, p / np.where(total > 0, total, 1.0), 1.0 / n)


def softmax(values, temperature: float = 1.0) -> np.ndarray:
    z = np.asarray(values, dtype=float) / temperature
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class Actor:
    """Policy backed by an approximator whose outputs are mapped to the simplex.

    A tabular actor starts uniform; a perceptron actor starts wherever its
    random initialization puts it.
    """

    def __init__(self, fn):
        self.fn = fn
        if isinstance(fn, TabularFn):
            fn.table[...] = 1.0 / fn.n_outputs

    @property
    def n_actions(self) -> int:
        return self.fn.n_outputs

    def distribution(self, state) -> np.ndarray:
        return to_simplex(self.fn.predict(state))

    def distributions(self, states) -> np.ndarray:
        return to_simplex(self.fn.predict_batch(states))


def _distinct_states(fn, states):
    if isinstance(fn, TabularFn):
        return np.unique(fn._index(states))
    return states


def actor_update(actor: Actor, q_a, states, lam: float, epochs: int = 20) -> None:
    """Move the actor toward the greedy policy of ``q_a`` on ``states``."""
    if len(states) == 0:
        return
    states = _distinct_states(actor.fn, states)
    greedy = greedy_distribution(q_a.predict_batch(states))
    targets = cpi_update(actor.distributions(states), greedy, lam)
    actor.fn.fit(states, targets, epochs=epochs)


def actor_epoch_update(actor: Actor, ensemble, batches, lam: float, order=None, epochs: int = 20) -> None:
    """Sequentially imitate each critic on the states of the batch it trained on.

    ``batches[k]`` belongs to critic ``order[k]`` (default: critics in index order).
    """
    order = range(len(batches)) if order is None else order
    for i, batch in zip(order, batches):
        actor_update(actor, ensemble.critics[i].q_a, batch.states, lam, epochs)


# --------------------------------------------------------------------------
# Cross-entropy imitation (Actor-Mimic style ablation)


def _floored(outputs):
    u = np.maximum(outputs, PROB_FLOOR)
    return u, u.sum(axis=1, keepdims=True)


def mimic_loss(actor: Actor, states, targets) -> float:
    """Mean over states of -sum_a target(a|s) log pi(a|s), with a probability floor."""
    u, total = _floored(actor.fn.predict_batch(states))
    return float(-(targets * np.log(u / total)).sum(axis=1).mean())


def mimic_output_gradient(outputs, targets) -> np.ndarray:
    """dLoss/dOutputs of ``mimic_loss``; zero where an output sits below the floor."""
    u, total = _floored(outputs)
    g = -targets / u + targets.sum(axis=1, keepdims=True) / total
    g[outputs <= PROB_FLOOR] = 0.0
    return g / len(outputs)


def mimic_targets(q_a, states, kind: str = "greedy", temperature: float = 1.0) -> np.ndarray:
    values = q_a.predict_batch(states)
    if kind == "greedy":
        return greedy_distribution(values)
    if kind == "softmax":
        return softmax(values, temperature)
    raise ValueError(f"unknown mimic target {kind!r}")


def mimic_update(actor: Actor, q_a, states, epochs: int = 20, kind: str = "greedy",
                 temperature: float = 1.0) -> None:
    """Gradient steps on the cross-entropy between the actor and one critic's policy."""
    if len(states) == 0:
        return
    targets = mimic_targets(q_a, states, kind, temperature)
    for _ in range(epochs):
        g = mimic_output_gradient(actor.fn.predict_batch(states), targets)
        actor.fn.step_output_gradient(states, g)
