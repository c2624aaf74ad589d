"""Training loops for BDPI and its ablations.

Variants:

* ``bdpi``    -- clipped critics + conservative actor
* ``bdpi_am`` -- clipped critics + cross-entropy (Actor-Mimic style) actor
* ``abcdqn``  -- clipped critics only, acting greedily w.r.t. a per-episode critic
* ``bdqn``    -- Bootstrapped DQN: single-estimator Q-Learning heads, per-episode head
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, fields
from itertools import accumulate
import time

import numpy as np

from .actor import Actor, actor_update, lambda_from_delta, mimic_update, policy_entropy
from .approx import MlpFn, TabularFn
from .critic import mlp_ensemble, tabular_ensemble
from .env import noisy_action
from .replay import Experience, ReplayBuffer
from ._kernels import tabular_clipped_learn

VARIANTS = ("bdpi", "abcdqn", "bdqn", "bdpi_am")
ACTOR_VARIANTS = ("bdpi", "bdpi_am")


@dataclass
class AgentConfig:
    variant: str = "bdpi"
    n_critics: int = 16
    n_t: int = 4
    batch_size: int = 256
    learn_every_k_steps: int = 1
    buffer_capacity: int = 20000
    gamma: float = 0.99
    critic_alpha: float | None = None  # None: 0.2, or 1.0 for bdqn
    delta: float = 0.05
    fit_epochs: int = 20
    hidden_neurons: int = 32
    learning_rate: float = 1e-4
    noise_prob: float = 0.0
    seed: int = 0
    approximator: str = "mlp"  # or "tabular"
    tabular_init: float = 0.5  # tabular critics start at U(-tabular_init, tabular_init)
    critics_per_step: int | None = None  # None: every critic, every epoch
    mimic_target: str = "greedy"  # bdpi_am only; or "softmax"
    test_every: int = 10  # training episodes per noise-free test episode when noise_prob > 0

    def __post_init__(self):
        self.variant = self.variant.replace("-", "_")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.approximator not in ("mlp", "tabular"):
            raise ValueError(f"unknown approximator {self.approximator!r}")
        if self.n_critics < 1:
            raise ValueError("n_critics must be at least 1")
        if not 0.0 <= self.noise_prob <= 1.0:
            raise ValueError("noise_prob must be in [0, 1]")
        if self.tabular_init < 0:
            raise ValueError("tabular_init must be non-negative")
        for name in ("n_t", "batch_size", "learn_every_k_steps", "buffer_capacity", "hidden_neurons"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    @property
    def alpha(self) -> float:
        if self.critic_alpha is not None:
            return self.critic_alpha
        return 1.0 if self.variant == "bdqn" else 0.2

    @property
    def n_trained(self) -> int:
        if self.critics_per_step is None:
            return self.n_critics
        return max(1, min(self.critics_per_step, self.n_critics))

    @classmethod
    def field_types(cls) -> dict:
        return {f.name: f.type for f in fields(cls)}


@dataclass
class EpisodeRecord:
    run_id: int
    episode: int
    episode_return: float
    steps: int
    mean_entropy: float
    wall_ms: int = 0
    training: bool = True


def sample_action(p: np.ndarray, u: float) -> int:
    """Inverse-CDF draw from ``p`` using the uniform variate ``u``."""
    cdf = list(accumulate(np.asarray(p, dtype=float).tolist()))
    return min(bisect_right(cdf, u * cdf[-1]), len(cdf) - 1)


class Agent:
    def __init__(self, config: AgentConfig, spec, rng: np.random.Generator, fused: bool = True):
        self.config = config
        self.n_actions = spec.n_actions
        self.tabular = config.approximator == "tabular"
        if self.tabular and spec.n_states is None:
            raise ValueError("tabular approximators need an environment with discrete states")
        self.n_states = spec.n_states
        clipped = config.variant != "bdqn"
        # bdqn heads are trained once per epoch
        n_t = config.n_t if clipped else 1
        if self.tabular:
            self.critics = tabular_ensemble(config.n_critics, spec.n_states, spec.n_actions,
                                            clipped=clipped, n_t=n_t, alpha=config.alpha,
                                            gamma=config.gamma, init_scale=config.tabular_init,
                                            rng=rng)
            for c in self.critics.critics:
                for fn in (getattr(c, "q_a"), getattr(c, "q_b", None)):
                    if fn is not None:
                        fn.adam.lr = config.learning_rate
        else:
            self.critics = mlp_ensemble(config.n_critics, spec.obs_dim, spec.n_actions, rng,
                                        clipped=clipped, hidden=config.hidden_neurons,
                                        lr=config.learning_rate, n_t=n_t, alpha=config.alpha,
                                        gamma=config.gamma, fit_epochs=config.fit_epochs)
        self.actor = None
        if config.variant in ACTOR_VARIANTS:
            if self.tabular:
                fn = TabularFn(spec.n_states, spec.n_actions, lr=config.learning_rate)
            else:
                fn = MlpFn(spec.obs_dim, spec.n_actions, config.hidden_neurons, rng,
                           config.learning_rate)
            self.actor = Actor(fn)
        self.lam = lambda_from_delta(config.delta)
        self.buffer = ReplayBuffer(config.buffer_capacity, min_fill=config.batch_size)
        self.fused = fused and self.tabular and config.variant in ("bdpi", "abcdqn")
        self._a_slot = None
        self.episode_critic = 0
        self.steps = 0
        self.learn_calls = 0

    # -- acting ---------------------------------------------------------------

    def features(self, obs):
        """What is stored and fed to the approximators: a cell index for tabular agents."""
        if self.tabular:
            obs = np.asarray(obs)
            return int(obs.argmax()) if obs.ndim == 1 else int(obs)
        return np.asarray(obs, dtype=float)

    def begin_episode(self, rng: np.random.Generator) -> None:
        if self.actor is None:
            self.episode_critic = int(rng.integers(len(self.critics)))

    def policy(self, x) -> np.ndarray:
        """Distribution actions are drawn from (before any off-policy noise)."""
        if self.actor is not None:
            return self.actor.distribution(x)
        q = self.critics.critics[self.episode_critic].q_a.predict(x)
        p = np.zeros(self.n_actions)
        p[int(np.argmax(q))] = 1.0
        return p

    def act(self, obs, rng: np.random.Generator, training: bool = True) -> int:
        x = self.features(obs)
        p = self.policy(x).tolist()
        self.last_entropy = policy_entropy(p)
        if self.actor is not None:
            action = sample_action(p, rng.random())
        else:
            action = p.index(max(p))
        if training and self.config.noise_prob > 0:
            action = noisy_action(action, self.config.noise_prob, self.n_actions, rng)
        return action

    def observe(self, obs, action: int, result) -> None:
        self.buffer.push(Experience(self.features(obs), action, result.reward,
                                    self.features(result.next_obs), result.terminal))

    # -- learning -------------------------------------------------------------

    def learn(self, rng: np.random.Generator) -> bool:
        """One training epoch over (a random ordering of) the critics. False if the buffer is not ready."""
        if not self.buffer.ready:
            return False
        cfg = self.config
        order = rng.permutation(len(self.critics))[:cfg.n_trained]
        positions = self.buffer.sample_indices((len(order), cfg.batch_size), rng)
        if self.fused:
            self._learn_fused(order, positions)
        else:
            for i, pos in zip(order, positions):
                batch = self.buffer.arrays(pos)
                self.critics.train(i, batch)
                q_a = self.critics.critics[i].q_a
                if cfg.variant == "bdpi":
                    actor_update(self.actor, q_a, batch.states, self.lam, cfg.fit_epochs)
                elif cfg.variant == "bdpi_am":
                    mimic_update(self.actor, q_a, batch.states, cfg.fit_epochs, cfg.mimic_target)
        self.learn_calls += 1
        return True

    def _learn_fused(self, order, positions):
        buf = self.buffer
        if self._a_slot is None:
            self._a_slot = self.critics.a_slots()
            self._no_actor = np.zeros((1, 1))
        actor = self.actor.fn.table if self.actor is not None else self._no_actor
        tabular_clipped_learn(
            self.critics.tables, self._a_slot, order, positions,
            buf._states, buf._actions, buf._rewards, buf._next_states, buf._terminals,
            self.critics.alpha, self.critics.gamma, self.critics.n_t, actor, self.lam,
            self.actor is not None)
        if self.critics.n_t % 2:
            for i in order:
                self.critics.critics[i].swap()


def run_episode(agent: Agent, env, training: bool, rng: np.random.Generator,
                run_id: int = 0, episode: int = 0, timed: bool = False) -> EpisodeRecord:
    """Play one episode; when training, store experiences and learn every K steps."""
    start = time.perf_counter() if timed else 0.0
    obs = env.reset()
    agent.begin_episode(rng)
    total, steps, entropy = 0.0, 0, 0.0
    k = agent.config.learn_every_k_steps
    while True:
        action = agent.act(obs, rng, training)
        entropy += agent.last_entropy
        result = env.step(action)
        total += result.reward
        steps += 1
        if training:
            agent.observe(obs, action, result)
            agent.steps += 1
            if agent.steps % k == 0:
                agent.learn(rng)
        obs = result.next_obs
        if result.done:
            break
    wall = int(round((time.perf_counter() - start) * 1000)) if timed else 0
    return EpisodeRecord(run_id, episode, total, steps, entropy / steps, wall, training)
