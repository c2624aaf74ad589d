"""Experiment harness: seeded campaigns, CSV curves, value-iteration oracle and
the hyper-parameter sensitivity score."""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .critic import greedy_distribution
from .agent import AgentConfig, Agent, EpisodeRecord, run_episode
from .env import FrozenLakeEnv, make_env

EPISODE_HEADER = ["run_id", "episode", "return", "steps", "mean_entropy", "wall_ms"]
AGGREGATE_HEADER = ["episode", "mean_return", "stderr_return"]
SMOOTHING_WINDOW = 20


# --------------------------------------------------------------------------
# Campaigns


def run_seed(config: AgentConfig, env_name: str, n_episodes: int, run_id: int = 0,
             timed: bool = False, map_file=None) -> list[EpisodeRecord]:
    """One agent, one seed: ``n_episodes`` training episodes.

    With off-policy noise, a noise-free test episode follows every
    ``config.test_every`` training episodes; its record has ``training=False``
    and the index of the training episode it follows.
    """
    rng = np.random.default_rng(config.seed)
    env = make_env(env_name, rng, map_file)
    agent = Agent(config, env.spec, rng)
    records = []
    for ep in range(n_episodes):
        records.append(run_episode(agent, env, True, rng, run_id, ep, timed))
        if config.noise_prob > 0 and (ep + 1) % config.test_every == 0:
            records.append(run_episode(agent, env, False, rng, run_id, ep, timed))
    return records


def run_campaign(config: AgentConfig, env_name: str, n_episodes: int, n_seeds: int,
                 timed: bool = False, map_file=None) -> list[EpisodeRecord]:
    """Independent runs with seeds ``config.seed .. config.seed + n_seeds - 1``."""
    if env_name not in ("table", "frozenlake8x8"):
        raise ValueError(f"unknown environment {env_name!r}")
    records = []
    for k in range(n_seeds):
        cfg = replace(config, seed=config.seed + k)
        records.extend(run_seed(cfg, env_name, n_episodes, run_id=k, timed=timed, map_file=map_file))
    return records


def returns_matrix(records, training: bool = True) -> np.ndarray:
    """(n_runs, n_episodes) array of episode returns."""
    runs = {}
    for r in records:
        if r.training == training:
            runs.setdefault(r.run_id, []).append(r.episode_return)
    return np.array([runs[k] for k in sorted(runs)], dtype=float)


def trailing_mean(x: np.ndarray, window: int) -> np.ndarray:
    """Mean of the last ``window`` entries (fewer at the start) along the last axis."""
    c = np.cumsum(np.asarray(x, dtype=float), axis=-1)
    out = c.copy()
    out[..., window:] = c[..., window:] - c[..., :-window]
    n = np.minimum(np.arange(1, x.shape[-1] + 1), window)
    return out / n


def aggregate(records, window: int = SMOOTHING_WINDOW, training: bool = True):
    """Per-episode (episode, mean, standard error) across runs of smoothed returns."""
    m = returns_matrix(records, training)
    if m.size == 0:
        return []
    smoothed = trailing_mean(m, window) if window > 1 else m
    mean = smoothed.mean(axis=0)
    if len(m) > 1:
        stderr = smoothed.std(axis=0, ddof=1) / np.sqrt(len(m))
    else:
        stderr = np.zeros_like(mean)
    return [(i, float(a), float(b)) for i, (a, b) in enumerate(zip(mean, stderr))]


# --------------------------------------------------------------------------
# CSV output


def emit_curve(records, path) -> None:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(EPISODE_HEADER)
            for r in records:
                w.writerow([r.run_id, r.episode, repr(float(r.episode_return)), r.steps,
                            repr(float(r.mean_entropy)), r.wall_ms])
    except OSError as exc:
        raise OSError(f"cannot write episode curve {path}: {exc}") from exc


def read_curve(path, training: bool = True) -> list[EpisodeRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != EPISODE_HEADER:
        raise ValueError(f"{path}: not an episode curve")
    return [EpisodeRecord(int(a), int(b), float(c), int(d), float(e), int(f), training)
            for a, b, c, d, e, f in rows[1:]]


def emit_aggregate(rows, path) -> None:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(AGGREGATE_HEADER)
            for ep, mean, se in rows:
                w.writerow([ep, repr(float(mean)), repr(float(se))])
    except OSError as exc:
        raise OSError(f"cannot write aggregate curve {path}: {exc}") from exc


# --------------------------------------------------------------------------
# Tabular oracles


def value_iteration(P, R, gamma: float, tolerance: float = 1e-10, max_iter: int = 1_000_000):
    """Optimal state values and Q-values of a finite MDP.

    ``P[s, a, s']`` are transition probabilities and ``R[s, a]`` expected rewards.
    """
    V = np.zeros(P.shape[0])
    for _ in range(max_iter):
        Q = R + gamma * P @ V
        V_new = Q.max(axis=1)
        if np.max(np.abs(V_new - V)) < tolerance:
            return V_new, R + gamma * P @ V_new
        V = V_new
    raise RuntimeError("value iteration did not converge")


def policy_evaluation(P, R, policy, gamma: float, tolerance: float = 1e-10,
                      horizon: int | None = None, max_iter: int = 1_000_000):
    """State values of a stochastic ``policy[s, a]``; finite ``horizon`` gives exactly that many backups."""
    P_pi = np.einsum("sa,sat->st", policy, P)
    R_pi = (policy * R).sum(axis=1)
    V = np.zeros(P.shape[0])
    if horizon is not None:
        for _ in range(horizon):
            V = R_pi + gamma * P_pi @ V
        return V
    for _ in range(max_iter):
        V_new = R_pi + gamma * P_pi @ V
        if np.max(np.abs(V_new - V)) < tolerance:
            return V_new
        V = V_new
    raise RuntimeError("policy evaluation did not converge")


def optimal_success_probability(env: FrozenLakeEnv, tolerance: float = 1e-10,
                                horizon: int | None = None) -> float:
    """Best achievable probability of reaching the goal from the start cell.

    With ``horizon`` the probability is that of reaching it within that many steps.
    """
    P, R, _ = env.transition_model()
    if horizon is None:
        V, _ = value_iteration(P, R, 1.0, tolerance)
    else:
        V = np.zeros(P.shape[0])
        for _ in range(horizon):
            V = (R + P @ V).max(axis=1)
    return float(V[env.start])


def policy_success_probability(env: FrozenLakeEnv, policy, horizon: int | None = None,
                               tolerance: float = 1e-10) -> float:
    P, R, _ = env.transition_model()
    return float(policy_evaluation(P, R, np.asarray(policy, float), 1.0, tolerance, horizon)[env.start])


def value_iteration_oracle(env_name: str = "frozenlake8x8", gamma: float = 0.99,
                           tolerance: float = 1e-10):
    """Optimal discounted values per state, and the success probability of acting on them.

    The success probability is that of the gamma-optimal (greedy, stationary)
    policy reaching the goal from the start within the episode time limit,
    which is what an agent maximizing the discounted return can hope for.
    """
    if env_name != "frozenlake8x8":
        raise ValueError(f"no tabular transition model for {env_name!r}")
    env = FrozenLakeEnv(np.random.default_rng(0))
    P, R, _ = env.transition_model()
    V, Q = value_iteration(P, R, gamma, tolerance)
    policy = greedy_distribution(Q)
    return V, policy_success_probability(env, policy, horizon=env.spec.max_steps)


# --------------------------------------------------------------------------
# Sensitivity score


@dataclass(frozen=True)
class ConfigSample:
    params: dict  # parameter name -> ordinal index within its grid
    score: float


def param_distance(a: ConfigSample, b: ConfigSample) -> float:
    """L1 distance between ordinal index vectors."""
    keys = sorted(set(a.params) | set(b.params))
    return float(sum(abs(a.params.get(k, 0) - b.params.get(k, 0)) for k in keys))


def sensitivity_score(samples, n_pairs: int | None = 10000, rng: np.random.Generator | None = None) -> float:
    """Distance-weighted mean absolute score difference between configuration pairs.

    ``n_pairs=None`` uses every unordered pair once; otherwise pairs of distinct
    samples are drawn with replacement, and pairs at distance 0 are redrawn.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    distances = {}
    for i, j in itertools.combinations(range(len(samples)), 2):
        d = param_distance(samples[i], samples[j])
        if d > 0:
            distances[(i, j)] = d
    if not distances:
        raise ValueError("sensitivity score undefined: every pair of samples is at distance 0")

    if n_pairs is None:
        pairs = list(distances)
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        pairs = []
        while len(pairs) < n_pairs:
            i, j = rng.choice(len(samples), size=2, replace=False)
            key = (min(i, j), max(i, j))
            if key in distances:
                pairs.append(key)

    num = den = 0.0
    for key in pairs:
        w = 1.0 / distances[key]
        num += w * abs(samples[key[0]].score - samples[key[1]].score)
        den += w
    return num / den


def read_grid(path) -> dict:
    """Grid file: ``name = v1, v2, ...`` per line; ``#`` starts a comment."""
    grid = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected name = values")
            name, values = (part.strip() for part in line.split("=", 1))
            grid[name] = [v.strip() for v in values.split(",") if v.strip()]
    return grid


def sample_configs(grid: dict, n: int, rng: np.random.Generator):
    """Random configurations as (ordinal index dict, value dict) over the multi-valued keys."""
    out = []
    for _ in range(n):
        idx = {k: int(rng.integers(len(v))) for k, v in grid.items()}
        out.append((idx, {k: grid[k][i] for k, i in idx.items()}))
    return out


# --------------------------------------------------------------------------
# Config files


def _convert(name: str, value: str, annotation: str):
    if value.lower() == "none" and "None" in annotation:
        return None
    if annotation.startswith("int"):
        return int(value)
    if annotation.startswith("float"):
        return float(value)
    if annotation.startswith("str"):
        return value
    raise ValueError(f"cannot parse {name} = {value!r}")


def parse_config_items(items: dict, base: AgentConfig | None = None) -> AgentConfig:
    types = {f.name: str(f.type) for f in fields(AgentConfig)}
    changes = {}
    for name, value in items.items():
        if name not in types:
            raise ValueError(f"unknown configuration key {name!r}")
        changes[name] = _convert(name, str(value).strip(), types[name])
    return replace(base or AgentConfig(), **changes)


def read_config(path, base: AgentConfig | None = None) -> AgentConfig:
    """Flat ``key=value`` file with keys named after ``AgentConfig`` fields."""
    items = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            items[key.strip()] = value.strip()
    return parse_config_items(items, base)
