"""Environments: the docking *Table* robot, slippery 8x8 FrozenLake, a Gaussian
bandit, and an off-policy action-noise helper.

All environments are deterministic given their ``numpy.random.Generator``.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

# --------------------------------------------------------------------------
# Common types


@dataclass(frozen=True)
class StepResult:
    next_obs: np.ndarray
    reward: float
    terminal: bool
    truncated: bool = False

    def __post_init__(self):
        if self.terminal and self.truncated:
            raise ValueError("a step cannot be both terminal and truncated")

    @property
    def done(self) -> bool:
        return self.terminal or self.truncated


@dataclass(frozen=True)
class EnvSpec:
    n_actions: int
    obs_dim: int
    max_steps: int
    n_states: int | None = None  # set for tabular environments


def wrap_angle(theta: float) -> float:
    """Map an angle to [-pi, pi]."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped < 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


# --------------------------------------------------------------------------
# Table

TABLE_FORWARD = 0
TABLE_LEFT = 1
TABLE_RIGHT = 2

TABLE_START = (0.1, 0.1)
TABLE_GOAL = (0.5, 0.5)
TABLE_START_HEADING = math.atan2(TABLE_START[1] - TABLE_GOAL[1], TABLE_START[0] - TABLE_GOAL[0])
TABLE_SPEED = 0.005
TABLE_TURN = 0.1
TABLE_DOCK_POS_TOL = 0.05
TABLE_DOCK_ANGLE = math.pi / 4
TABLE_DOCK_ANGLE_TOL = 0.3
TABLE_MAX_STEPS = 200
TABLE_FALL_REWARD = -50.0
TABLE_DOCK_REWARD = 100.0


def table_reset(rng: np.random.Generator | None = None) -> np.ndarray:
    """Initial Table observation; ``rng`` is accepted for interface symmetry."""
    return np.array([TABLE_START[0], TABLE_START[1], TABLE_START_HEADING])


def table_docked(x: float, y: float, theta: float) -> bool:
    return (
        abs(x - TABLE_GOAL[0]) <= TABLE_DOCK_POS_TOL
        and abs(y - TABLE_GOAL[1]) <= TABLE_DOCK_POS_TOL
        and abs(wrap_angle(theta - TABLE_DOCK_ANGLE)) <= TABLE_DOCK_ANGLE_TOL
    )


def table_step(state, action: int, step_count: int) -> StepResult:
    """One transition of the Table robot from ``state`` = (x, y, theta).

    ``step_count`` is the number of steps already taken in the episode.
    """
    if action not in (TABLE_FORWARD, TABLE_LEFT, TABLE_RIGHT):
        raise ValueError(f"invalid Table action {action!r}")
    if not 0 <= step_count < TABLE_MAX_STEPS:
        raise ValueError(f"step_count {step_count} outside [0, {TABLE_MAX_STEPS})")

    x, y, theta = float(state[0]), float(state[1]), float(state[2])
    if action == TABLE_FORWARD:
        x += TABLE_SPEED * math.cos(theta)
        y += TABLE_SPEED * math.sin(theta)
    elif action == TABLE_LEFT:
        theta = wrap_angle(theta + TABLE_TURN)
    else:
        theta = wrap_angle(theta - TABLE_TURN)

    obs = np.array([x, y, theta])
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        return StepResult(obs, TABLE_FALL_REWARD, terminal=True)
    if table_docked(x, y, theta):
        return StepResult(obs, TABLE_DOCK_REWARD, terminal=True)
    if step_count + 1 >= TABLE_MAX_STEPS:
        return StepResult(obs, 0.0, terminal=False, truncated=True)
    return StepResult(obs, 0.0, terminal=False)


class TableEnv:
    """Tiny robot that must find and dock onto a charging station."""

    name = "table"
    spec = EnvSpec(n_actions=3, obs_dim=3, max_steps=TABLE_MAX_STEPS)

    def __init__(self, rng: np.random.Generator | None = None):
        self.rng = rng if rng is not None else np.random.default_rng()
        self.state = table_reset(self.rng)
        self.steps = 0

    def reset(self) -> np.ndarray:
        self.state = table_reset(self.rng)
        self.steps = 0
        return self.state.copy()

    def step(self, action: int) -> StepResult:
        result = table_step(self.state, action, self.steps)
        self.state = result.next_obs
        self.steps += 1
        return StepResult(result.next_obs.copy(), result.reward, result.terminal, result.truncated)


# --------------------------------------------------------------------------
# FrozenLake

FROZENLAKE_8X8 = (
    "SFFFFFFF\n"
    "FFFFFFFF\n"
    "FFFHFFFF\n"
    "FFFFFHFF\n"
    "FFFHFFFF\n"
    "FHHFFFHF\n"
    "FHFFHFHF\n"
    "FFFHFFFG"
)

UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3
_MOVES = {UP: (-1, 0), DOWN: (1, 0), LEFT: (0, -1), RIGHT: (0, 1)}
# executed direction candidates: intended first, then the two perpendicular ones
SLIP_DIRECTIONS = {
    UP: (UP, LEFT, RIGHT),
    DOWN: (DOWN, LEFT, RIGHT),
    LEFT: (LEFT, UP, DOWN),
    RIGHT: (RIGHT, UP, DOWN),
}
FROZENLAKE_MAX_STEPS = 200


def parse_map(text: str) -> np.ndarray:
    """Parse newline-separated rows of S/F/H/G characters."""
    rows = [line.strip() for line in text.strip().splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty map")
    if len({len(r) for r in rows}) != 1:
        raise ValueError("map rows have different lengths")
    grid = np.array([list(r) for r in rows])
    if not set(np.unique(grid)) <= set("SFHG"):
        raise ValueError("map may only contain S, F, H and G")
    if (grid == "S").sum() != 1 or (grid == "G").sum() < 1:
        raise ValueError("map needs exactly one S and at least one G")
    return grid


def load_map(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return parse_map(fh.read())


class FrozenLakeEnv:
    """Slippery grid world; observations are one-hot cell encodings."""

    name = "frozenlake8x8"

    def __init__(self, rng: np.random.Generator | None = None, grid=None,
                 max_steps: int = FROZENLAKE_MAX_STEPS):
        self.rng = rng if rng is not None else np.random.default_rng()
        self.grid = parse_map(FROZENLAKE_8X8) if grid is None else np.asarray(grid)
        self.n_rows, self.n_cols = self.grid.shape
        self.n_states = self.n_rows * self.n_cols
        flat = self.grid.ravel()
        self.start = int(np.flatnonzero(flat == "S")[0])
        self.holes = frozenset(np.flatnonzero(flat == "H").tolist())
        self.goals = frozenset(np.flatnonzero(flat == "G").tolist())
        self.spec = EnvSpec(n_actions=4, obs_dim=self.n_states, max_steps=max_steps,
                            n_states=self.n_states)
        self.cell = self.start
        self.steps = 0

    def is_terminal(self, cell: int) -> bool:
        return cell in self.holes or cell in self.goals

    def move(self, cell: int, direction: int) -> int:
        """Deterministic move; walking into a wall leaves the agent in place."""
        row, col = divmod(cell, self.n_cols)
        dr, dc = _MOVES[direction]
        nr, nc = row + dr, col + dc
        if 0 <= nr < self.n_rows and 0 <= nc < self.n_cols:
            return nr * self.n_cols + nc
        return cell

    def one_hot(self, cell: int) -> np.ndarray:
        obs = np.zeros(self.n_states)
        obs[cell] = 1.0
        return obs

    def transition(self, cell: int, direction: int) -> tuple[int, float, bool]:
        """(next cell, reward, terminal) when ``direction`` is actually executed."""
        nxt = self.move(cell, direction)
        if nxt in self.goals:
            return nxt, 1.0, True
        return nxt, 0.0, nxt in self.holes

    def step_from(self, cell: int, action: int, rng: np.random.Generator,
                  step_count: int = 0) -> StepResult:
        if action not in _MOVES:
            raise ValueError(f"invalid FrozenLake action {action!r}")
        if self.is_terminal(cell):
            raise ValueError(f"cannot step from terminal cell {cell}")
        executed = SLIP_DIRECTIONS[action][int(rng.integers(3))]
        nxt, reward, terminal = self.transition(cell, executed)
        truncated = not terminal and step_count + 1 >= self.spec.max_steps
        return StepResult(self.one_hot(nxt), reward, terminal, truncated)

    def reset(self) -> np.ndarray:
        self.cell = self.start
        self.steps = 0
        return self.one_hot(self.cell)

    def step(self, action: int) -> StepResult:
        result = self.step_from(self.cell, action, self.rng, self.steps)
        self.cell = int(np.argmax(result.next_obs))
        self.steps += 1
        return result

    def transition_model(self):
        """Arrays ``P[s, a, s']``, expected reward ``R[s, a]`` and terminal mask.

        Terminal cells are absorbing with zero reward.
        """
        n, m = self.n_states, self.spec.n_actions
        P = np.zeros((n, m, n))
        R = np.zeros((n, m))
        terminal = np.array([self.is_terminal(s) for s in range(n)])
        for s in range(n):
            for a in range(m):
                if terminal[s]:
                    P[s, a, s] = 1.0
                    continue
                for d in SLIP_DIRECTIONS[a]:
                    nxt, reward, _ = self.transition(s, d)
                    P[s, a, nxt] += 1.0 / 3.0
                    R[s, a] += reward / 3.0
        return P, R, terminal


_DEFAULT_FROZENLAKE = FrozenLakeEnv(np.random.default_rng(0))


def frozenlake_step(cell: int, action: int, rng: np.random.Generator) -> StepResult:
    """One slippery step on the default 8x8 map (no time limit)."""
    return _DEFAULT_FROZENLAKE.step_from(cell, action, rng)


# --------------------------------------------------------------------------
# Bandit


class GaussianBandit:
    """Single-state bandit with unit-variance Gaussian rewards; every pull ends the episode."""

    name = "bandit"

    def __init__(self, means=(0.0, 0.5), rng: np.random.Generator | None = None, std: float = 1.0):
        self.rng = rng if rng is not None else np.random.default_rng()
        self.means = np.asarray(means, dtype=float)
        self.std = std
        self.spec = EnvSpec(n_actions=len(self.means), obs_dim=1, max_steps=1, n_states=1)

    def reset(self) -> np.ndarray:
        return np.ones(1)

    def step(self, action: int) -> StepResult:
        reward = float(self.rng.normal(self.means[action], self.std))
        return StepResult(np.ones(1), reward, terminal=True)


# --------------------------------------------------------------------------
# Off-policy noise


def noisy_action(chosen_action: int, noise_prob: float, n_actions: int,
                 rng: np.random.Generator) -> int:
    """Replace ``chosen_action`` by a uniformly random one with probability ``noise_prob``."""
    if not 0.0 <= noise_prob <= 1.0:
        raise ValueError(f"noise_prob must be in [0, 1], got {noise_prob}")
    if noise_prob > 0.0 and rng.random() < noise_prob:
        return int(rng.integers(n_actions))
    return chosen_action


ENVIRONMENTS = {
    "table": TableEnv,
    "frozenlake8x8": FrozenLakeEnv,
}


def make_env(name: str, rng: np.random.Generator | None = None, map_file=None):
    if name not in ENVIRONMENTS:
        raise ValueError(f"unknown environment {name!r}; choose from {sorted(ENVIRONMENTS)}")
    if map_file is not None:
        if name != "frozenlake8x8":
            raise ValueError("a map file only applies to frozenlake8x8")
        return FrozenLakeEnv(rng, grid=load_map(map_file))
    return ENVIRONMENTS[name](rng)
