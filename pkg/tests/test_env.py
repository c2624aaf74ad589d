import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bdpi.env import (
    DOWN, LEFT, RIGHT, UP, FROZENLAKE_8X8, FrozenLakeEnv, GaussianBandit, StepResult,
    TableEnv, frozenlake_step, make_env, noisy_action, parse_map, table_reset, table_step,
    wrap_angle,
)


def three_se(p, n):
    return 3 * math.sqrt(p * (1 - p) / n)


# -- Table ---------------------------------------------------------------------

def test_table_reset_faces_away_from_goal():
    obs = table_reset(np.random.default_rng(0))
    np.testing.assert_allclose(obs, [0.1, 0.1, -3 * math.pi / 4])
    np.testing.assert_array_equal(table_reset(), table_reset())


def test_table_reset_after_fall():
    env = TableEnv(np.random.default_rng(0))
    env.reset()
    env.state = np.array([0.002, 0.5, math.pi])
    assert env.step(0).terminal
    np.testing.assert_allclose(env.reset(), [0.1, 0.1, -3 * math.pi / 4])


def test_table_forward_from_start():
    r = table_step([0.1, 0.1, -3 * math.pi / 4], 0, 0)
    expected = 0.1 - 0.005 / math.sqrt(2)
    np.testing.assert_allclose(r.next_obs[:2], [expected, expected], atol=1e-12)
    assert round(expected, 5) == 0.09646
    assert r.reward == 0.0 and not r.terminal and not r.truncated


def test_table_falls_off_edge():
    r = table_step([0.002, 0.5, math.pi], 0, 0)
    assert r.next_obs[0] == pytest.approx(0.002 - 0.005)
    assert r.next_obs[0] < 0
    assert r.reward == -50.0 and r.terminal


def test_table_docks():
    r = table_step([0.49, 0.51, math.pi / 4], 0, 0)
    assert r.reward == 100.0 and r.terminal


def test_table_dock_angle_tolerance():
    assert table_step([0.5, 0.5, math.pi / 4 + 0.39], 2, 0).reward == 100.0  # turns to +0.29
    assert table_step([0.5, 0.5, math.pi / 4 + 0.41], 2, 0).reward == 0.0  # turns to +0.31


def test_table_turns_wrap():
    r = table_step([0.3, 0.3, math.pi - 0.05], 1, 0)
    assert r.next_obs[2] == pytest.approx(-math.pi + 0.05)
    r = table_step([0.3, 0.3, -math.pi + 0.05], 2, 0)
    assert r.next_obs[2] == pytest.approx(math.pi - 0.05)


def test_table_truncates_at_time_limit():
    r = table_step([0.3, 0.3, 0.0], 1, 199)
    assert r.truncated and not r.terminal and r.reward == 0.0
    with pytest.raises(ValueError):
        table_step([0.3, 0.3, 0.0], 1, 200)


def test_table_invalid_action():
    with pytest.raises(ValueError):
        table_step([0.3, 0.3, 0.0], 3, 0)


def test_step_result_exclusive():
    with pytest.raises(ValueError):
        StepResult(np.zeros(3), 0.0, terminal=True, truncated=True)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=200, max_size=200))
def test_table_trajectory_invariants(actions):
    env = TableEnv(np.random.default_rng(0))
    env.reset()
    total = 0.0
    for t, a in enumerate(actions):
        r = env.step(a)
        assert -math.pi <= r.next_obs[2] <= math.pi
        assert not (r.terminal and r.truncated)
        if not r.done:
            assert r.reward == 0.0
        total += r.reward
        if r.done:
            break
    else:
        pytest.fail("episode longer than 200 steps")
    assert r.done
    assert total in (-50.0, 0.0, 100.0)


def test_wrap_angle_range():
    for theta in np.linspace(-20, 20, 1001):
        w = wrap_angle(theta)
        assert -math.pi <= w <= math.pi
        assert math.isclose(math.cos(w), math.cos(theta), abs_tol=1e-9)


# -- FrozenLake ---------------------------------------------------------------------

def test_frozenlake_layout():
    env = FrozenLakeEnv(np.random.default_rng(0))
    assert env.spec.n_actions == 4 and env.spec.obs_dim == 64
    assert env.start == 0 and env.goals == {63}
    assert env.holes == {19, 29, 35, 41, 42, 46, 49, 52, 54, 59}


def test_frozenlake_observation_one_hot():
    env = FrozenLakeEnv(np.random.default_rng(3))
    obs = env.reset()
    for _ in range(100):
        assert obs.sum() == 1.0 and set(np.unique(obs)) <= {0.0, 1.0}
        r = env.step(int(env.rng.integers(4)))
        obs = r.next_obs
        if r.done:
            obs = env.reset()


def test_frozenlake_slip_frequencies():
    rng = np.random.default_rng(42)
    n = 100_000
    outcomes = {1: 0, 8: 0, 10: 0}  # cell 9 = row 1, col 1; intended up
    for _ in range(n):
        cell = int(np.argmax(frozenlake_step(9, UP, rng).next_obs))
        outcomes[cell] += 1
    for count in outcomes.values():
        assert abs(count / n - 1 / 3) < three_se(1 / 3, n)
    other = (outcomes[8] + outcomes[10]) / n
    assert abs(other - 2 / 3) < three_se(2 / 3, n)


def test_frozenlake_wall_clamp():
    env = FrozenLakeEnv(np.random.default_rng(0))
    assert env.transition(0, UP) == (0, 0.0, False)
    assert env.transition(0, LEFT) == (0, 0.0, False)
    assert env.transition(0, DOWN) == (8, 0.0, False)


def test_frozenlake_goal_and_hole():
    env = FrozenLakeEnv(np.random.default_rng(0))
    assert env.transition(62, RIGHT) == (63, 1.0, True)
    assert env.transition(55, DOWN) == (63, 1.0, True)
    assert env.transition(11, DOWN) == (19, 0.0, True)


def test_frozenlake_step_from_terminal_fails():
    with pytest.raises(ValueError):
        frozenlake_step(19, UP, np.random.default_rng(0))
    with pytest.raises(ValueError):
        frozenlake_step(63, UP, np.random.default_rng(0))


def test_frozenlake_time_limit():
    grid = parse_map("SF\nFG")
    env = FrozenLakeEnv(np.random.default_rng(0), grid=grid, max_steps=3)
    env.reset()
    # stay in the start corner by always pushing against the walls
    env.transition = lambda cell, d: (cell, 0.0, False)
    results = [env.step(UP) for _ in range(3)]
    assert [r.truncated for r in results] == [False, False, True]


def test_transition_model_rows_sum_to_one():
    env = FrozenLakeEnv(np.random.default_rng(0))
    P, R, terminal = env.transition_model()
    np.testing.assert_allclose(P.sum(axis=2), 1.0)
    assert terminal.sum() == 11
    assert R[62, RIGHT] == pytest.approx(1 / 3)


def test_parse_map_validation(tmp_path):
    assert parse_map(FROZENLAKE_8X8).shape == (8, 8)
    for bad in ["", "SF\nF", "SX\nFG", "FF\nFG"]:
        with pytest.raises(ValueError):
            parse_map(bad)
    path = tmp_path / "lake.txt"
    path.write_text("SFF\nFHF\nFFG\n")
    env = make_env("frozenlake8x8", np.random.default_rng(0), map_file=path)
    assert env.n_states == 9 and env.holes == {4} and env.goals == {8}


def test_make_env_rejects_unknown():
    with pytest.raises(ValueError):
        make_env("lunarlander")


@pytest.mark.parametrize("name", ["table", "frozenlake8x8"])
def test_same_seed_same_trajectory(name):
    def rollout(seed):
        env = make_env(name, np.random.default_rng(seed))
        actions = np.random.default_rng(99).integers(env.spec.n_actions, size=500)
        env.reset()
        out = []
        for a in actions:
            r = env.step(int(a))
            out.append((r.next_obs.tobytes(), r.reward, r.terminal, r.truncated))
            if r.done:
                env.reset()
        return out

    assert rollout(5) == rollout(5)


def test_bandit_rewards():
    env = GaussianBandit((0.0, 0.5), np.random.default_rng(0))
    rewards = [env.step(1).reward for _ in range(20000)]
    assert abs(np.mean(rewards) - 0.5) < 3 / math.sqrt(20000)
    assert env.step(0).terminal


# -- off-policy noise ------------------------------------------------------------

def test_noise_zero_keeps_action():
    rng = np.random.default_rng(0)
    assert all(noisy_action(2, 0.0, 4, rng) == 2 for _ in range(1000))


def test_noise_one_is_uniform():
    rng = np.random.default_rng(1)
    n = 100_000
    counts = np.bincount([noisy_action(2, 1.0, 4, rng) for _ in range(n)], minlength=4)
    for c in counts:
        assert abs(c / n - 0.25) < three_se(0.25, n)


@pytest.mark.parametrize("p, n_actions", [(0.2, 4), (0.05, 3)])
def test_noise_keeps_chosen_action(p, n_actions):
    rng = np.random.default_rng(2)
    n = 100_000
    hits = sum(noisy_action(1, p, n_actions, rng) == 1 for _ in range(n))
    expected = 1 - p * (n_actions - 1) / n_actions
    if (p, n_actions) == (0.2, 4):
        assert expected == pytest.approx(0.85)
    assert abs(hits / n - expected) < three_se(expected, n)


def test_noise_probability_validated():
    with pytest.raises(ValueError):
        noisy_action(0, 1.5, 4, np.random.default_rng(0))
