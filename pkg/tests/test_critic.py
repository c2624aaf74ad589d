import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from bdpi.approx import MlpFn, TabularFn
from bdpi.critic import (
    CriticPair, clipped_value, clipped_values, compute_targets, greedy_distribution,
    tabular_ensemble, train_iteration,
)
from bdpi.harness import value_iteration
from bdpi.replay import Batch, Experience


def tab_pair(qa, qb):
    qa, qb = np.asarray(qa, float), np.asarray(qb, float)
    return CriticPair(TabularFn(*qa.shape, table=qa.copy()), TabularFn(*qb.shape, table=qb.copy()))


def chain_mdp(gamma=0.99):
    """States 0 -> 1 -> 2 (terminal goal); action 0 stays, action 1 moves right."""
    P = np.zeros((3, 2, 3))
    R = np.zeros((3, 2))
    P[0, 0, 0] = P[0, 1, 1] = 1.0
    P[1, 0, 1] = P[1, 1, 2] = 1.0
    P[2, :, 2] = 1.0
    R[1, 1] = 1.0
    batch = [Experience(0, 0, 0.0, 0, False), Experience(0, 1, 0.0, 1, False),
             Experience(1, 0, 0.0, 1, False), Experience(1, 1, 1.0, 2, True)]
    return P, R, batch


def test_clipped_value_example():
    pair = tab_pair([[1.0, 2.0]], [[3.0, 0.0]])
    assert clipped_value(pair.q_a, pair.q_b, 0) == 0.0


def test_clipped_value_ties_take_lowest_index():
    pair = tab_pair([[2.0, 2.0]], [[5.0, 1.0]])
    assert clipped_value(pair.q_a, pair.q_b, 0) == 2.0


def test_clipped_value_reduces_to_max_for_equal_functions():
    q = np.random.default_rng(0).normal(size=(5, 3))
    pair = tab_pair(q, q)
    np.testing.assert_array_equal(clipped_values(pair.q_a, pair.q_b, np.arange(5)), q.max(axis=1))


@settings(max_examples=200, deadline=None)
@given(arrays(float, (4, 3), elements=st.floats(-100, 100)),
       arrays(float, (4, 3), elements=st.floats(-100, 100)))
def test_clipped_value_dominance(qa, qb):
    pair = tab_pair(qa, qb)
    v = clipped_values(pair.q_a, pair.q_b, np.arange(4))
    best = qa.argmax(axis=1)
    assert np.all(v <= qa.max(axis=1))
    assert np.all(v <= qb[np.arange(4), best])


def test_compute_targets_examples():
    pair = tab_pair([[1.0, 0.0], [1.0, 2.0]], [[0.0, 0.0], [3.0, 0.0]])
    _, _, values = compute_targets(pair, [Experience(0, 0, 0.5, 1, False)], 0.2, 0.99)
    assert values[0] == pytest.approx(0.9, abs=1e-12)
    pair = tab_pair([[0.0, 0.0]], [[0.0, 0.0]])
    _, _, values = compute_targets(pair, [Experience(0, 1, 1.0, 0, True)], 0.2, 0.99)
    assert values[0] == pytest.approx(0.2, abs=1e-12)
    pair = tab_pair([[-7.3, 4.0]], [[9.0, 9.0]])
    _, _, values = compute_targets(pair, [Experience(0, 0, 1.0, 0, True)], 1.0, 0.99)
    assert values[0] == 1.0


def test_truncated_transitions_bootstrap():
    pair = tab_pair([[0.0, 0.0], [1.0, 1.0]], [[0.0, 0.0], [1.0, 1.0]])
    _, _, values = compute_targets(pair, [Experience(0, 0, 0.0, 1, False)], 1.0, 0.5)
    assert values[0] == 0.5


def test_compute_targets_rejects_empty_batch():
    with pytest.raises(ValueError):
        compute_targets(tab_pair([[0.0]], [[0.0]]), [], 0.2, 0.99)


def test_swap_semantics():
    pair = tab_pair([[1.0, 2.0], [0.0, 0.0]], [[3.0, 0.0], [0.0, 0.0]])
    old_a, old_b = pair.q_a, pair.q_b
    before = old_a.table.copy()
    train_iteration(pair, [Experience(0, 0, 1.0, 1, True)], 0.2, 0.99)
    assert pair.q_b is old_a
    np.testing.assert_array_equal(pair.q_b.table, before)
    # the function that was q_b is the one that was trained
    assert pair.q_a is old_b and pair.q_a.table[0, 0] == pytest.approx(3.0 + 0.2 * (1.0 - 3.0))


def test_single_iteration_from_equal_functions_is_double_q_update():
    q = np.array([[0.5, 0.1], [0.2, 0.7]])
    pair = tab_pair(q, q)
    train_iteration(pair, [Experience(0, 0, 1.0, 1, False)], 0.2, 0.9)
    assert pair.q_a.table[0, 0] == pytest.approx(0.5 + 0.2 * (1.0 + 0.9 * 0.7 - 0.5))


def test_pair_dimension_check():
    with pytest.raises(ValueError):
        CriticPair(TabularFn(3, 2), TabularFn(3, 3))


def test_chain_converges_to_value_iteration():
    gamma = 0.99
    P, R, batch = chain_mdp(gamma)
    _, q_star = value_iteration(P, R, gamma, tolerance=1e-14)
    pair = tab_pair(np.zeros((3, 2)), np.zeros((3, 2)))
    for it in range(50):
        train_iteration(pair, batch, 1.0, gamma)
        if np.abs(pair.q_a.table[:2] - q_star[:2]).max() < 1e-10:
            break
    assert np.abs(pair.q_a.table[:2] - q_star[:2]).max() < 1e-10
    assert it < 50


def test_two_state_mdp_converges():
    gamma = 0.9
    # 0 <-> 1 cycle; action 1 in state 1 pays 1
    P = np.zeros((2, 2, 2))
    P[0, :, 1] = 1.0
    P[1, :, 0] = 1.0
    R = np.array([[0.0, 0.0], [0.0, 1.0]])
    _, q_star = value_iteration(P, R, gamma, tolerance=1e-14)
    batch = [Experience(s, a, R[s, a], 1 - s, False) for s in range(2) for a in range(2)]
    pair = tab_pair(np.zeros((2, 2)), np.zeros((2, 2)))
    for _ in range(800):
        train_iteration(pair, batch, 1.0, gamma)
    np.testing.assert_allclose(pair.q_a.table, q_star, atol=1e-10)


def test_dominance_on_fuzzed_updates():
    rng = np.random.default_rng(0)
    ens = tabular_ensemble(4, 6, 3, n_t=4, alpha=0.2, gamma=0.99)
    ens.tables[...] = rng.normal(size=ens.tables.shape)
    for step in range(1000):
        n = 8
        batch = Batch(rng.integers(6, size=n), rng.integers(3, size=n), rng.normal(size=n),
                      rng.integers(6, size=n), rng.random(n) < 0.1)
        pair = ens.critics[step % 4]
        pair.swap()
        states, actions, values = compute_targets(pair, batch, 0.2, 0.99)
        q = pair.q_a.table[batch.states, batch.actions]
        upper = q + 0.2 * (batch.rewards + 0.99 * np.where(
            batch.terminals, 0.0, pair.q_a.table[batch.next_states].max(axis=1)) - q)
        assert np.all(values <= upper + 1e-12)
        pair.q_a.fit(states, np.repeat(values[:, None], 3, axis=1),
                     mask=np.eye(3, dtype=bool)[actions])


def test_mlp_pair_training_moves_toward_targets():
    rng = np.random.default_rng(1)
    pair = CriticPair(MlpFn(4, 2, 8, rng, lr=1e-3), MlpFn(4, 2, 8, rng, lr=1e-3))
    x = np.eye(4)
    batch = Batch(x, np.array([0, 1, 0, 1]), np.ones(4), x[::-1].copy(), np.ones(4, dtype=bool))
    pair.swap()
    before = np.abs(pair.q_a.predict_batch(x)[np.arange(4), batch.actions] - 1.0).mean()
    pair.swap()
    for _ in range(10):
        train_iteration(pair, batch, 1.0, 0.99)
        train_iteration(pair, batch, 1.0, 0.99)  # return to the same function
    after = np.abs(pair.q_a.predict_batch(x)[np.arange(4), batch.actions] - 1.0).mean()
    assert after < before


@pytest.mark.parametrize("values, expected", [
    ([0.1, 0.9], [0, 1]),
    ([0.5, 0.5], [0.5, 0.5]),
    ([3, 1, 3, 0], [0.5, 0, 0.5, 0]),
])
def test_greedy_distribution_examples(values, expected):
    np.testing.assert_array_equal(greedy_distribution(values), expected)


@settings(max_examples=200, deadline=None)
@given(arrays(float, 5, elements=st.integers(-3, 3).map(float)), st.integers(-50, 50).map(float))
def test_greedy_distribution_properties(q, c):
    g = greedy_distribution(q)
    assert g.sum() == pytest.approx(1.0)
    np.testing.assert_array_equal(greedy_distribution(q + c), g)
