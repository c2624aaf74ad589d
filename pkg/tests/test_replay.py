import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from bdpi.replay import BufferNotReady, Experience, ReplayBuffer


def exp(i, dim=None):
    state = i if dim is None else np.full(dim, float(i))
    return Experience(state, i % 3, float(i), state, i % 7 == 0)


def test_push_into_empty():
    buf = ReplayBuffer(10)
    buf.push(exp(0))
    assert len(buf) == 1


def test_fifo_eviction():
    buf = ReplayBuffer(20000)
    for i in range(20001):
        buf.push(exp(i))
    assert len(buf) == 20000
    entries = buf.entries()
    assert entries[0].state == 1 and entries[-1].state == 20000


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 30), st.integers(0, 100))
def test_contents_are_last_pushes_in_order(capacity, n):
    buf = ReplayBuffer(capacity)
    for i in range(n):
        buf.push(exp(i, dim=2))
    kept = list(range(max(0, n - capacity), n))
    assert [int(e.state[0]) for e in buf.entries()] == kept
    assert [e.reward for e in buf.entries()] == [float(i) for i in kept]


def test_single_entry_sampled_with_replacement():
    buf = ReplayBuffer(5, min_fill=1)
    buf.push(exp(4))
    batch = buf.sample_batch(3, np.random.default_rng(0))
    assert batch == [exp(4)] * 3


def test_not_ready():
    buf = ReplayBuffer(100, min_fill=256)
    for i in range(100):
        buf.push(exp(i))
    assert not buf.ready
    with pytest.raises(BufferNotReady):
        buf.sample_batch(10, np.random.default_rng(0))


def test_batch_size():
    buf = ReplayBuffer(20000, min_fill=256)
    for i in range(20000):
        buf.push(exp(i))
    assert len(buf.sample_batch(256, np.random.default_rng(0))) == 256


def test_sampling_is_uniform():
    buf = ReplayBuffer(100)
    for i in range(150):  # wrapped buffer
        buf.push(exp(i))
    rng = np.random.default_rng(7)
    draws = buf.arrays(buf.sample_indices(100_000, rng)).states
    counts = np.bincount(draws - 50, minlength=100)
    assert counts.min() > 0 and len(counts) == 100
    assert stats.chisquare(counts).pvalue > 0.01


def test_sampling_does_not_mutate():
    buf = ReplayBuffer(50)
    for i in range(70):
        buf.push(exp(i, dim=3))
    before = buf.entries()
    buf.sample_batch(500, np.random.default_rng(0))
    after = buf.entries()
    assert len(before) == len(after)
    for a, b in zip(before, after):
        np.testing.assert_array_equal(a.state, b.state)
        assert a[1:3] == b[1:3] and a.terminal == b.terminal


def test_independent_batches_per_critic():
    buf = ReplayBuffer(1000)
    for i in range(1000):
        buf.push(exp(i))
    pos = buf.sample_indices((16, 256), np.random.default_rng(0))
    assert pos.shape == (16, 256)
    assert len({tuple(row) for row in pos}) == 16
