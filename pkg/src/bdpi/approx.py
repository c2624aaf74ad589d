"""Function approximators shared by critics and actors.

Both approximators expose the same surface: ``predict``, ``predict_batch``,
``fit`` (mean-squared-error regression), ``step_output_gradient`` (one
optimizer step given dLoss/dOutput) and ``params``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    """Adam moments for one flat parameter vector."""
    size: int
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.m is None:
            self.m = np.zeros(self.size)
        if self.v is None:
            self.v = np.zeros(self.size)

    def step(self, params: np.ndarray, grad: np.ndarray) -> None:
        """Apply one in-place Adam update to ``params``."""
        self.t += 1
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _check_targets(targets):
    targets = np.asarray(targets, dtype=float)
    if not np.all(np.isfinite(targets)):
        raise ValueError("fit targets must be finite")
    return targets


class TabularFn:
    """One row of ``n_outputs`` values per discrete state.

    States are integer indices, or one-hot vectors which are decoded with argmax.
    ``fit`` is exact: every supplied cell is overwritten by the mean of the
    targets given for it (the least-squares solution when a state repeats).
    """

    def __init__(self, n_states: int, n_outputs: int, table: np.ndarray | None = None,
                 fill: float = 0.0, lr: float = 1e-4):
        self.n_inputs = n_states
        self.n_outputs = n_outputs
        if table is None:
            table = np.full((n_states, n_outputs), fill, dtype=float)
        if table.shape != (n_states, n_outputs):
            raise ValueError(f"table shape {table.shape} != {(n_states, n_outputs)}")
        self.table = table
        self.adam = AdamState(table.size, lr=lr)

    @property
    def params(self) -> list[np.ndarray]:
        return [self.table]

    def _index(self, states) -> np.ndarray:
        states = np.asarray(states)
        if states.ndim == 2:
            if states.shape[1] != self.n_inputs:
                raise ValueError(f"expected one-hot states of length {self.n_inputs}")
            return states.argmax(axis=1)
        idx = states.astype(np.int64).reshape(-1)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n_inputs):
            raise ValueError("state index out of range")
        return idx

    def state_index(self, state) -> int:
        state = np.asarray(state)
        if state.ndim == 1:
            if state.shape[0] != self.n_inputs:
                raise ValueError(f"expected a one-hot state of length {self.n_inputs}")
            return int(state.argmax())
        s = int(state)
        if not 0 <= s < self.n_inputs:
            raise ValueError("state index out of range")
        return s

    def predict(self, state) -> np.ndarray:
        return self.table[self.state_index(state)].copy()

    def predict_batch(self, states) -> np.ndarray:
        return self.table[self._index(states)]

    def fit(self, states, targets, mask=None, epochs: int = 1) -> None:
        if epochs <= 0:
            return
        idx = self._index(states)
        targets = _check_targets(targets).reshape(len(idx), self.n_outputs)
        if mask is None:
            mask = np.ones(targets.shape, dtype=bool)
        rows, cols = np.nonzero(mask)
        cells = idx[rows] * self.n_outputs + cols
        sums = np.zeros(self.table.size)
        counts = np.zeros(self.table.size)
        np.add.at(sums, cells, targets[rows, cols])
        np.add.at(counts, cells, 1.0)
        hit = counts > 0
        flat = self.table.reshape(-1)
        flat[hit] = sums[hit] / counts[hit]

    def step_output_gradient(self, states, grad_out) -> None:
        idx = self._index(states)
        grad = np.zeros_like(self.table)
        np.add.at(grad, idx, grad_out)
        self.adam.step(self.table.reshape(-1), grad.reshape(-1))

    def copy(self) -> "TabularFn":
        out = TabularFn(self.n_inputs, self.n_outputs, self.table.copy(), lr=self.adam.lr)
        return out


class MlpFn:
    """tanh hidden layer followed by a linear output layer, trained with Adam.

    The four parameter arrays are views into one flat vector so that the
    optimizer works on a single array.
    """

    def __init__(self, n_inputs: int, n_outputs: int, hidden: int = 32,
                 rng: np.random.Generator | None = None, lr: float = 1e-4):
        self.n_inputs = n_inputs
        self.n_outputs = n_outputs
        self.hidden = hidden
        self.shapes = [(n_inputs, hidden), (hidden,), (hidden, n_outputs), (n_outputs,)]
        sizes = [int(np.prod(s)) for s in self.shapes]
        self.theta = np.zeros(sum(sizes))
        self._grad = np.zeros_like(self.theta)
        self.w1, self.b1, self.w2, self.b2 = self._views(self.theta)
        self.g_w1, self.g_b1, self.g_w2, self.g_b2 = self._views(self._grad)
        if rng is not None:
            self.w1[...] = rng.uniform(-1, 1, self.w1.shape) / np.sqrt(n_inputs)
            self.w2[...] = rng.uniform(-1, 1, self.w2.shape) / np.sqrt(hidden)
        self.adam = AdamState(self.theta.size, lr=lr)

    def _views(self, flat):
        out, offset = [], 0
        for shape in self.shapes:
            n = int(np.prod(shape))
            out.append(flat[offset:offset + n].reshape(shape))
            offset += n
        return out

    @property
    def params(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]

    def _inputs(self, states) -> np.ndarray:
        x = np.asarray(states, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.n_inputs:
            raise ValueError(f"expected states of shape (n, {self.n_inputs}), got {x.shape}")
        return x

    def predict(self, state) -> np.ndarray:
        x = np.asarray(state, dtype=float)
        if x.shape != (self.n_inputs,):
            raise ValueError(f"expected a state of shape ({self.n_inputs},), got {x.shape}")
        return np.tanh(x @ self.w1 + self.b1) @ self.w2 + self.b2

    def predict_batch(self, states) -> np.ndarray:
        x = self._inputs(states)
        return np.tanh(x @ self.w1 + self.b1) @ self.w2 + self.b2

    def loss(self, states, targets) -> float:
        diff = self.predict_batch(states) - targets
        return float(np.mean(diff * diff))

    def backward(self, x: np.ndarray, h: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
        """Parameter gradient (flat, shared buffer) given dLoss/dOutput."""
        np.dot(h.T, grad_out, out=self.g_w2)
        grad_out.sum(axis=0, out=self.g_b2)
        dh = (grad_out @ self.w2.T) * (1.0 - h * h)
        np.dot(x.T, dh, out=self.g_w1)
        dh.sum(axis=0, out=self.g_b1)
        return self._grad

    def gradient(self, states, targets) -> list[np.ndarray]:
        """d(MSE)/d(params), the MSE being averaged over every output of every sample."""
        x = self._inputs(states)
        h = np.tanh(x @ self.w1 + self.b1)
        y = h @ self.w2 + self.b2
        grad_out = (2.0 / y.size) * (y - targets)
        self.backward(x, h, grad_out)
        return [g.copy() for g in self._views(self._grad)]

    def fit(self, states, targets, mask=None, epochs: int = 1) -> None:
        """``epochs`` full-batch Adam steps on the MSE.

        With a mask, unmasked outputs are pinned to their current predictions.
        """
        if epochs <= 0:
            return
        x = self._inputs(states)
        targets = _check_targets(targets)
        if mask is not None:
            targets = np.where(mask, targets, self.predict_batch(x))
        scale = 2.0 / targets.size
        for _ in range(epochs):
            h = np.tanh(x @ self.w1 + self.b1)
            y = h @ self.w2 + self.b2
            self.adam.step(self.theta, self.backward(x, h, scale * (y - targets)))

    def step_output_gradient(self, states, grad_out) -> None:
        x = self._inputs(states)
        h = np.tanh(x @ self.w1 + self.b1)
        self.adam.step(self.theta, self.backward(x, h, np.asarray(grad_out, dtype=float)))

    def copy(self) -> "MlpFn":
        out = MlpFn(self.n_inputs, self.n_outputs, self.hidden, lr=self.adam.lr)
        out.theta[:] = self.theta
        return out


# --------------------------------------------------------------------------
# Parameter snapshots: uint32 array count, then per array uint32 ndim and
# uint32 dims, then every array as little-endian float64 in declared order.


def save_params(fn, path) -> None:
    arrays = fn.params
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(arrays)))
        for a in arrays:
            fh.write(struct.pack("<I", a.ndim))
            fh.write(struct.pack(f"<{a.ndim}I", *a.shape))
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def read_params(path) -> list[np.ndarray]:
    with open(path, "rb") as fh:
        data = fh.read()
    (count,), offset = struct.unpack_from("<I", data), 4
    shapes = []
    for _ in range(count):
        (ndim,) = struct.unpack_from("<I", data, offset)
        offset += 4
        shapes.append(struct.unpack_from(f"<{ndim}I", data, offset))
        offset += 4 * ndim
    out = []
    for shape in shapes:
        n = int(np.prod(shape))
        out.append(np.frombuffer(data, dtype="<f8", count=n, offset=offset).reshape(shape).copy())
        offset += 8 * n
    if offset != len(data):
        raise ValueError(f"{path}: trailing bytes in parameter snapshot")
    return out


def load_params(fn, path) -> None:
    arrays = read_params(path)
    if [a.shape for a in arrays] != [p.shape for p in fn.params]:
        raise ValueError(f"{path}: snapshot shapes do not match the approximator")
    for dst, src in zip(fn.params, arrays):
        dst[...] = src
