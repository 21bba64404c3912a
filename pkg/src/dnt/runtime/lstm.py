"""Single-layer fully gated LSTM with backpropagation through time."""

import numpy as np

from ..errors import ConfigError, UsageError
from .layers import Layer, Parameter


def sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class LSTMCell(Layer):
    """LSTM cell with gate blocks ordered (input, forget, output, candidate).

    ``w_input`` is (c, 4v), ``w_hidden`` is (v, 4v) and ``bias`` is (4v,), so
    the parameter count is ``4 * (c*v + v*v + v)``. Initial hidden and cell
    states are zero.
    """

    def __init__(self, input_size, hidden_size, rng=None, forget_bias=1.0,
                 dtype=np.float64, name="lstm"):
        if input_size < 1 or hidden_size < 1:
            raise ConfigError("LSTM sizes must be positive")
        c, v = input_size, hidden_size
        self.input_size = c
        self.hidden_size = v
        if rng is None:
            wx = np.zeros((c, 4 * v), dtype=dtype)
            wh = np.zeros((v, 4 * v), dtype=dtype)
            b = np.zeros(4 * v, dtype=dtype)
        else:
            bound = 1.0 / np.sqrt(v)
            wx = rng.uniform((c, 4 * v), -bound, bound).astype(dtype)
            wh = rng.uniform((v, 4 * v), -bound, bound).astype(dtype)
            b = np.zeros(4 * v, dtype=dtype)
            b[v:2 * v] = forget_bias
        self.w_input = Parameter(f"{name}.w_input", wx)
        self.w_hidden = Parameter(f"{name}.w_hidden", wh)
        self.bias = Parameter(f"{name}.bias", b)

    def parameters(self):
        return [self.w_input, self.w_hidden, self.bias]

    @property
    def num_parameters(self):
        return sum(p.size for p in self.parameters())

    def step(self, x, h, c):
        """One recurrence step on a batch; returns (h_next, c_next, cache)."""
        v = self.hidden_size
        z = x @ self.w_input.value + h @ self.w_hidden.value + self.bias.value
        i = sigmoid(z[:, :v])
        f = sigmoid(z[:, v:2 * v])
        o = sigmoid(z[:, 2 * v:3 * v])
        g = np.tanh(z[:, 3 * v:])
        c_next = f * c + i * g
        tc = np.tanh(c_next)
        h_next = o * tc
        return h_next, c_next, (x, h, c, i, f, o, g, tc)

    def forward(self, xs):
        """Run over a (batch, steps, c) sequence and return the final hidden state (batch, v)."""
        if xs.ndim == 2:
            xs = xs[None]
        n, t, c = xs.shape
        if t == 0:
            raise UsageError("LSTM input sequence is empty")
        if c != self.input_size:
            raise ConfigError(f"LSTM expects input extent {self.input_size}, got {c}")
        h = np.zeros((n, self.hidden_size), dtype=xs.dtype)
        cell = np.zeros_like(h)
        self._caches = []
        for step in range(t):
            h, cell, cache = self.step(xs[:, step, :], h, cell)
            self._caches.append(cache)
        return h

    def backward(self, dh_last):
        """BPTT from the gradient on the final hidden state; returns d(xs)."""
        v = self.hidden_size
        caches = self._caches
        n = dh_last.shape[0]
        dxs = np.empty((n, len(caches), self.input_size), dtype=dh_last.dtype)
        dh = dh_last
        dc = np.zeros_like(dh_last)
        wx, wh = self.w_input.value, self.w_hidden.value
        for step in range(len(caches) - 1, -1, -1):
            x, h_prev, c_prev, i, f, o, g, tc = caches[step]
            do = dh * tc
            dc = dc + dh * o * (1.0 - tc * tc)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dz = np.empty((n, 4 * v), dtype=dh.dtype)
            dz[:, :v] = di * i * (1.0 - i)
            dz[:, v:2 * v] = df * f * (1.0 - f)
            dz[:, 2 * v:3 * v] = do * o * (1.0 - o)
            dz[:, 3 * v:] = dg * (1.0 - g * g)
            self.w_input.grad += x.T @ dz
            self.w_hidden.grad += h_prev.T @ dz
            self.bias.grad += dz.sum(axis=0)
            dxs[:, step, :] = dz @ wx.T
            dh = dz @ wh.T
            dc = dc * f
        return dxs


def lstm_sequence(cell, inputs):
    """Encode a list of c-vectors with ``cell``; returns the final hidden state (v,)."""
    if len(inputs) == 0:
        raise UsageError("LSTM input sequence is empty")
    xs = np.stack([np.asarray(x).reshape(-1) for x in inputs])[None]
    return cell.forward(xs)[0]
