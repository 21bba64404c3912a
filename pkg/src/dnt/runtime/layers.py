"""Layers with hand-written forward and backward passes.

Feature maps are NHWC numpy arrays (batch, height, width, channels); dense
inputs are (batch, features). Every layer caches what its backward needs
during ``forward`` and accumulates parameter gradients into
``Parameter.grad`` during ``backward``.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ConfigError


@dataclass
class Parameter:
    name: str
    value: np.ndarray
    grad: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.grad is None:
            self.grad = np.zeros_like(self.value)

    @property
    def size(self):
        return int(self.value.size)

    def zero_grad(self):
        self.grad[...] = 0.0


class Layer:
    """Base class: parameter-free, identity-free plumbing for train/eval mode."""

    training = True

    def parameters(self):
        return []

    def buffers(self):
        """Non-trainable state that must survive a checkpoint round trip."""
        return []

    def train(self, mode=True):
        self.training = mode
        return self

    def eval(self):
        return self.train(False)


def he_normal(rng, shape, fan_in, dtype):
    return (rng.normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)


class Conv2d(Layer):
    """2-D cross-correlation, kernels stored as (k, k, cin, cout)."""

    def __init__(self, in_channels, out_channels, kernel_size=3, stride=1, padding=0,
                 bias=True, rng=None, dtype=np.float64, name="conv"):
        if stride < 1:
            raise ConfigError(f"{name}: stride must be >= 1, got {stride}")
        if padding < 0:
            raise ConfigError(f"{name}: padding must be >= 0, got {padding}")
        self.k = kernel_size
        self.stride = stride
        self.padding = padding
        self.in_channels = in_channels
        self.out_channels = out_channels
        shape = (kernel_size, kernel_size, in_channels, out_channels)
        if rng is None:
            w = np.zeros(shape, dtype=dtype)
        else:
            w = he_normal(rng, shape, kernel_size * kernel_size * in_channels, dtype)
        self.weight = Parameter(f"{name}.weight", w)
        self.bias = Parameter(f"{name}.bias", np.zeros(out_channels, dtype=dtype)) if bias else None

    def parameters(self):
        return [self.weight] + ([self.bias] if self.bias is not None else [])

    def output_size(self, h, w):
        p, k, s = self.padding, self.k, self.stride
        if k > h + 2 * p or k > w + 2 * p:
            raise ConfigError(f"kernel {k} larger than padded input {h + 2 * p}x{w + 2 * p}")
        return (h + 2 * p - k) // s + 1, (w + 2 * p - k) // s + 1

    def forward(self, x):
        n, h, w, c = x.shape
        if c != self.in_channels:
            raise ConfigError(f"conv expects {self.in_channels} input channels, got {c}")
        ho, wo = self.output_size(h, w)
        p, k, s = self.padding, self.k, self.stride
        xp = np.pad(x, ((0, 0), (p, p), (p, p), (0, 0))) if p else x
        # (n, ho, wo, c, k, k) -> (n, ho, wo, k, k, c) to match kernel layout
        win = sliding_window_view(xp, (k, k), axis=(1, 2))[:, ::s, ::s][:, :ho, :wo]
        cols = win.transpose(0, 1, 2, 4, 5, 3).reshape(n * ho * wo, k * k * c)
        out = cols @ self.weight.value.reshape(k * k * c, self.out_channels)
        if self.bias is not None:
            out += self.bias.value
        self._cache = (cols, xp.shape, x.shape, ho, wo)
        return out.reshape(n, ho, wo, self.out_channels)

    def backward(self, dy):
        cols, xp_shape, x_shape, ho, wo = self._cache
        k, s, p = self.k, self.stride, self.padding
        c = self.in_channels
        dy2 = dy.reshape(-1, self.out_channels)
        self.weight.grad += (cols.T @ dy2).reshape(self.weight.value.shape)
        if self.bias is not None:
            self.bias.grad += dy2.sum(axis=0)
        dcols = (dy2 @ self.weight.value.reshape(k * k * c, -1).T).reshape(-1, ho, wo, k, k, c)
        dxp = np.zeros(xp_shape, dtype=dy.dtype)
        for i in range(k):
            for j in range(k):
                dxp[:, i:i + s * (ho - 1) + 1:s, j:j + s * (wo - 1) + 1:s, :] += dcols[:, :, :, i, j, :]
        if p:
            dxp = dxp[:, p:p + x_shape[1], p:p + x_shape[2], :]
        return dxp


class Dense(Layer):
    """Affine map x @ W + b with W of shape (in, out)."""

    def __init__(self, in_features, out_features, bias=True, rng=None, dtype=np.float64,
                 name="dense"):
        self.in_features = in_features
        self.out_features = out_features
        if rng is None:
            w = np.zeros((in_features, out_features), dtype=dtype)
        else:
            w = he_normal(rng, (in_features, out_features), in_features, dtype)
        self.weight = Parameter(f"{name}.weight", w)
        self.bias = Parameter(f"{name}.bias", np.zeros(out_features, dtype=dtype)) if bias else None

    def parameters(self):
        return [self.weight] + ([self.bias] if self.bias is not None else [])

    def forward(self, x):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ConfigError(f"dense expects (batch, {self.in_features}) input, got {x.shape}")
        self._x = x
        out = x @ self.weight.value
        if self.bias is not None:
            out = out + self.bias.value
        return out

    def backward(self, dy):
        self.weight.grad += self._x.T @ dy
        if self.bias is not None:
            self.bias.grad += dy.sum(axis=0)
        return dy @ self.weight.value.T


class ReLU(Layer):
    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0).astype(x.dtype, copy=False)

    def backward(self, dy):
        return np.where(self._mask, dy, 0.0).astype(dy.dtype, copy=False)


class MaxPool2(Layer):
    """2x2 max pooling with stride 2; odd trailing rows/columns are dropped."""

    def forward(self, x):
        n, h, w, c = x.shape
        h2, w2 = h // 2, w // 2
        if h2 == 0 or w2 == 0:
            raise ConfigError(f"cannot 2x2-pool a {h}x{w} map")
        blocks = x[:, :2 * h2, :2 * w2, :].reshape(n, h2, 2, w2, 2, c)
        blocks = blocks.transpose(0, 1, 3, 5, 2, 4).reshape(n, h2, w2, c, 4)
        idx = blocks.argmax(axis=-1)
        self._cache = (x.shape, idx)
        return np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]

    def backward(self, dy):
        shape, idx = self._cache
        n, h, w, c = shape
        h2, w2 = h // 2, w // 2
        d = np.zeros((n, h2, w2, c, 4), dtype=dy.dtype)
        np.put_along_axis(d, idx[..., None], dy[..., None], axis=-1)
        d = d.reshape(n, h2, w2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3).reshape(n, 2 * h2, 2 * w2, c)
        dx = np.zeros(shape, dtype=dy.dtype)
        dx[:, :2 * h2, :2 * w2, :] = d
        return dx


class BatchNorm(Layer):
    """Per-channel batch normalisation over every axis but the last.

    Running statistics follow ``running = momentum * running + (1 - momentum) * batch``.
    """

    def __init__(self, channels, momentum=0.9, eps=1e-5, dtype=np.float64, name="bn"):
        self.momentum = momentum
        self.eps = eps
        self.gamma = Parameter(f"{name}.gamma", np.ones(channels, dtype=dtype))
        self.beta = Parameter(f"{name}.beta", np.zeros(channels, dtype=dtype))
        self.running_mean = Parameter(f"{name}.running_mean", np.zeros(channels, dtype=dtype))
        self.running_var = Parameter(f"{name}.running_var", np.ones(channels, dtype=dtype))

    def parameters(self):
        return [self.gamma, self.beta]

    def buffers(self):
        return [self.running_mean, self.running_var]

    def forward(self, x):
        axes = tuple(range(x.ndim - 1))
        if self.training:
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            m = self.momentum
            self.running_mean.value[...] = m * self.running_mean.value + (1 - m) * mean
            self.running_var.value[...] = m * self.running_var.value + (1 - m) * var
        else:
            mean = self.running_mean.value
            var = self.running_var.value
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * inv_std
        self._cache = (xhat, inv_std, axes, self.training)
        return xhat * self.gamma.value + self.beta.value

    def backward(self, dy):
        xhat, inv_std, axes, training = self._cache
        self.gamma.grad += (dy * xhat).sum(axis=axes)
        self.beta.grad += dy.sum(axis=axes)
        dxhat = dy * self.gamma.value
        if not training:
            return dxhat * inv_std
        m = np.prod([dy.shape[a] for a in axes])
        return (inv_std / m) * (m * dxhat - dxhat.sum(axis=axes) - xhat * (dxhat * xhat).sum(axis=axes))


class Dropout(Layer):
    """Inverted dropout: survivors scaled by 1/(1 - rate) in training, identity at inference."""

    def __init__(self, rate, rng=None):
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
        self.rate = rate
        self.rng = rng

    def forward(self, x):
        if not self.training or self.rate == 0.0:
            self._mask = None
            return x
        if self.rng is None:
            raise ConfigError("dropout in training mode needs a seeded rng")
        keep = self.rng.uniform(x.shape) >= self.rate
        self._mask = (keep / (1.0 - self.rate)).astype(x.dtype)
        return x * self._mask

    def backward(self, dy):
        return dy if self._mask is None else dy * self._mask


class GlobalAvgPool(Layer):
    """Spatial mean: (n, h, w, c) -> (n, c)."""

    def forward(self, x):
        self._shape = x.shape
        return x.mean(axis=(1, 2))

    def backward(self, dy):
        n, h, w, c = self._shape
        return np.broadcast_to(dy[:, None, None, :] / (h * w), self._shape).copy()


def global_average_pool(x):
    """Single map (h, w, c) -> (1, 1, c)."""
    return x.mean(axis=(0, 1), keepdims=True)
