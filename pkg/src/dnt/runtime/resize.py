"""Align-corners bilinear resize as a pair of separable interpolation matrices."""

import numpy as np

from ..errors import ConfigError
from .layers import Layer


def interp_matrix(n_in, n_out, dtype=np.float64):
    """(n_out, n_in) matrix whose row i holds the align-corners weights for output i."""
    if n_in < 1 or n_out < 1:
        raise ConfigError(f"resize extents must be >= 1, got {n_in} -> {n_out}")
    m = np.zeros((n_out, n_in), dtype=dtype)
    for i in range(n_out):
        src = 0.0 if n_out == 1 else i * (n_in - 1) / (n_out - 1)
        i0 = min(int(np.floor(src)), n_in - 1)
        frac = src - i0
        m[i, i0] += 1.0 - frac
        if frac > 0.0:
            m[i, i0 + 1] += frac
    return m


class BilinearResize(Layer):
    """Resize NHWC maps to (out_h, out_w); backward scatters the same weights."""

    def __init__(self, out_h, out_w):
        if out_h < 1 or out_w < 1:
            raise ConfigError(f"resize target must be >= 1, got {out_h}x{out_w}")
        self.out_h = out_h
        self.out_w = out_w
        self._mats = {}

    def _matrices(self, h, w, dtype):
        key = (h, w, np.dtype(dtype).str)
        if key not in self._mats:
            self._mats[key] = (interp_matrix(h, self.out_h, dtype), interp_matrix(w, self.out_w, dtype))
        return self._mats[key]

    def forward(self, x):
        n, h, w, c = x.shape
        self._shape = x.shape
        if (h, w) == (self.out_h, self.out_w):
            return x.copy()
        ry, rx = self._matrices(h, w, x.dtype)
        return np.einsum("oh,nhwc,pw->nopc", ry, x, rx, optimize=True)

    def backward(self, dy):
        n, h, w, c = self._shape
        if (h, w) == (self.out_h, self.out_w):
            return dy.copy()
        ry, rx = self._matrices(h, w, dy.dtype)
        return np.einsum("oh,nopc,pw->nhwc", ry, dy, rx, optimize=True)


def bilinear_resize(img, out_h, out_w):
    """Resize a single (h, w, c) map."""
    return BilinearResize(out_h, out_w).forward(img[None])[0]
