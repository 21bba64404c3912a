"""splitmix64 pseudo-random generator.

splitmix64 is a counter-based mixer, so a block of ``n`` outputs can be
computed with vectorised uint64 arithmetic and still match the scalar
sequence bit for bit. Every stochastic draw in the package (weight init,
dropout masks, augmentation, shuffling, synthetic data) goes through this
class so runs are reproducible across platforms.
"""

import math

import numpy as np

_GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1


def _mix(z):
    z = ((z ^ (z >> 30)) * _MUL1) & _MASK
    z = ((z ^ (z >> 27)) * _MUL2) & _MASK
    return z ^ (z >> 31)


def _mix_array(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
    return z ^ (z >> np.uint64(31))


class Rng:
    """splitmix64 generator with a 64-bit state."""

    def __init__(self, seed=0):
        self.state = int(seed) & _MASK

    @classmethod
    def substream(cls, *keys):
        """Derive an independent generator from an ordered tuple of integer keys.

        ``Rng.substream(seed, epoch, index)`` always yields the same stream,
        regardless of how many draws were taken elsewhere.
        """
        state = 0x243F6A8885A308D3
        for key in keys:
            state = _mix(((state ^ (int(key) & _MASK)) + _GOLDEN) & _MASK)
        return cls(state)

    def next_u64(self):
        self.state = (self.state + _GOLDEN) & _MASK
        return _mix(self.state)

    def u64(self, n):
        """Next ``n`` outputs as a uint64 array (same values as ``n`` calls of next_u64)."""
        n = int(n)
        if n <= 0:
            return np.zeros(0, dtype=np.uint64)
        steps = np.arange(1, n + 1, dtype=np.uint64) * np.uint64(_GOLDEN)
        with np.errstate(over="ignore"):
            counters = np.uint64(self.state) + steps
            out = _mix_array(counters)
        self.state = (self.state + n * _GOLDEN) & _MASK
        return out

    def uniform(self, size=None, low=0.0, high=1.0):
        """Floats in ``[low, high)`` built from the top 53 bits of each output."""
        if size is None:
            u = (self.next_u64() >> 11) * (1.0 / (1 << 53))
            return low + (high - low) * u
        shape = (size,) if isinstance(size, int) else tuple(size)
        n = int(np.prod(shape)) if shape else 1
        u = (self.u64(n) >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
        return (low + (high - low) * u).reshape(shape)

    def normal(self, size, mean=0.0, std=1.0):
        """Box-Muller normals."""
        shape = (size,) if isinstance(size, int) else tuple(size)
        n = int(np.prod(shape)) if shape else 1
        m = (n + 1) // 2
        u1 = self.uniform(m)
        u2 = self.uniform(m)
        r = np.sqrt(-2.0 * np.log1p(-u1))  # 1 - u1 lies in (0, 1]
        z = np.concatenate([r * np.cos(2 * math.pi * u2), r * np.sin(2 * math.pi * u2)])
        return (mean + std * z[:n]).reshape(shape)

    def integers(self, low, high):
        """Single integer uniform in ``[low, high)``."""
        if high <= low:
            raise ValueError(f"empty integer range [{low}, {high})")
        return low + int(self.uniform() * (high - low))

    def permutation(self, n):
        """Fisher-Yates shuffle of ``range(n)``."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.integers(0, i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm
