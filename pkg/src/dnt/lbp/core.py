"""Local binary pattern codes, uniform binning and multi-scale histogram descriptors.

Neighbor ``i`` of ``P`` sits at offset ``(-R sin(2 pi i / P), R cos(2 pi i / P))``
from the center (row, column), so ``i = 0`` is due east and indices run
counter-clockwise. With ``bilinear`` sampling, offsets within 1e-9 of an
integer are snapped and read directly and all other samples are bilinear.
With ``nearest`` sampling every offset is rounded to the nearest pixel; for
(8, 1) that is exactly the classic 3x3 ring, which is the default for that
config so its codes depend only on intensity order. Comparisons use the
unrounded sample, and ties count as set bits (``p_i - p_c >= 0``).
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import ConfigError, EmptyInteriorError, UsageError
from . import _backend

BLOCK_WIDTH = 256
SNAP_TOL = 1e-9
BINNINGS = ("raw256", "uniform")
SAMPLINGS = ("bilinear", "nearest")


@dataclass(frozen=True)
class LbpConfig:
    P: int
    R: float
    binning: str = ""
    sampling: str = ""

    def __post_init__(self):
        if self.P < 4:
            raise ConfigError(f"LBP needs P >= 4 neighbors, got {self.P}")
        if not self.R > 0:
            raise ConfigError(f"LBP radius must be positive, got {self.R}")
        if not self.binning:
            object.__setattr__(self, "binning", "raw256" if self.P == 8 else "uniform")
        if not self.sampling:
            square = self.P == 8 and self.R == 1
            object.__setattr__(self, "sampling", "nearest" if square else "bilinear")
        if self.sampling not in SAMPLINGS:
            raise ConfigError(f"unknown LBP sampling {self.sampling!r}")
        if self.binning not in BINNINGS:
            raise ConfigError(f"unknown LBP binning {self.binning!r}")
        if self.binning == "raw256" and self.P != 8:
            raise ConfigError(f"raw256 binning requires P == 8, got P={self.P}")
        if self.binning == "uniform" and not 4 <= self.P <= 24:
            raise ConfigError(f"uniform binning supports 4 <= P <= 24, got P={self.P}")
        if self.num_bins > BLOCK_WIDTH:
            raise ConfigError(f"P={self.P} uniform histogram has {self.num_bins} bins, "
                              f"more than the {BLOCK_WIDTH}-wide block")

    @classmethod
    def parse(cls, text):
        """Parse ``"P,R"``, ``"P,R,binning"`` or ``"P,R,binning,sampling"``."""
        parts = [p.strip() for p in str(text).split(",")]
        if len(parts) not in (2, 3, 4):
            raise ConfigError(f"LBP config must look like 'P,R[,binning[,sampling]]', got {text!r}")
        try:
            P = int(parts[0])
            R = float(parts[1])
        except ValueError:
            raise ConfigError(f"bad LBP config {text!r}") from None
        if R == int(R):
            R = int(R)
        return cls(P, R, *parts[2:])

    @property
    def border(self):
        return math.ceil(self.R)

    @property
    def num_bins(self):
        if self.binning == "raw256":
            return 256
        return self.P * (self.P - 1) + 3

    def __str__(self):
        default = LbpConfig(self.P, self.R)
        text = f"{self.P},{self.R:g}"
        if self.sampling != default.sampling:
            return f"{text},{self.binning},{self.sampling}"
        if self.binning != default.binning:
            return f"{text},{self.binning}"
        return text


DEFAULT_CONFIGS = (LbpConfig(8, 1), LbpConfig(8, 2), LbpConfig(16, 1), LbpConfig(16, 2))


@dataclass(frozen=True)
class SamplingGeometry:
    """Per-neighbor integer base offsets, fractional parts and exactness flags."""

    y0: np.ndarray
    x0: np.ndarray
    y1: np.ndarray
    x1: np.ndarray
    fy: np.ndarray
    fx: np.ndarray
    exact: np.ndarray


def _snap(v):
    r = round(v)
    return (float(r), True) if abs(v - r) < SNAP_TOL else (v, False)


@lru_cache(maxsize=None)
def sampling_geometry(P, R, sampling="bilinear"):
    y0, x0, y1, x1, fy, fx, exact = ([] for _ in range(7))
    for i in range(P):
        theta = 2.0 * math.pi * i / P
        dy, ey = _snap(-R * math.sin(theta))
        dx, ex = _snap(R * math.cos(theta))
        if sampling == "nearest":
            dy, dx, ey, ex = float(math.floor(dy + 0.5)), float(math.floor(dx + 0.5)), True, True
        by, bx = math.floor(dy), math.floor(dx)
        ry, rx = dy - by, dx - bx
        y0.append(by)
        x0.append(bx)
        # zero-weight rows/columns reuse the base index so reads stay in bounds
        y1.append(by + 1 if ry > 0 else by)
        x1.append(bx + 1 if rx > 0 else bx)
        fy.append(ry)
        fx.append(rx)
        exact.append(ey and ex)
    as_int = lambda a: np.asarray(a, dtype=np.int64)
    return SamplingGeometry(as_int(y0), as_int(x0), as_int(y1), as_int(x1),
                            np.asarray(fy, dtype=np.float64), np.asarray(fx, dtype=np.float64),
                            np.asarray(exact, dtype=np.uint8))


def to_grayscale(rgb):
    """ITU-R 601 luma, kept in floating point: (h, w, 3) -> (h, w)."""
    rgb = np.asarray(rgb, dtype=np.float64)
    return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]


def _as_gray(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 3 and img.shape[2] == 3:
        img = to_grayscale(img)
    elif img.ndim == 3 and img.shape[2] == 1:
        img = img[..., 0]
    if img.ndim != 2:
        raise UsageError(f"expected a grayscale (h, w) image, got shape {img.shape}")
    return np.ascontiguousarray(img)


def sample_neighbor(img, cy, cx, i, P, R, sampling="bilinear"):
    """Intensity of neighbor ``i`` around center ``(cy, cx)``."""
    img = _as_gray(img)
    b = math.ceil(R)
    h, w = img.shape
    if not (b <= cy < h - b and b <= cx < w - b):
        raise UsageError(f"center ({cy}, {cx}) is within {b} px of the border of a {h}x{w} image")
    g = sampling_geometry(P, R, sampling)
    y, x = cy + g.y0[i], cx + g.x0[i]
    if g.exact[i]:
        return float(img[y, x])
    ya, xa = cy + g.y1[i], cx + g.x1[i]
    top = img[y, x] + g.fx[i] * (img[y, xa] - img[y, x])
    bot = img[ya, x] + g.fx[i] * (img[ya, xa] - img[ya, x])
    return float(top + g.fy[i] * (bot - top))


def lbp_code_map(img, cfg, backend=None):
    """Code map over the interior (border of ``ceil(R)`` removed), dtype int64."""
    img = _as_gray(img)
    b = cfg.border
    h, w = img.shape
    if h < 2 * b + 1 or w < 2 * b + 1:
        raise EmptyInteriorError(f"{h}x{w} image has no interior for radius {cfg.R}")
    g = sampling_geometry(cfg.P, cfg.R, cfg.sampling)
    kernels = _backend.get(backend)
    return kernels.code_map(img, g.y0, g.x0, g.y1, g.x1, g.fy, g.fx, g.exact, b)


@lru_cache(maxsize=None)
def uniform_bin_map(P):
    """Lookup array: code -> bin. Uniform codes take bins 0.. in ascending code order;
    every non-uniform code maps to the final bin ``P*(P-1)+2``."""
    if not 4 <= P <= 24:
        raise ConfigError(f"uniform binning supports 4 <= P <= 24, got P={P}")
    nonuniform = P * (P - 1) + 2
    table = np.full(1 << P, nonuniform, dtype=np.int64)
    nxt = 0
    # uniform codes are runs of ones: enumerate (start, length) instead of all 2^P codes
    codes = {0, (1 << P) - 1}
    for length in range(1, P):
        run = (1 << length) - 1
        for start in range(P):
            codes.add(((run << start) | (run >> (P - start))) & ((1 << P) - 1))
    for code in sorted(codes):
        table[code] = nxt
        nxt += 1
    assert nxt == nonuniform
    table.setflags(write=False)
    return table


def histogram(codes, cfg, normalize=True):
    """256-wide histogram block for one config (uniform bins zero-padded)."""
    codes = np.asarray(codes).reshape(-1)
    if cfg.binning == "raw256":
        if cfg.P != 8:
            raise ConfigError(f"raw256 binning requires P == 8, got P={cfg.P}")
        counts = np.bincount(codes, minlength=256)[:256]
    else:
        counts = np.bincount(uniform_bin_map(cfg.P)[codes], minlength=cfg.num_bins)
    block = np.zeros(BLOCK_WIDTH, dtype=np.float64)
    block[:counts.size] = counts
    if normalize:
        total = block.sum()
        if total > 0:
            block /= total
    return block


@dataclass
class TextureDescriptor:
    values: np.ndarray
    layout: list  # (LbpConfig, offset, length) per block

    def __len__(self):
        return int(self.values.size)

    def block(self, k):
        _, off, length = self.layout[k]
        return self.values[off:off + length]


def texture_descriptor(img, configs=DEFAULT_CONFIGS, normalize=True, backend=None):
    """Concatenated per-config histogram blocks, in the given config order."""
    configs = list(configs)
    if not configs:
        raise UsageError("at least one LBP config is required")
    gray = _as_gray(img)
    blocks, layout = [], []
    for k, cfg in enumerate(configs):
        blocks.append(histogram(lbp_code_map(gray, cfg, backend), cfg, normalize))
        layout.append((cfg, k * BLOCK_WIDTH, BLOCK_WIDTH))
    return TextureDescriptor(np.concatenate(blocks), layout)


def descriptor_width(configs):
    return BLOCK_WIDTH * len(configs)


def batch_descriptors(images, configs=DEFAULT_CONFIGS, normalize=True, backend=None):
    """(n, h, w[, 3]) images -> (n, 256 * len(configs)) float64 array."""
    return np.stack([texture_descriptor(im, configs, normalize, backend).values for im in images])
