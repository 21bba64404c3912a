"""Deterministic augmentation: scale, rotate, crop and random region erasing.

Training order is scale -> rotate -> crop -> erase; evaluation applies only
a center crop. Each sample draws from its own substream
``Rng.substream(seed, epoch, sample_index)``, so any augmented view can be
reproduced in isolation.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, UsageError
from ..runtime.resize import bilinear_resize
from .rng import Rng

FILL = 127.0


@dataclass
class AugmentationConfig:
    rotation_degrees: float = 25.0
    scale_jitter: float = 0.25
    crop_size: int = 56
    erase: bool = True
    erase_scale: tuple = (0.2, 0.8)
    fill: float = FILL
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.erase_scale
        if not 0 < lo <= hi < 1:
            raise ConfigError(f"erase scale range must lie within (0, 1), got {self.erase_scale}")
        if not 0 <= self.scale_jitter < 1:
            raise ConfigError(f"scale jitter must lie in [0, 1), got {self.scale_jitter}")
        if self.crop_size < 1:
            raise ConfigError(f"crop size must be positive, got {self.crop_size}")


def _side(u, n, lo, hi):
    # floor(u * n), kept inside [ceil(lo * n), floor(hi * n)] so the realised
    # fraction honours the scale range too
    side = int(math.floor(u * n))
    return min(max(side, math.ceil(lo * n)), int(math.floor(hi * n)))


def erase_region(shape, cfg, rng):
    """Draw ``(top, left, height, width)`` of an erase rectangle inside an (h, w) image.

    Height and width fractions are drawn independently from ``cfg.erase_scale``.
    """
    h, w = shape[:2]
    lo, hi = cfg.erase_scale
    eh = _side(rng.uniform(low=lo, high=hi), h, lo, hi)
    ew = _side(rng.uniform(low=lo, high=hi), w, lo, hi)
    top = rng.integers(0, h - eh + 1)
    left = rng.integers(0, w - ew + 1)
    return top, left, eh, ew


def random_erase(img, cfg, rng):
    """Copy of ``img`` with one random rectangle set to ``cfg.fill`` in every channel."""
    if not cfg.erase:
        return img
    top, left, eh, ew = erase_region(img.shape, cfg, rng)
    out = np.array(img, dtype=np.float64, copy=True)
    out[top:top + eh, left:left + ew] = cfg.fill
    return out


def _bilinear_gather(img, ys, xs, fill):
    h, w = img.shape[:2]
    tol = 1e-9  # trig round-off must not push edge samples out of frame
    inside = (ys >= -tol) & (ys <= h - 1 + tol) & (xs >= -tol) & (xs <= w - 1 + tol)
    yc = np.clip(ys, 0, h - 1)
    xc = np.clip(xs, 0, w - 1)
    y0 = np.minimum(np.floor(yc).astype(np.int64), h - 1)
    x0 = np.minimum(np.floor(xc).astype(np.int64), w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (yc - y0)[..., None]
    fx = (xc - x0)[..., None]
    top = img[y0, x0] + fx * (img[y0, x1] - img[y0, x0])
    bot = img[y1, x0] + fx * (img[y1, x1] - img[y1, x0])
    out = top + fy * (bot - top)
    return np.where(inside[..., None], out, fill)


def rotate(img, degrees, fill=FILL):
    """Rotate counter-clockwise about the image center; uncovered pixels get ``fill``."""
    img = np.asarray(img, dtype=np.float64)
    if degrees == 0:
        return img.copy()
    h, w = img.shape[:2]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    t = math.radians(degrees)
    cos_t, sin_t = math.cos(t), math.sin(t)
    rr, cc = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64),
                         indexing="ij")
    dy, dx = rr - cy, cc - cx
    # inverse map: output pixel -> source location (rows grow downward, so a
    # counter-clockwise turn sends the source's east to the output's north)
    ys = cy + dy * cos_t + dx * sin_t
    xs = cx - dy * sin_t + dx * cos_t
    return _bilinear_gather(img, ys, xs, fill)


def scale_jitter(img, factor, fill=FILL):
    """Zoom by ``factor`` with a bilinear resize, then center-crop or pad back to the input size."""
    img = np.asarray(img, dtype=np.float64)
    h, w, c = img.shape
    nh, nw = max(1, int(round(h * factor))), max(1, int(round(w * factor)))
    if (nh, nw) == (h, w):
        return img.copy()
    scaled = bilinear_resize(img, nh, nw)
    out = np.full_like(img, fill)
    # overlap window between the centered scaled image and the canvas
    oy, ox = (h - nh) // 2, (w - nw) // 2
    sy0, sx0 = max(0, -oy), max(0, -ox)
    dy0, dx0 = max(0, oy), max(0, ox)
    ch, cw = min(h - dy0, nh - sy0), min(w - dx0, nw - sx0)
    out[dy0:dy0 + ch, dx0:dx0 + cw] = scaled[sy0:sy0 + ch, sx0:sx0 + cw]
    return out


def crop(img, size, top, left):
    h, w = img.shape[:2]
    if size > h or size > w:
        raise UsageError(f"crop {size} larger than image {h}x{w}")
    if not (0 <= top <= h - size and 0 <= left <= w - size):
        raise UsageError(f"crop offset ({top}, {left}) out of range for {h}x{w}")
    return img[top:top + size, left:left + size].copy()


def center_crop_offsets(shape, size):
    h, w = shape[:2]
    if size > h or size > w:
        raise UsageError(f"crop {size} larger than image {h}x{w}")
    return (h - size) // 2, (w - size) // 2


def center_crop(img, size):
    top, left = center_crop_offsets(img.shape, size)
    return crop(img, size, top, left)


def random_crop(img, size, rng):
    h, w = img.shape[:2]
    if size > h or size > w:
        raise UsageError(f"crop {size} larger than image {h}x{w}")
    return crop(img, size, rng.integers(0, h - size + 1), rng.integers(0, w - size + 1))


def augment_train(img, cfg, rng):
    """One stochastic training view: scale -> rotate -> random crop -> erase."""
    out = np.asarray(img, dtype=np.float64)
    if cfg.scale_jitter > 0:
        out = scale_jitter(out, 1.0 + rng.uniform(low=-cfg.scale_jitter, high=cfg.scale_jitter),
                           cfg.fill)
    if cfg.rotation_degrees > 0:
        out = rotate(out, rng.uniform(low=-cfg.rotation_degrees, high=cfg.rotation_degrees),
                     cfg.fill)
    out = random_crop(out, cfg.crop_size, rng)
    return random_erase(out, cfg, rng)


def augment_eval(img, cfg):
    return center_crop(np.asarray(img, dtype=np.float64), cfg.crop_size)


def sample_view(img, cfg, epoch, index, train=True):
    if not train:
        return augment_eval(img, cfg)
    return augment_train(img, cfg, Rng.substream(cfg.seed, epoch, index))
