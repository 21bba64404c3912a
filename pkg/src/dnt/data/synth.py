"""Synthetic oriented-grating texture dataset.

Class ``k`` of ``K`` is a sinusoidal grating at orientation ``k * pi / K``
with its own spatial frequency, amplitude 80 around a mean of 128, plus
Gaussian pixel noise. Phase is random per image.
"""

import math
import os

import numpy as np

from ..errors import UsageError
from .manifest import build_manifest
from .netpbm import encode_pgm
from .rng import Rng

MEAN = 128.0
AMPLITUDE = 80.0
MIN_FREQ, MAX_FREQ = 0.05, 0.30  # cycles per pixel


def class_frequency(k, num_classes):
    return MIN_FREQ + (MAX_FREQ - MIN_FREQ) * k / max(num_classes - 1, 1)


def grating(size, k, num_classes, phase, noise_sigma=0.0, rng=None):
    """Float (size, size) image of class ``k``, clamped to [0, 255]."""
    theta = k * math.pi / num_classes
    freq = class_frequency(k, num_classes)
    yy, xx = np.meshgrid(np.arange(size, dtype=np.float64), np.arange(size, dtype=np.float64),
                         indexing="ij")
    img = MEAN + AMPLITUDE * np.sin(2 * math.pi * freq * (xx * math.cos(theta) + yy * math.sin(theta))
                                    + phase)
    if noise_sigma > 0:
        img = img + rng.normal((size, size), std=noise_sigma)
    return np.clip(img, 0.0, 255.0)


def synth_texture_dataset(out_dir, num_classes=4, per_class=70, image_size=64, noise_sigma=20.0,
                          seed=1, split_ratio=0.6):
    """Write ``out_dir/<class>/<index>.pgm`` plus ``out_dir/manifest.csv``; return the manifest path."""
    if num_classes < 2:
        raise UsageError(f"need at least 2 classes, got {num_classes}")
    if image_size < 32:
        raise UsageError(f"image size must be >= 32, got {image_size}")
    if per_class < 2:
        raise UsageError(f"need at least 2 images per class, got {per_class}")
    os.makedirs(out_dir, exist_ok=True)
    width = max(2, len(str(num_classes - 1)))
    for k in range(num_classes):
        cdir = os.path.join(out_dir, f"class_{k:0{width}d}")
        os.makedirs(cdir, exist_ok=True)
        for i in range(per_class):
            rng = Rng.substream(seed, k, i)
            phase = rng.uniform(low=0.0, high=2 * math.pi)
            img = grating(image_size, k, num_classes, phase, noise_sigma, rng)
            with open(os.path.join(cdir, f"{i:04d}.pgm"), "wb") as fh:
                fh.write(encode_pgm(img))
    manifest = build_manifest(out_dir, split_ratio, seed)
    path = os.path.join(out_dir, "manifest.csv")
    manifest.write(path)
    return path
