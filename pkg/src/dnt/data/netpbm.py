"""Netpbm (P2/P3/P5/P6) reading and writing; PNG through Pillow when installed."""

import os

import numpy as np

from ..errors import ImageFormatError, ImageReadError


def _tokens(data, count, start):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    out, i, n = [], start, len(data)
    while len(out) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
            j += 1
        if j == i:
            raise ImageReadError("truncated Netpbm header")
        out.append(data[i:j])
        i = j
    return out, i


def decode_netpbm(data, path="<bytes>"):
    """Decode a Netpbm byte string to a float64 (h, w, 3) array scaled to [0, 255]."""
    magic = data[:2]
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise ImageFormatError(f"{path}: unsupported image format (magic {magic!r})")
    try:
        (w, h, maxval), pos = _tokens(data, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise ImageReadError(f"{path}: malformed Netpbm header") from None
    except ImageReadError as exc:
        raise ImageReadError(f"{path}: {exc}") from None
    if w <= 0 or h <= 0 or not 0 < maxval < 65536:
        raise ImageReadError(f"{path}: invalid Netpbm geometry {w}x{h} maxval {maxval}")
    channels = 3 if magic in (b"P3", b"P6") else 1
    count = w * h * channels
    if magic in (b"P2", b"P3"):
        try:
            values, _ = _tokens(data, count, pos)
            pixels = np.array([int(v) for v in values], dtype=np.float64)
        except (ImageReadError, ValueError):
            raise ImageReadError(f"{path}: truncated or malformed ASCII raster") from None
    else:
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        payload = data[pos:pos + count * dtype.itemsize]
        if len(payload) < count * dtype.itemsize:
            raise ImageReadError(f"{path}: truncated raster ({len(payload)} of "
                                 f"{count * dtype.itemsize} bytes)")
        pixels = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    if pixels.max(initial=0) > maxval:
        raise ImageReadError(f"{path}: sample exceeds maxval {maxval}")
    img = pixels.reshape(h, w, channels)
    if maxval != 255:
        img = img * (255.0 / maxval)
    if channels == 1:
        img = np.repeat(img, 3, axis=2)
    return img


def load_image(path):
    """Read an image file as a float64 RGB array (h, w, 3) in [0, 255]."""
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ImageReadError(f"{path}: cannot read ({exc.strerror})") from None
    if not data:
        raise ImageReadError(f"{path}: empty file")
    if data.startswith(b"\x89PNG"):
        return _load_png(path)
    return decode_netpbm(data, path)


def _load_png(path):
    try:
        from PIL import Image
    except ImportError:
        raise ImageFormatError(f"{path}: PNG support needs Pillow") from None
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.float64)


def encode_pgm(gray):
    """Binary P5 bytes for an (h, w) array; values rounded and clipped to [0, 255]."""
    g = np.clip(np.rint(np.asarray(gray, dtype=np.float64)), 0, 255).astype(np.uint8)
    h, w = g.shape
    return b"P5\n%d %d\n255\n" % (w, h) + g.tobytes()


def encode_ppm(rgb):
    """Binary P6 bytes for an (h, w, 3) array."""
    g = np.clip(np.rint(np.asarray(rgb, dtype=np.float64)), 0, 255).astype(np.uint8)
    h, w, _ = g.shape
    return b"P6\n%d %d\n255\n" % (w, h) + g.tobytes()


def save_image(path, img):
    img = np.asarray(img)
    data = encode_pgm(img) if img.ndim == 2 else encode_ppm(img)
    with open(path, "wb") as fh:
        fh.write(data)
