"""Brute-force reference implementations.

These share no code with the optimized paths: they work on nested Python
lists, compute sample positions in absolute image coordinates and count
bit transitions directly.
"""

import math


def naive_lbp_code_map(gray, P, R, sampling="bilinear"):
    """Per-pixel LBP codes over the interior of a 2-D image, as a list of rows.

    ``sampling="nearest"`` reads the pixel nearest to each circle point.
    """
    rows = [list(map(float, r)) for r in gray]
    h, w = len(rows), len(rows[0])
    b = math.ceil(R)

    def pixel(y, x):
        return rows[min(max(y, 0), h - 1)][min(max(x, 0), w - 1)]

    def sample(y, x):
        if sampling == "nearest":
            return rows[math.floor(y + 0.5)][math.floor(x + 0.5)]
        ry, rx = round(y), round(x)
        if abs(y - ry) < 1e-9 and abs(x - rx) < 1e-9:
            return rows[ry][rx]
        if abs(y - ry) < 1e-9:
            y = float(ry)
        if abs(x - rx) < 1e-9:
            x = float(rx)
        y_lo, x_lo = math.floor(y), math.floor(x)
        ty, tx = y - y_lo, x - x_lo
        upper = pixel(y_lo, x_lo) + tx * (pixel(y_lo, x_lo + 1) - pixel(y_lo, x_lo))
        lower = pixel(y_lo + 1, x_lo) + tx * (pixel(y_lo + 1, x_lo + 1) - pixel(y_lo + 1, x_lo))
        return upper + ty * (lower - upper)

    out = []
    for cy in range(b, h - b):
        line = []
        for cx in range(b, w - b):
            center = rows[cy][cx]
            code = 0
            for i in range(P):
                angle = 2 * math.pi * i / P
                value = sample(cy - R * math.sin(angle), cx + R * math.cos(angle))
                if value - center >= 0:
                    code += 2 ** i
            line.append(code)
        out.append(line)
    return out


def circular_transitions(code, P):
    bits = [(code >> i) & 1 for i in range(P)]
    return sum(bits[i] != bits[(i + 1) % P] for i in range(P))


def naive_uniform_bins(P):
    """Enumerate every code; uniform codes get consecutive bins, the rest share the last."""
    uniform = [c for c in range(2 ** P) if circular_transitions(c, P) <= 2]
    shared = len(uniform)
    index = {c: k for k, c in enumerate(uniform)}
    return [index.get(c, shared) for c in range(2 ** P)], shared + 1


def naive_histogram(codes, P, binning):
    """Histogram block of width 256 from a list-of-rows code map, unnormalized."""
    block = [0] * 256
    if binning == "raw256":
        for row in codes:
            for c in row:
                block[c] += 1
        return block
    bins, _ = naive_uniform_bins(P)
    for row in codes:
        for c in row:
            block[bins[c]] += 1
    return block
