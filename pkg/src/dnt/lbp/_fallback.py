"""Vectorised numpy LBP kernel; used when the compiled extension is unavailable."""

import numpy as np


def code_map(img, y0, x0, y1, x1, fy, fx, exact, border):
    h, w = img.shape
    hi, wi = h - 2 * border, w - 2 * border

    def shifted(dy, dx):
        r, c = border + dy, border + dx
        return img[r:r + hi, c:c + wi]

    center = shifted(0, 0)
    codes = np.zeros((hi, wi), dtype=np.int64)
    for i in range(len(y0)):
        p00 = shifted(y0[i], x0[i])
        if exact[i]:
            sample = p00
        else:
            p01 = shifted(y0[i], x1[i])
            p10 = shifted(y1[i], x0[i])
            p11 = shifted(y1[i], x1[i])
            # lerp form: exact on constant neighborhoods
            top = p00 + fx[i] * (p01 - p00)
            bot = p10 + fx[i] * (p11 - p10)
            sample = top + fy[i] * (bot - top)
        codes |= (sample >= center).astype(np.int64) << i
    return codes
