# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled LBP kernel. Arithmetic mirrors _fallback.code_map operation for operation."""

import numpy as np


def code_map(const double[:, ::1] img, const long long[::1] y0, const long long[::1] x0,
             const long long[::1] y1, const long long[::1] x1, const double[::1] fy,
             const double[::1] fx, const unsigned char[::1] exact, Py_ssize_t border):
    cdef Py_ssize_t hi = img.shape[0] - 2 * border
    cdef Py_ssize_t wi = img.shape[1] - 2 * border
    cdef Py_ssize_t P = y0.shape[0]
    out = np.zeros((hi, wi), dtype=np.int64)
    cdef long long[:, ::1] codes = out
    cdef Py_ssize_t r, c, i, cy, cx
    cdef double center, p00, p01, p10, p11, top, bot, sample
    cdef long long code
    for r in range(hi):
        cy = r + border
        for c in range(wi):
            cx = c + border
            center = img[cy, cx]
            code = 0
            for i in range(P):
                p00 = img[cy + y0[i], cx + x0[i]]
                if exact[i]:
                    sample = p00
                else:
                    p01 = img[cy + y0[i], cx + x1[i]]
                    p10 = img[cy + y1[i], cx + x0[i]]
                    p11 = img[cy + y1[i], cx + x1[i]]
                    top = p00 + fx[i] * (p01 - p00)
                    bot = p10 + fx[i] * (p11 - p10)
                    sample = top + fy[i] * (bot - top)
                if sample >= center:
                    code |= (<long long>1) << i
            codes[r, c] = code
    return out
