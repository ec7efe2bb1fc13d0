# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: cost volume, bilinear resize, per-pixel argmax.

Contracts match ``_fallback``; accumulation is in index order, float64.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor

cnp.import_array()


def cost_volume(cnp.float64_t[:, :, ::1] img, cnp.float64_t[:, ::1] txt):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1], d = img.shape[2]
    cdef Py_ssize_t n = txt.shape[0]
    cdef Py_ssize_t y, x, i, c, k
    cdef double dot, nv, nt, val
    out_arr = np.empty((h * w, n), dtype=np.float64)
    tnorm_arr = np.empty(n, dtype=np.float64)
    cdef cnp.float64_t[:, ::1] out = out_arr
    cdef cnp.float64_t[::1] tnorm = tnorm_arr
    for c in range(n):
        dot = 0.0
        for k in range(d):
            dot += txt[c, k] * txt[c, k]
        tnorm[c] = sqrt(dot)
    for y in range(h):
        for x in range(w):
            i = y * w + x
            nv = 0.0
            for k in range(d):
                nv += img[y, x, k] * img[y, x, k]
            nv = sqrt(nv)
            for c in range(n):
                dot = 0.0
                for k in range(d):
                    dot += img[y, x, k] * txt[c, k]
                val = dot / (nv * tnorm[c])
                if val > 1.0:
                    val = 1.0
                elif val < -1.0:
                    val = -1.0
                out[i, c] = val
    return out_arr


def bilinear_resize(cnp.float64_t[:, :, ::1] feat, Py_ssize_t out_h, Py_ssize_t out_w):
    cdef Py_ssize_t h = feat.shape[0], w = feat.shape[1], c = feat.shape[2]
    cdef Py_ssize_t oy, ox, ch, y0, y1, x0, x1
    cdef double sy, sx, fy, fx, top, bot
    if out_h == h and out_w == w:
        return np.asarray(feat).copy()
    out_arr = np.empty((out_h, out_w, c), dtype=np.float64)
    cdef cnp.float64_t[:, :, ::1] out = out_arr
    for oy in range(out_h):
        sy = (oy + 0.5) * (<double>h / out_h) - 0.5
        if sy < 0.0:
            sy = 0.0
        if sy > h - 1:
            sy = h - 1
        y0 = <Py_ssize_t>floor(sy)
        y1 = y0 + 1 if y0 + 1 < h else h - 1
        fy = sy - y0
        for ox in range(out_w):
            sx = (ox + 0.5) * (<double>w / out_w) - 0.5
            if sx < 0.0:
                sx = 0.0
            if sx > w - 1:
                sx = w - 1
            x0 = <Py_ssize_t>floor(sx)
            x1 = x0 + 1 if x0 + 1 < w else w - 1
            fx = sx - x0
            for ch in range(c):
                top = feat[y0, x0, ch] * (1.0 - fx) + feat[y0, x1, ch] * fx
                bot = feat[y1, x0, ch] * (1.0 - fx) + feat[y1, x1, ch] * fx
                out[oy, ox, ch] = top * (1.0 - fy) + bot * fy
    return out_arr


def argmax_labels(cnp.float64_t[:, :, ::1] scores):
    cdef Py_ssize_t h = scores.shape[0], w = scores.shape[1], c = scores.shape[2]
    cdef Py_ssize_t y, x, ch, best
    cdef double best_val
    out_arr = np.empty((h, w), dtype=np.uint16)
    cdef cnp.uint16_t[:, ::1] out = out_arr
    for y in range(h):
        for x in range(w):
            best = 0
            best_val = scores[y, x, 0]
            for ch in range(1, c):
                if scores[y, x, ch] > best_val:
                    best_val = scores[y, x, ch]
                    best = ch
            out[y, x] = <cnp.uint16_t>best
    return out_arr
