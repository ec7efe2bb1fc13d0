"""Pure-numpy implementations of the hot kernels.

Selected at import time when the compiled extension is unavailable (or when
``VFSEG_FORCE_FALLBACK`` is set). Same contracts as ``_corekern``:
float64 in, float64 out, ties in ``argmax_labels`` break to the lowest index.
"""

from __future__ import annotations

import numpy as np


def cost_volume(img: np.ndarray, txt: np.ndarray) -> np.ndarray:
    """Cosine similarity between every spatial vector and every class row.

    img: (H, W, d), txt: (N, d); returns (H*W, N) clamped to [-1, 1].
    Callers validate norms; this assumes all norms are positive.
    """
    h, w, d = img.shape
    flat = img.reshape(h * w, d)
    vn = flat / np.linalg.norm(flat, axis=1, keepdims=True)
    tn = txt / np.linalg.norm(txt, axis=1, keepdims=True)
    return np.clip(vn @ tn.T, -1.0, 1.0)


def bilinear_resize(feat: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Per-channel bilinear interpolation of (H, W, C) to (out_h, out_w, C).

    Sample centers follow the align-corners-false convention:
    src = (dst + 0.5) * (in / out) - 0.5, clamped to the valid range.
    """
    h, w, _ = feat.shape
    if out_h == h and out_w == w:
        return feat.copy()

    def axis_coords(n_in: int, n_out: int):
        src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
        src = np.clip(src, 0.0, n_in - 1)
        lo = np.floor(src).astype(np.intp)
        hi = np.minimum(lo + 1, n_in - 1)
        frac = src - lo
        return lo, hi, frac

    y0, y1, fy = axis_coords(h, out_h)
    x0, x1, fx = axis_coords(w, out_w)
    rows = feat[y0] * (1.0 - fy)[:, None, None] + feat[y1] * fy[:, None, None]
    out = rows[:, x0] * (1.0 - fx)[None, :, None] + rows[:, x1] * fx[None, :, None]
    return out


def argmax_labels(scores: np.ndarray) -> np.ndarray:
    """Per-pixel argmax over the channel axis of (H, W, C), lowest index wins ties."""
    return np.argmax(scores, axis=-1).astype(np.uint16)
