"""Kernel backend selection.

Dispatch is per kernel, driven by benchmarks/bench_kernels.py: the cost
volume and argmax are matmul/reduction shaped and run fastest through
numpy's BLAS-backed fallback, while bilinear resize is ~3.5x faster in the
compiled extension. ``VFSEG_FORCE_FALLBACK=1`` forces pure numpy everywhere
(the extension is optional; the fallback is always present).
"""

from __future__ import annotations

import os

import numpy as np

from . import _fallback

_ext = None
if not os.environ.get("VFSEG_FORCE_FALLBACK"):
    try:
        from . import _corekern as _ext  # type: ignore[no-redef]
    except ImportError:
        _ext = None

BACKEND = "cython" if _ext is not None else "python"


def cost_volume(img: np.ndarray, txt: np.ndarray) -> np.ndarray:
    return _fallback.cost_volume(
        np.ascontiguousarray(img, dtype=np.float64),
        np.ascontiguousarray(txt, dtype=np.float64),
    )


def bilinear_resize(feat: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    impl = _ext if _ext is not None else _fallback
    return impl.bilinear_resize(
        np.ascontiguousarray(feat, dtype=np.float64), out_h, out_w
    )


def argmax_labels(scores: np.ndarray) -> np.ndarray:
    return _fallback.argmax_labels(np.ascontiguousarray(scores, dtype=np.float64))
