"""Writers for the engine's container formats.

Implemented independently from the engine package on purpose: the byte
layout below is the cross-component contract, and the test suite checks
that the engine parses these bytes identically.

All integers little-endian. Embedding container: magic ``VFSE`` | version
u32 | dtype u32 (0 = float32 LE) | rank u32 | dims rank*u64 | row-major
float32 payload | provenance u32 length + UTF-8. Files are written
atomically (temp + rename) so a crashed job never leaves a torn file.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

MAGIC = b"VFSE"
VERSION = 1
DTYPE_F32LE = 0


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_embedding_container(array: np.ndarray, path: str | Path, provenance: str) -> None:
    path = Path(path)
    array = np.ascontiguousarray(array, dtype="<f4")
    if array.ndim not in (2, 3):
        raise ValueError(f"container rank must be 2 or 3, got {array.ndim}")
    if any(d <= 0 for d in array.shape):
        raise ValueError(f"zero dimension in shape {array.shape}")
    prov = provenance.encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<III", VERSION, DTYPE_F32LE, array.ndim),
        struct.pack(f"<{array.ndim}Q", *array.shape),
        array.tobytes(),
        struct.pack("<I", len(prov)),
        prov,
    ]
    _atomic_write(path, b"".join(parts))


def write_tag_file(tags: dict[str, list[str]], path: str | Path, provenance: str) -> None:
    path = Path(path)
    doc = {"provenance": provenance, "tags": tags}
    _atomic_write(path, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8"))
