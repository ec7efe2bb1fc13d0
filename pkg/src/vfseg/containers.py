"""Bit-exact binary container formats and small text-file loaders.

Formats (all integers little-endian):

``VFSE`` embedding container
    magic ``VFSE`` | version u32 | dtype u32 (0 = float32 LE) | rank u32 |
    dims rank*u64 | payload (row-major float32) | provenance u32 length + UTF-8

``SEGM`` segmentation map
    magic ``SEGM`` | height u32 | width u32 | pixels H*W u16 (65535 = ignore)

Tag files are JSON (image id -> ordered tag list), vocabularies are
newline-separated UTF-8. Readers never pad or truncate silently: any
header/payload inconsistency raises.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    InvalidShapeError,
    TagFileError,
    TruncatedPayloadError,
    UnsupportedDtypeError,
    UnsupportedVersionError,
)

EMBEDDING_MAGIC = b"VFSE"
SEGMAP_MAGIC = b"SEGM"
CONTAINER_VERSION = 1
DTYPE_F32LE = 0

IGNORE_LABEL = 65535       # ground-truth pixels excluded from scoring
UNMATCHED_LABEL = 65534    # predicted pixels whose name failed assignment


@dataclass
class EmbeddingContainer:
    """Validated float tensor with provenance (rank 2: N x d, rank 3: H x W x d)."""

    data: np.ndarray  # float32, row-major
    provenance: str = ""

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim not in (2, 3):
            raise InvalidShapeError(f"rank must be 2 or 3, got {self.data.ndim}")
        if any(d <= 0 for d in self.data.shape):
            raise InvalidShapeError(f"zero dimension in shape {self.data.shape}")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EmbeddingContainer)
            and self.provenance == other.provenance
            and self.data.shape == other.data.shape
            and self.data.tobytes() == other.data.tobytes()
        )


@dataclass
class SegmentationMap:
    """H x W grid of uint16 class indices; 65535 is the ignore value."""

    labels: np.ndarray  # (H, W) uint16

    def __post_init__(self):
        self.labels = np.ascontiguousarray(self.labels, dtype=np.uint16)
        if self.labels.ndim != 2:
            raise InvalidShapeError(f"labels must be 2-D, got {self.labels.ndim}-D")
        if any(d <= 0 for d in self.labels.shape):
            raise InvalidShapeError(f"zero dimension in shape {self.labels.shape}")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def class_indices(self) -> list[int]:
        """Distinct non-ignore labels in ascending order."""
        vals = np.unique(self.labels)
        return [int(v) for v in vals if v != IGNORE_LABEL and v != UNMATCHED_LABEL]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SegmentationMap)
            and self.labels.shape == other.labels.shape
            and bool(np.array_equal(self.labels, other.labels))
        )


def _read_exact(f, n: int, what: str) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise TruncatedPayloadError(f"expected {n} bytes for {what}, got {len(buf)}")
    return buf


def write_embedding(container: EmbeddingContainer, path: str | Path) -> None:
    data = container.data
    prov = container.provenance.encode("utf-8")
    with open(path, "wb") as f:
        f.write(EMBEDDING_MAGIC)
        f.write(struct.pack("<III", CONTAINER_VERSION, DTYPE_F32LE, data.ndim))
        f.write(struct.pack(f"<{data.ndim}Q", *data.shape))
        f.write(data.astype("<f4", copy=False).tobytes())
        f.write(struct.pack("<I", len(prov)))
        f.write(prov)


def read_embedding(path: str | Path) -> EmbeddingContainer:
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic")
        if magic != EMBEDDING_MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}")
        version, dtype, rank = struct.unpack("<III", _read_exact(f, 12, "header"))
        if version != CONTAINER_VERSION:
            raise UnsupportedVersionError(f"{path}: version {version}")
        if dtype != DTYPE_F32LE:
            raise UnsupportedDtypeError(f"{path}: dtype code {dtype}")
        if rank not in (2, 3):
            raise InvalidShapeError(f"{path}: rank {rank} not in {{2, 3}}")
        dims = struct.unpack(f"<{rank}Q", _read_exact(f, 8 * rank, "dims"))
        if any(d == 0 for d in dims):
            raise InvalidShapeError(f"{path}: zero dimension in {dims}")
        count = 1
        for d in dims:
            count *= d
        payload = _read_exact(f, count * 4, "payload")
        (plen,) = struct.unpack("<I", _read_exact(f, 4, "provenance length"))
        prov = _read_exact(f, plen, "provenance").decode("utf-8")
        trailing = f.read(1)
        if trailing:
            raise TruncatedPayloadError(f"{path}: trailing bytes after provenance")
    data = np.frombuffer(payload, dtype="<f4").reshape(dims)
    return EmbeddingContainer(data=data, provenance=prov)


def peek_embedding(path: str | Path) -> tuple[int, ...]:
    """Validate the header and return dims without reading the payload."""
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic")
        if magic != EMBEDDING_MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}")
        version, dtype, rank = struct.unpack("<III", _read_exact(f, 12, "header"))
        if version != CONTAINER_VERSION:
            raise UnsupportedVersionError(f"{path}: version {version}")
        if dtype != DTYPE_F32LE:
            raise UnsupportedDtypeError(f"{path}: dtype code {dtype}")
        if rank not in (2, 3):
            raise InvalidShapeError(f"{path}: rank {rank} not in {{2, 3}}")
        dims = struct.unpack(f"<{rank}Q", _read_exact(f, 8 * rank, "dims"))
        if any(d == 0 for d in dims):
            raise InvalidShapeError(f"{path}: zero dimension in {dims}")
    return dims


def write_segmap(segmap: SegmentationMap, path: str | Path) -> None:
    with open(path, "wb") as f:
        f.write(SEGMAP_MAGIC)
        f.write(struct.pack("<II", segmap.height, segmap.width))
        f.write(segmap.labels.astype("<u2", copy=False).tobytes())


def read_segmap(path: str | Path) -> SegmentationMap:
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic")
        if magic != SEGMAP_MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}")
        h, w = struct.unpack("<II", _read_exact(f, 8, "dims"))
        if h == 0 or w == 0:
            raise InvalidShapeError(f"{path}: zero dimension {h}x{w}")
        payload = _read_exact(f, h * w * 2, "pixels")
        trailing = f.read(1)
        if trailing:
            raise TruncatedPayloadError(f"{path}: trailing bytes after pixels")
    labels = np.frombuffer(payload, dtype="<u2").reshape(h, w)
    return SegmentationMap(labels=labels)


def load_tags(path: str | Path) -> dict[str, list[str]]:
    """Load a JSON tag document: image id -> ordered tag list.

    Accepts either the flat mapping or a wrapped form
    ``{"provenance": ..., "tags": {...}}``. Duplicates within an image and
    empty/non-string tags are rejected.
    """
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if not isinstance(doc, dict):
        raise TagFileError(f"{path}: top level must be an object")
    if "tags" in doc and isinstance(doc["tags"], dict):
        doc = doc["tags"]
    out: dict[str, list[str]] = {}
    for image_id, tags in doc.items():
        if not isinstance(tags, list):
            raise TagFileError(f"{path}: tags for {image_id!r} must be a list")
        seen = set()
        for t in tags:
            if not isinstance(t, str) or not t:
                raise TagFileError(f"{path}: bad tag {t!r} for {image_id!r}")
            if t in seen:
                raise TagFileError(f"{path}: duplicate tag {t!r} for {image_id!r}")
            seen.add(t)
        out[image_id] = list(tags)
    return out


def write_tags(tags: dict[str, list[str]], path: str | Path, provenance: str = "") -> None:
    doc = {"provenance": provenance, "tags": tags} if provenance else tags
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def load_vocabulary(path: str | Path) -> list[str]:
    """Newline-separated class names; blank lines ignored, names must be unique."""
    with open(path, "r", encoding="utf-8") as f:
        names = [line.rstrip("\n") for line in f]
    names = [n for n in names if n.strip()]
    if len(set(names)) != len(names):
        raise TagFileError(f"{path}: duplicate class names in vocabulary")
    return names


def write_vocabulary(names: list[str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for n in names:
            f.write(n + "\n")
