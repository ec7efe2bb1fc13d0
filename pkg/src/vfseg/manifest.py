"""Dataset manifest loading and validation.

A manifest is a JSON document (paths resolved relative to the manifest file):

    {
      "entries": [{"image_id": ..., "embedding_path": ..., "gt_path": ...,
                   "tags_path": optional, "caption_path": optional}, ...],
      "vocabulary_path": ...,
      "text_embedding_path": ...,          # class bank over the vocabulary
      "extra_text_embedding_path": opt,    # rows for open-ended tag names
      "extra_text_names_path": opt,
      "sbert_embedding_path": opt,         # sentence bank for soft assignment
      "sbert_names_path": opt
    }

At load time every referenced file must exist; ground-truth maps are read
fully (pixel values checked against the vocabulary size), embeddings are
header-validated only and loaded on demand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .containers import (
    IGNORE_LABEL,
    SegmentationMap,
    load_vocabulary,
    peek_embedding,
    read_embedding,
    read_segmap,
)
from .embeddings import TextEmbeddingSet
from .errors import (
    DuplicateImageIdError,
    ManifestError,
    VocabularyMismatchError,
)


@dataclass
class ManifestEntry:
    image_id: str
    embedding_path: Path
    gt_path: Path
    tags_path: Path | None = None
    caption_path: Path | None = None


@dataclass
class DatasetManifest:
    path: Path
    entries: list[ManifestEntry]
    vocabulary: list[str]
    text_bank: TextEmbeddingSet          # segmentation (CLIP-space) bank
    sbert_bank: TextEmbeddingSet | None  # sentence bank for soft assignment

    def entry(self, image_id: str) -> ManifestEntry:
        for e in self.entries:
            if e.image_id == image_id:
                return e
        raise ManifestError(f"unknown image id {image_id!r}")

    def load_gt(self, entry: ManifestEntry) -> SegmentationMap:
        return read_segmap(entry.gt_path)

    def oracle_tags(self, entry: ManifestEntry) -> list[str]:
        """Distinct classes present in the GT map, in class-index order."""
        gt = self.load_gt(entry)
        return [self.vocabulary[i] for i in gt.class_indices()]


def _resolve(base: Path, rel: str) -> Path:
    p = Path(rel)
    return p if p.is_absolute() else base / p


def _require(path: Path, what: str) -> Path:
    if not path.is_file():
        raise ManifestError(f"missing {what}: {path}")
    return path


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except FileNotFoundError:
        raise ManifestError(f"missing manifest: {path}") from None
    except json.JSONDecodeError as e:
        raise ManifestError(f"malformed manifest {path}: {e}") from None
    base = path.parent

    vocab_path = _require(_resolve(base, doc["vocabulary_path"]), "vocabulary")
    vocabulary = load_vocabulary(vocab_path)
    text_path = _require(_resolve(base, doc["text_embedding_path"]), "text embeddings")
    text_container = read_embedding(text_path)
    if text_container.data.shape[0] != len(vocabulary):
        raise VocabularyMismatchError(
            f"{len(vocabulary)} vocabulary names but "
            f"{text_container.data.shape[0]} text embedding rows"
        )
    text_bank = TextEmbeddingSet.from_container(vocabulary, text_container)

    if "extra_text_embedding_path" in doc:
        extra_names = load_vocabulary(
            _require(_resolve(base, doc["extra_text_names_path"]), "extra text names")
        )
        extra_container = read_embedding(
            _require(_resolve(base, doc["extra_text_embedding_path"]), "extra text embeddings")
        )
        if extra_container.data.shape[0] != len(extra_names):
            raise VocabularyMismatchError("extra text names/rows mismatch")
        text_bank = text_bank.merged(
            TextEmbeddingSet.from_container(extra_names, extra_container)
        )

    sbert_bank = None
    if "sbert_embedding_path" in doc:
        sbert_names = load_vocabulary(
            _require(_resolve(base, doc["sbert_names_path"]), "sentence-bank names")
        )
        sbert_container = read_embedding(
            _require(_resolve(base, doc["sbert_embedding_path"]), "sentence embeddings")
        )
        if sbert_container.data.shape[0] != len(sbert_names):
            raise VocabularyMismatchError("sentence-bank names/rows mismatch")
        sbert_bank = TextEmbeddingSet.from_container(sbert_names, sbert_container)

    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for raw in doc.get("entries", []):
        image_id = raw["image_id"]
        if image_id in seen:
            raise DuplicateImageIdError(f"duplicate image id {image_id!r}")
        seen.add(image_id)
        entry = ManifestEntry(
            image_id=image_id,
            embedding_path=_require(
                _resolve(base, raw["embedding_path"]), f"embedding for {image_id}"
            ),
            gt_path=_require(_resolve(base, raw["gt_path"]), f"gt map for {image_id}"),
            tags_path=(
                _require(_resolve(base, raw["tags_path"]), f"tags for {image_id}")
                if raw.get("tags_path")
                else None
            ),
            caption_path=(
                _require(_resolve(base, raw["caption_path"]), f"caption for {image_id}")
                if raw.get("caption_path")
                else None
            ),
        )
        # header sanity for the embedding, full read for the GT map
        dims = peek_embedding(entry.embedding_path)
        if len(dims) != 3:
            raise ManifestError(
                f"{entry.embedding_path}: image embedding must be rank 3, got {dims}"
            )
        gt = read_segmap(entry.gt_path)
        real = gt.labels[gt.labels != IGNORE_LABEL]
        if real.size and int(real.max()) >= len(vocabulary):
            raise ManifestError(
                f"{entry.gt_path}: label {int(real.max())} exceeds vocabulary "
                f"size {len(vocabulary)}"
            )
        entries.append(entry)

    return DatasetManifest(
        path=path,
        entries=entries,
        vocabulary=vocabulary,
        text_bank=text_bank,
        sbert_bank=sbert_bank,
    )
