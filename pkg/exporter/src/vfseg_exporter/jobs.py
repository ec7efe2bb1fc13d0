"""Batch export jobs: image grids, text banks, and tag files."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .formats import write_embedding_container, write_tag_file
from .prompts import render_prompts


def export_image_embeddings(image_dir: str | Path, out_dir: str | Path, encoder) -> list[Path]:
    """One rank-3 container per image file (PNG/JPEG), named <stem>.vfse."""
    from PIL import Image

    image_dir = Path(image_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    paths = sorted(
        p for p in image_dir.iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg")
    )
    for path in paths:
        pixels = np.asarray(Image.open(path).convert("RGB"))
        grid = encoder.encode_image(pixels)
        out = out_dir / f"{path.stem}.vfse"
        write_embedding_container(grid, out, provenance=encoder.identifier)
        written.append(out)
    return written


def export_text_embeddings(
    names: list[str],
    out_path: str | Path,
    encoder,
    adjectives: dict[str, list[str]] | None = None,
) -> None:
    """One row per class. With several adjective prompts per class the row is
    the mean of the L2-normalized per-prompt embeddings, re-normalized; the
    aggregation is recorded in the provenance string."""
    if not names:
        raise ValueError("empty name list")
    per_class = render_prompts(names, adjectives)
    rows = []
    for name in names:
        vecs = encoder.encode_text(per_class[name]).astype(np.float64)
        vecs = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
        mean = vecs.mean(axis=0)
        rows.append(mean / np.linalg.norm(mean))
    provenance = encoder.identifier
    if adjectives:
        provenance += "+adjective-mean"
    write_embedding_container(np.stack(rows), out_path, provenance=provenance)


@dataclass
class TagExportResult:
    tags: dict[str, list[str]]
    failures: dict[str, str] = field(default_factory=dict)


def export_tags(
    image_dir: str | Path, out_path: str | Path, tagger
) -> TagExportResult:
    """Per-image open-ended tag lists; duplicates removed keeping the first
    occurrence. A per-image tagger failure is recorded and the job continues."""
    from PIL import Image

    image_dir = Path(image_dir)
    result = TagExportResult(tags={})
    for path in sorted(
        p for p in image_dir.iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg")
    ):
        image_id = path.stem
        try:
            pixels = np.asarray(Image.open(path).convert("RGB"))
            raw = tagger.tag_image(image_id, pixels)
            seen = set()
            deduped = []
            for t in raw:
                if t not in seen:
                    seen.add(t)
                    deduped.append(t)
            result.tags[image_id] = deduped
        except Exception as err:  # keep going; the report carries the failure
            result.failures[image_id] = str(err)
    write_tag_file(result.tags, out_path, provenance=tagger.identifier)
    return result
