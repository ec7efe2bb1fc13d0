"""Encoder backends.

Every backend implements the same small surface: ``encode_text(prompts)``
returning (len(prompts), d) unit-norm rows, and ``encode_image(pixels)``
returning an (H, W, d) patch-grid of features. The stub backend is fully
deterministic (seeded from content hashes) and needs no model downloads;
the CLIP/SBERT backends load real frozen models and are only imported when
requested.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _seed_from(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")


class StubTextEncoder:
    """Deterministic hash-seeded text embeddings; stable across runs and platforms."""

    def __init__(self, dim: int = 16):
        self.dim = dim
        self.identifier = f"stub-text-d{dim}"

    def encode_text(self, prompts: list[str]) -> np.ndarray:
        rows = []
        for p in prompts:
            rng = np.random.Generator(np.random.Philox(key=_seed_from("text:" + p)))
            v = rng.normal(size=self.dim)
            rows.append(v / np.linalg.norm(v))
        return np.stack(rows).astype(np.float32)


class StubImageEncoder:
    """Patch-grid features seeded from the pixel content of each patch."""

    def __init__(self, dim: int = 16, patch: int = 16):
        self.dim = dim
        self.patch = patch
        self.identifier = f"stub-image-d{dim}-p{patch}"

    def encode_image(self, pixels: np.ndarray) -> np.ndarray:
        h_px, w_px = pixels.shape[:2]
        gh, gw = h_px // self.patch, w_px // self.patch
        if gh == 0 or gw == 0:
            raise ValueError(
                f"image {h_px}x{w_px} smaller than one {self.patch}px patch"
            )
        grid = np.empty((gh, gw, self.dim), dtype=np.float32)
        for y in range(gh):
            for x in range(gw):
                block = pixels[
                    y * self.patch : (y + 1) * self.patch,
                    x * self.patch : (x + 1) * self.patch,
                ]
                digest = hashlib.sha256(
                    np.ascontiguousarray(block, dtype=np.uint8).tobytes()
                ).digest()
                rng = np.random.Generator(
                    np.random.Philox(key=int.from_bytes(digest[:8], "little"))
                )
                v = rng.normal(size=self.dim)
                grid[y, x] = v / np.linalg.norm(v)
        return grid


class StubTagger:
    """Tagger driven by a fixed lookup: image id -> tags. Stands in for a
    VLM tagger when running the pipeline offline."""

    def __init__(self, lookup: dict[str, list[str]]):
        self.lookup = lookup
        self.identifier = "stub-tagger"

    def tag_image(self, image_id: str, pixels: np.ndarray) -> list[str]:
        if image_id not in self.lookup:
            raise KeyError(f"no tags configured for {image_id!r}")
        return list(self.lookup[image_id])


def clip_text_encoder(model_name: str = "openai/clip-vit-base-patch16"):
    """Real frozen CLIP text encoder; requires the optional model deps."""
    import torch
    from transformers import CLIPModel, CLIPProcessor

    model = CLIPModel.from_pretrained(model_name).eval()
    processor = CLIPProcessor.from_pretrained(model_name)

    class _Clip:
        identifier = f"clip:{model_name}"
        dim = model.config.projection_dim

        @torch.no_grad()
        def encode_text(self, prompts: list[str]) -> np.ndarray:
            inputs = processor(text=prompts, return_tensors="pt", padding=True)
            feats = model.get_text_features(**inputs)
            feats = feats / feats.norm(dim=-1, keepdim=True)
            return feats.cpu().numpy().astype(np.float32)

    return _Clip()


def sbert_encoder(model_name: str = "sentence-transformers/all-MiniLM-L6-v2"):
    """Sentence embeddings for the evaluation-assignment bank."""
    from sentence_transformers import SentenceTransformer

    model = SentenceTransformer(model_name)

    class _Sbert:
        identifier = f"sbert:{model_name}"
        dim = model.get_sentence_embedding_dimension()

        def encode_text(self, prompts: list[str]) -> np.ndarray:
            out = model.encode(prompts, normalize_embeddings=True)
            return np.asarray(out, dtype=np.float32)

    return _Sbert()


def get_text_encoder(name: str, dim: int = 16):
    if name == "stub":
        return StubTextEncoder(dim=dim)
    if name == "clip":
        return clip_text_encoder()
    if name == "sbert":
        return sbert_encoder()
    raise ValueError(f"unknown text encoder {name!r}")


def get_image_encoder(name: str, dim: int = 16, patch: int = 16):
    if name == "stub":
        return StubImageEncoder(dim=dim, patch=patch)
    raise ValueError(f"unknown image encoder {name!r}")
