"""Synthetic dataset builders shared across the test suite."""

import numpy as np

from vfseg.containers import (
    EmbeddingContainer,
    SegmentationMap,
    write_embedding,
    write_segmap,
    write_tags,
    write_vocabulary,
)
from vfseg.manifest import load_manifest

BLOB_CLASSES = ["sky", "grass", "water"]
BLOB_VOCAB = ["sky", "grass", "water", "lava"]
BLOB_DIM = 8
BLOB_SIZE = 8


def _basis(i: int, d: int = BLOB_DIM) -> np.ndarray:
    v = np.zeros(d, dtype=np.float32)
    v[i] = 1.0
    return v


def build_blob_dataset(root):
    """Three single-blob images with orthogonal per-class embeddings and
    exact class text embeddings: the segmenter must recover GT exactly."""
    root.mkdir(parents=True, exist_ok=True)
    write_vocabulary(BLOB_VOCAB, root / "vocab.txt")
    bank = np.stack([_basis(i) for i in range(len(BLOB_VOCAB))])
    write_embedding(
        EmbeddingContainer(data=bank, provenance="synthetic-orthogonal"),
        root / "text_bank.vfse",
    )
    entries = []
    for idx, name in enumerate(BLOB_CLASSES):
        image_id = f"img_{name}"
        emb = np.tile(_basis(idx), (BLOB_SIZE, BLOB_SIZE, 1))
        write_embedding(
            EmbeddingContainer(data=emb, provenance="synthetic"),
            root / f"{image_id}.vfse",
        )
        gt = SegmentationMap(
            labels=np.full((BLOB_SIZE, BLOB_SIZE), idx, dtype=np.uint16)
        )
        write_segmap(gt, root / f"{image_id}.segm")
        entries.append(
            {
                "image_id": image_id,
                "embedding_path": f"{image_id}.vfse",
                "gt_path": f"{image_id}.segm",
            }
        )
    manifest_path = root / "manifest.json"
    import json

    manifest_path.write_text(
        json.dumps(
            {
                "entries": entries,
                "vocabulary_path": "vocab.txt",
                "text_embedding_path": "text_bank.vfse",
            },
            indent=2,
        )
    )
    return manifest_path


def build_husky_dataset(root):
    """One all-"dog" image tagged ["husky", "cat"]; husky shares dog's visual
    embedding but only the sentence bank (cos(husky, dog) = 0.8) can map it
    back onto the vocabulary."""
    import json

    root.mkdir(parents=True, exist_ok=True)
    vocab = ["cat", "dog"]
    write_vocabulary(vocab, root / "vocab.txt")
    dog = _basis(0, 4)
    cat = _basis(1, 4)
    write_embedding(
        EmbeddingContainer(data=np.stack([cat, dog]), provenance="synthetic"),
        root / "text_bank.vfse",
    )
    write_vocabulary(["husky"], root / "extra_names.txt")
    write_embedding(
        EmbeddingContainer(data=dog[None, :], provenance="synthetic"),
        root / "extra_bank.vfse",
    )
    # sentence space: cos(husky, dog) = 0.8, cos(husky, cat) = 0.3
    s_dog = np.array([1.0, 0.0, 0.0], dtype=np.float32)
    s_cat = np.array([0.0, 1.0, 0.0], dtype=np.float32)
    s_husky = np.array([0.8, 0.3, np.sqrt(1.0 - 0.64 - 0.09)], dtype=np.float32)
    write_vocabulary(["cat", "dog", "husky"], root / "sbert_names.txt")
    write_embedding(
        EmbeddingContainer(
            data=np.stack([s_cat, s_dog, s_husky]), provenance="sbert-synthetic"
        ),
        root / "sbert_bank.vfse",
    )
    emb = np.tile(dog, (4, 4, 1))
    write_embedding(EmbeddingContainer(data=emb, provenance="synthetic"), root / "img.vfse")
    gt = SegmentationMap(labels=np.full((4, 4), 1, dtype=np.uint16))  # all dog
    write_segmap(gt, root / "img.segm")
    write_tags({"img": ["husky", "cat"]}, root / "tags.json")
    (root / "manifest.json").write_text(
        json.dumps(
            {
                "entries": [
                    {
                        "image_id": "img",
                        "embedding_path": "img.vfse",
                        "gt_path": "img.segm",
                        "tags_path": "tags.json",
                    }
                ],
                "vocabulary_path": "vocab.txt",
                "text_embedding_path": "text_bank.vfse",
                "extra_text_embedding_path": "extra_bank.vfse",
                "extra_text_names_path": "extra_names.txt",
                "sbert_embedding_path": "sbert_bank.vfse",
                "sbert_names_path": "sbert_names.txt",
            },
            indent=2,
        )
    )
    return root / "manifest.json"
