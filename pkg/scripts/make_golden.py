"""Regenerate the committed golden binaries under tests/fixtures/.

Run from the repo root: python3 scripts/make_golden.py
The aggregation golden is produced by the engine and is cross-checked in the
test suite against an independent scalar reference implementation.
"""

from pathlib import Path

import numpy as np

from vfseg.containers import (
    EmbeddingContainer,
    SegmentationMap,
    write_embedding,
    write_segmap,
)
from vfseg.embeddings import DenseImageEmbedding, TextEmbeddingSet
from vfseg.segmenter import aggregate, compute_cost_volume, random_weights, write_weights

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def golden_inputs():
    rng = np.random.default_rng(7)
    img = DenseImageEmbedding(
        data=rng.normal(size=(4, 4, 8)).astype(np.float32).astype(np.float64)
    )
    txt = TextEmbeddingSet(
        names=["a", "b", "c"],
        vectors=rng.normal(size=(3, 8)).astype(np.float32).astype(np.float64),
    )
    weights = random_weights(seed=7, num_iterations=2, embed_dim=8, guidance_dim=3)
    return img, txt, weights


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)

    write_embedding(
        EmbeddingContainer(
            data=np.arange(16, dtype=np.float32).reshape(2, 2, 4) / 4.0,
            provenance="clip-vit-b-16",
        ),
        FIXTURES / "golden_embedding.vfse",
    )
    write_segmap(
        SegmentationMap(labels=np.array([[0, 1], [65535, 2]], dtype=np.uint16)),
        FIXTURES / "golden_map.segm",
    )

    img, txt, weights = golden_inputs()
    write_weights(weights, FIXTURES / "golden_weights.vfsw")
    volume = compute_cost_volume(img, txt)
    refined = aggregate(volume, img, txt, weights)
    write_embedding(
        EmbeddingContainer(
            data=refined.astype(np.float32), provenance="golden-aggregate-seed7"
        ),
        FIXTURES / "golden_aggregate.vfse",
    )
    print("fixtures written to", FIXTURES)


if __name__ == "__main__":
    main()
