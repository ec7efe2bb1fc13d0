"""Vocabulary-free semantic segmentation engine and evaluation harness."""

from .containers import (
    IGNORE_LABEL,
    UNMATCHED_LABEL,
    EmbeddingContainer,
    SegmentationMap,
    load_tags,
    load_vocabulary,
    peek_embedding,
    read_embedding,
    read_segmap,
    write_embedding,
    write_segmap,
    write_tags,
    write_vocabulary,
)
from .embeddings import (
    DenseImageEmbedding,
    PromptTemplate,
    TextEmbeddingSet,
    cosine,
    expand_prompts,
    l2_normalize_rows,
)
from .segmenter import (
    AggregationWeights,
    CostVolume,
    aggregate,
    class_aggregate,
    compute_cost_volume,
    random_weights,
    read_weights,
    segment_image,
    spatial_aggregate,
    upsample_and_argmax,
    write_weights,
)

__version__ = "0.1.0"

__all__ = [
    "IGNORE_LABEL",
    "UNMATCHED_LABEL",
    "EmbeddingContainer",
    "SegmentationMap",
    "read_embedding",
    "peek_embedding",
    "write_embedding",
    "read_segmap",
    "write_segmap",
    "load_tags",
    "write_tags",
    "load_vocabulary",
    "write_vocabulary",
    "DenseImageEmbedding",
    "TextEmbeddingSet",
    "PromptTemplate",
    "cosine",
    "expand_prompts",
    "l2_normalize_rows",
    "AggregationWeights",
    "CostVolume",
    "compute_cost_volume",
    "spatial_aggregate",
    "class_aggregate",
    "aggregate",
    "upsample_and_argmax",
    "segment_image",
    "random_weights",
    "read_weights",
    "write_weights",
    "__version__",
]
