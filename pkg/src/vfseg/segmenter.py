"""Cost-volume segmentation: similarity volume, iterative spatial/class
attention refinement with loadable weights, bilinear upsampling, and argmax.

The refinement block is single-head attention with a residual connection and
no feed-forward sublayer. Each token is the scalar cost value concatenated
with projected guidance features (model width = 1 + guidance width); after
attention only the cost channel is read back out.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .containers import IGNORE_LABEL, SegmentationMap, _read_exact
from .embeddings import DenseImageEmbedding, TextEmbeddingSet
from .errors import (
    BadMagicError,
    InvalidShapeError,
    ShapeMismatchError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)

WEIGHTS_MAGIC = b"VFSW"
WEIGHTS_VERSION = 1


@dataclass
class CostVolume:
    """(H*W) x N similarity tensor; spatial flattening is row-major (i = y*W + x)."""

    height: int
    width: int
    values: np.ndarray  # float64 (H*W, N)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] != self.height * self.width:
            raise ShapeMismatchError(
                f"values {self.values.shape} inconsistent with {self.height}x{self.width}"
            )

    @property
    def num_classes(self) -> int:
        return self.values.shape[1]


@dataclass
class AttentionBlockWeights:
    """Query/key/value/output matrices of one single-head block, each m x m."""

    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    wo: np.ndarray

    def __post_init__(self):
        for name in ("wq", "wk", "wv", "wo"):
            m = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise InvalidShapeError(f"{name} must be square, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise InvalidShapeError(f"{name} contains non-finite values")
            setattr(self, name, m)
        sizes = {getattr(self, n).shape[0] for n in ("wq", "wk", "wv", "wo")}
        if len(sizes) != 1:
            raise InvalidShapeError("attention matrices disagree on model width")

    @property
    def model_dim(self) -> int:
        return self.wq.shape[0]


@dataclass
class IterationWeights:
    spatial: AttentionBlockWeights
    cls: AttentionBlockWeights


@dataclass
class AggregationWeights:
    """K refinement iterations plus shared visual/text guidance projections."""

    iterations: list[IterationWeights]
    proj_visual: np.ndarray  # (d, guidance_dim)
    proj_text: np.ndarray  # (d, guidance_dim)
    provenance: str = ""

    def __post_init__(self):
        self.proj_visual = np.ascontiguousarray(self.proj_visual, dtype=np.float64)
        self.proj_text = np.ascontiguousarray(self.proj_text, dtype=np.float64)
        if self.proj_visual.shape != self.proj_text.shape or self.proj_visual.ndim != 2:
            raise InvalidShapeError("guidance projections must share one (d, g) shape")
        if not (np.all(np.isfinite(self.proj_visual)) and np.all(np.isfinite(self.proj_text))):
            raise InvalidShapeError("projection contains non-finite values")
        m = 1 + self.guidance_dim
        for it in self.iterations:
            if it.spatial.model_dim != m or it.cls.model_dim != m:
                raise InvalidShapeError(
                    f"attention width {it.spatial.model_dim} != 1 + guidance {self.guidance_dim}"
                )

    @property
    def num_iterations(self) -> int:
        return len(self.iterations)

    @property
    def embed_dim(self) -> int:
        return self.proj_visual.shape[0]

    @property
    def guidance_dim(self) -> int:
        return self.proj_visual.shape[1]

    @property
    def model_dim(self) -> int:
        return 1 + self.guidance_dim


def random_weights(
    seed: int, num_iterations: int, embed_dim: int, guidance_dim: int = 3
) -> AggregationWeights:
    """Deterministic pseudo-random weights, uniform in [-0.05, 0.05].

    Each matrix draws from its own Philox stream keyed by
    ``SeedSequence(seed, matrix_index)``, so the values are independent of
    generation order and platform. Values are rounded through float32 so the
    file round trip is exact.
    """
    m = 1 + guidance_dim
    counter = 0

    def draw(shape):
        nonlocal counter
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(counter,))
        counter += 1
        rng = np.random.Generator(np.random.Philox(ss))
        vals = rng.uniform(-0.05, 0.05, size=shape)
        return vals.astype(np.float32).astype(np.float64)

    iterations = []
    for _ in range(num_iterations):
        spatial = AttentionBlockWeights(*(draw((m, m)) for _ in range(4)))
        cls = AttentionBlockWeights(*(draw((m, m)) for _ in range(4)))
        iterations.append(IterationWeights(spatial=spatial, cls=cls))
    pv = draw((embed_dim, guidance_dim))
    pl = draw((embed_dim, guidance_dim))
    return AggregationWeights(
        iterations=iterations,
        proj_visual=pv,
        proj_text=pl,
        provenance=f"seed-init:{seed}",
    )


def write_weights(w: AggregationWeights, path: str | Path) -> None:
    """VFSW layout: magic, version u32, K u32, d u32, g u32, then per iteration
    spatial wq,wk,wv,wo and class wq,wk,wv,wo (each m*m float32 LE), then the
    visual and text projections (each d*g), then length-prefixed provenance."""
    with open(path, "wb") as f:
        f.write(WEIGHTS_MAGIC)
        f.write(
            struct.pack(
                "<IIII", WEIGHTS_VERSION, w.num_iterations, w.embed_dim, w.guidance_dim
            )
        )
        for it in w.iterations:
            for blk in (it.spatial, it.cls):
                for mat in (blk.wq, blk.wk, blk.wv, blk.wo):
                    f.write(mat.astype("<f4").tobytes())
        f.write(w.proj_visual.astype("<f4").tobytes())
        f.write(w.proj_text.astype("<f4").tobytes())
        prov = w.provenance.encode("utf-8")
        f.write(struct.pack("<I", len(prov)))
        f.write(prov)


def read_weights(path: str | Path) -> AggregationWeights:
    with open(path, "rb") as f:
        magic = _read_exact(f, 4, "magic")
        if magic != WEIGHTS_MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}")
        version, k, d, g = struct.unpack("<IIII", _read_exact(f, 16, "header"))
        if version != WEIGHTS_VERSION:
            raise UnsupportedVersionError(f"{path}: version {version}")
        if d == 0:
            raise InvalidShapeError(f"{path}: zero embedding dim")
        m = 1 + g

        def mat(rows, cols):
            buf = _read_exact(f, rows * cols * 4, "matrix")
            return np.frombuffer(buf, dtype="<f4").reshape(rows, cols).astype(np.float64)

        iterations = []
        for _ in range(k):
            spatial = AttentionBlockWeights(*(mat(m, m) for _ in range(4)))
            cls = AttentionBlockWeights(*(mat(m, m) for _ in range(4)))
            iterations.append(IterationWeights(spatial=spatial, cls=cls))
        pv = mat(d, g)
        pl = mat(d, g)
        (plen,) = struct.unpack("<I", _read_exact(f, 4, "provenance length"))
        prov = _read_exact(f, plen, "provenance").decode("utf-8")
        if f.read(1):
            raise TruncatedPayloadError(f"{path}: trailing bytes")
    return AggregationWeights(
        iterations=iterations, proj_visual=pv, proj_text=pl, provenance=prov
    )


def attention(x: np.ndarray, blk: AttentionBlockWeights, return_attn: bool = False):
    """Residual single-head attention over the second-to-last axis.

    x: (..., L, m). Softmax is computed stably; each attention row sums to 1.
    """
    m = blk.model_dim
    if x.shape[-1] != m:
        raise ShapeMismatchError(f"token width {x.shape[-1]} != model width {m}")
    q = x @ blk.wq
    k = x @ blk.wk
    v = x @ blk.wv
    scores = (q @ k.swapaxes(-1, -2)) / np.sqrt(m)
    scores -= scores.max(axis=-1, keepdims=True)
    attn = np.exp(scores)
    attn /= attn.sum(axis=-1, keepdims=True)
    out = x + (attn @ v) @ blk.wo
    if return_attn:
        return out, attn
    return out


def compute_cost_volume(img: DenseImageEmbedding, txt: TextEmbeddingSet) -> CostVolume:
    """Cosine similarity between every pixel embedding and every class row."""
    if img.dim != txt.dim:
        raise ShapeMismatchError(f"image dim {img.dim} != text dim {txt.dim}")
    values = kernels.cost_volume(img.data, txt.vectors)
    return CostVolume(height=img.height, width=img.width, values=values)


def spatial_aggregate(
    features: np.ndarray,
    img: DenseImageEmbedding,
    weights: AggregationWeights,
    iteration: int,
) -> np.ndarray:
    """One attention pass over the spatial axis, independently per class channel."""
    hw, n = features.shape
    if hw != img.height * img.width:
        raise ShapeMismatchError(f"{hw} tokens vs {img.height}x{img.width} image")
    if img.dim != weights.embed_dim:
        raise ShapeMismatchError(f"image dim {img.dim} != weights dim {weights.embed_dim}")
    guidance = img.data.reshape(hw, img.dim) @ weights.proj_visual  # (HW, g)
    # tokens: (N, HW, 1 + g); channel 0 carries the cost value
    x = np.empty((n, hw, weights.model_dim), dtype=np.float64)
    x[:, :, 0] = features.T
    x[:, :, 1:] = guidance[None, :, :]
    y = attention(x, weights.iterations[iteration].spatial)
    return np.ascontiguousarray(y[:, :, 0].T)


def class_aggregate(
    features: np.ndarray,
    txt: TextEmbeddingSet,
    weights: AggregationWeights,
    iteration: int,
) -> np.ndarray:
    """One attention pass over the class axis, independently per spatial location."""
    hw, n = features.shape
    if n != txt.count:
        raise ShapeMismatchError(f"{n} channels vs {txt.count} classes")
    if txt.dim != weights.embed_dim:
        raise ShapeMismatchError(f"text dim {txt.dim} != weights dim {weights.embed_dim}")
    guidance = txt.vectors @ weights.proj_text  # (N, g)
    x = np.empty((hw, n, weights.model_dim), dtype=np.float64)
    x[:, :, 0] = features
    x[:, :, 1:] = guidance[None, :, :]
    y = attention(x, weights.iterations[iteration].cls)
    return np.ascontiguousarray(y[:, :, 0])


def aggregate(
    volume: CostVolume,
    img: DenseImageEmbedding,
    txt: TextEmbeddingSet,
    weights: AggregationWeights | None,
) -> np.ndarray:
    """K iterations of spatial-then-class refinement; K = 0 is the identity."""
    features = volume.values.copy()
    if weights is None:
        return features
    for it in range(weights.num_iterations):
        features = spatial_aggregate(features, img, weights, it)
        features = class_aggregate(features, txt, weights, it)
    return features


def upsample_and_argmax(
    features: np.ndarray,
    height: int,
    width: int,
    target_height: int,
    target_width: int,
    num_classes: int,
) -> SegmentationMap:
    """Bilinear per-class upsampling followed by per-pixel argmax.

    Ties break to the lowest class index. Target dims must not be smaller
    than the feature grid.
    """
    if num_classes < 1:
        raise InvalidShapeError("empty class list")
    if features.shape != (height * width, num_classes):
        raise ShapeMismatchError(
            f"features {features.shape} vs {height}x{width} x {num_classes}"
        )
    if target_height < height or target_width < width:
        raise ShapeMismatchError("target dims must be >= feature dims")
    grid = features.reshape(height, width, num_classes)
    resized = kernels.bilinear_resize(grid, target_height, target_width)
    labels = kernels.argmax_labels(resized)
    return SegmentationMap(labels=labels)


def segment_image(
    img: DenseImageEmbedding,
    active_classes: list[str],
    txt_bank: TextEmbeddingSet,
    weights: AggregationWeights | None,
    target_height: int,
    target_width: int,
) -> SegmentationMap:
    """Full per-image pipeline; output labels index into ``active_classes``.

    An empty active set yields an all-ignore map (the perturbation simulator
    can legitimately drop every tag).
    """
    if not active_classes:
        labels = np.full((target_height, target_width), IGNORE_LABEL, dtype=np.uint16)
        return SegmentationMap(labels=labels)
    txt = txt_bank.subset(active_classes)
    volume = compute_cost_volume(img, txt)
    features = aggregate(volume, img, txt, weights)
    return upsample_and_argmax(
        features, img.height, img.width, target_height, target_width, txt.count
    )
