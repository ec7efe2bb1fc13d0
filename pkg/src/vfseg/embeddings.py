"""Embedding domain types, cosine similarity, and prompt-template expansion."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .containers import EmbeddingContainer
from .errors import DegenerateVectorError, InvalidShapeError, PromptError, UnknownClassError

DEFAULT_TEMPLATE = "A photo of a {class}"
ADJECTIVE_TEMPLATE = "A photo of a {adjective} {class}"


def _check_norms(norms: np.ndarray, what: str) -> None:
    if np.any(norms <= 0.0) or not np.all(np.isfinite(norms)):
        raise DegenerateVectorError(f"zero-norm or non-finite {what} vector")


def cosine(u, v) -> float:
    """Cosine similarity of two vectors, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu <= 0.0 or nv <= 0.0:
        raise DegenerateVectorError("cosine of zero-norm vector")
    return float(np.clip(float(u @ v) / (nu * nv), -1.0, 1.0))


def l2_normalize_rows(matrix) -> np.ndarray:
    """Return a copy with every row scaled to unit L2 norm."""
    m = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(m, axis=-1, keepdims=True)
    _check_norms(norms, "row")
    return m / norms


@dataclass
class DenseImageEmbedding:
    """Per-pixel visual feature grid, H x W x d."""

    data: np.ndarray  # float64 (H, W, d)

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 3:
            raise InvalidShapeError("dense image embedding must be rank 3 (H, W, d)")
        _check_norms(np.linalg.norm(self.data, axis=-1), "spatial")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]

    @classmethod
    def from_container(cls, c: EmbeddingContainer) -> "DenseImageEmbedding":
        if c.data.ndim != 3:
            raise InvalidShapeError(f"expected rank-3 container, got rank {c.data.ndim}")
        return cls(data=c.data.astype(np.float64))


@dataclass
class TextEmbeddingSet:
    """Named class embeddings, one row per name."""

    names: list[str]
    vectors: np.ndarray  # float64 (N, d)
    provenance: str = ""
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.vectors = np.ascontiguousarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise InvalidShapeError("text embeddings must be rank 2 (N, d)")
        if len(self.names) == 0:
            raise InvalidShapeError("text embedding set must hold at least one name")
        if len(self.names) != self.vectors.shape[0]:
            raise InvalidShapeError(
                f"{len(self.names)} names but {self.vectors.shape[0]} rows"
            )
        if len(set(self.names)) != len(self.names):
            raise InvalidShapeError("class names must be unique")
        _check_norms(np.linalg.norm(self.vectors, axis=-1), "text")
        self._index = {n: i for i, n in enumerate(self.names)}

    @property
    def count(self) -> int:
        return len(self.names)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def row(self, name: str) -> np.ndarray:
        try:
            return self.vectors[self._index[name]]
        except KeyError:
            raise UnknownClassError(f"no embedding row for class {name!r}") from None

    def subset(self, names: list[str]) -> "TextEmbeddingSet":
        """Restrict to the given names in the given order."""
        rows = np.stack([self.row(n) for n in names])
        return TextEmbeddingSet(names=list(names), vectors=rows, provenance=self.provenance)

    @classmethod
    def from_container(cls, names: list[str], c: EmbeddingContainer) -> "TextEmbeddingSet":
        if c.data.ndim != 2:
            raise InvalidShapeError(f"expected rank-2 container, got rank {c.data.ndim}")
        return cls(names=names, vectors=c.data.astype(np.float64), provenance=c.provenance)

    def merged(self, other: "TextEmbeddingSet") -> "TextEmbeddingSet":
        """Concatenate two banks; duplicate names keep the first bank's row."""
        extra = [i for i, n in enumerate(other.names) if n not in self._index]
        if not extra:
            return self
        return TextEmbeddingSet(
            names=self.names + [other.names[i] for i in extra],
            vectors=np.vstack([self.vectors, other.vectors[extra]]),
            provenance=self.provenance,
        )


@dataclass(frozen=True)
class PromptTemplate:
    """Prompt pattern with a mandatory {class} and optional {adjective} slot."""

    pattern: str = DEFAULT_TEMPLATE

    def __post_init__(self):
        if self.pattern.count("{class}") != 1:
            raise PromptError(f"pattern must contain {{class}} exactly once: {self.pattern!r}")

    @property
    def wants_adjective(self) -> bool:
        return "{adjective}" in self.pattern

    def render(self, name: str, adjective: str | None = None) -> str:
        out = self.pattern.replace("{class}", name)
        if self.wants_adjective:
            if adjective is None:
                raise PromptError(f"template needs an adjective for {name!r}")
            out = out.replace("{adjective}", adjective)
        return out


def expand_prompts(
    names: list[str],
    template: PromptTemplate,
    adjectives: dict[str, list[str]] | None = None,
) -> list[str]:
    """One prompt per (name x adjective); name order first, adjective order second."""
    prompts: list[str] = []
    for name in names:
        if template.wants_adjective:
            if adjectives is None or name not in adjectives or not adjectives[name]:
                raise PromptError(f"no adjectives provided for {name!r}")
            for adj in adjectives[name]:
                prompts.append(template.render(name, adj))
        else:
            prompts.append(template.render(name))
    return prompts
