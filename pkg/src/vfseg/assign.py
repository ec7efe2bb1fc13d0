"""Mapping open-ended predicted class names onto an evaluation vocabulary.

Hard mode accepts only lexical identity (after canonicalization); soft mode
maps the remaining names to the vocabulary name with the highest
sentence-embedding cosine similarity, discarded below the threshold. The
threshold comparison is inclusive, so a threshold of zero matches everything.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .containers import IGNORE_LABEL, UNMATCHED_LABEL, SegmentationMap
from .embeddings import TextEmbeddingSet, cosine
from .errors import MissingEmbeddingError, ShapeMismatchError


def canonicalize(name: str) -> str:
    """Lowercase, trim, collapse internal whitespace."""
    return " ".join(name.strip().lower().split())


@dataclass(frozen=True)
class Match:
    gt_name: str
    score: float


@dataclass
class AssignmentMap:
    """Per predicted name: the matched vocabulary name and score, or None."""

    entries: dict[str, Match | None]
    threshold: float
    mode: str  # "hard" | "soft"

    def matched_names(self) -> list[str]:
        return [p for p, m in self.entries.items() if m is not None]

    def to_json_dict(self) -> dict:
        return {
            p: (None if m is None else {"gt": m.gt_name, "score": m.score})
            for p, m in self.entries.items()
        }


def _vocab_lookup(gt_vocab: list[str]) -> dict[str, str]:
    """Canonical name -> original vocabulary name (first occurrence wins)."""
    lut: dict[str, str] = {}
    for name in gt_vocab:
        lut.setdefault(canonicalize(name), name)
    return lut


def hard_assign(predicted: list[str], gt_vocab: list[str]) -> AssignmentMap:
    """Match iff the predicted name is lexically present in the vocabulary."""
    lut = _vocab_lookup(gt_vocab)
    entries: dict[str, Match | None] = {}
    for p in predicted:
        gt = lut.get(canonicalize(p))
        entries[p] = Match(gt_name=gt, score=1.0) if gt is not None else None
    return AssignmentMap(entries=entries, threshold=1.0, mode="hard")


def soft_assign(
    predicted: list[str],
    gt_vocab: list[str],
    embedder: TextEmbeddingSet | None,
    threshold: float,
) -> AssignmentMap:
    """Exact matches short-circuit; the rest go to the argmax-similarity
    vocabulary name when that similarity reaches the threshold.

    Argmax ties break to the name earliest in ``gt_vocab`` order. The
    embedder may be None only when every predicted name matches exactly.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside [0, 1]")
    lut = _vocab_lookup(gt_vocab)
    entries: dict[str, Match | None] = {}
    for p in predicted:
        exact = lut.get(canonicalize(p))
        if exact is not None:
            entries[p] = Match(gt_name=exact, score=1.0)
            continue
        if embedder is None:
            raise MissingEmbeddingError(
                f"no sentence-embedding bank available to assign {p!r}"
            )
        p_vec = _bank_row(embedder, p)
        best_name = None
        best_score = -np.inf
        for g in gt_vocab:
            score = cosine(p_vec, _bank_row(embedder, g))
            if score > best_score:
                best_score = score
                best_name = g
        if best_name is not None and best_score >= threshold:
            entries[p] = Match(gt_name=best_name, score=float(best_score))
        else:
            entries[p] = None
    return AssignmentMap(entries=entries, threshold=threshold, mode="soft")


def _bank_row(bank: TextEmbeddingSet, name: str) -> np.ndarray:
    if name in bank:
        return bank.row(name)
    canon = canonicalize(name)
    for n in bank.names:
        if canonicalize(n) == canon:
            return bank.row(n)
    raise MissingEmbeddingError(f"no embedding row for name {name!r}")


def apply_assignment(
    pred_map: SegmentationMap,
    pred_names: list[str],
    assignment: AssignmentMap,
    gt_vocab: list[str],
) -> SegmentationMap:
    """Relabel a prediction over ``pred_names`` into vocabulary indices.

    Unmatched names (and prediction-ignore pixels from an empty tag set) get
    the unmatched sentinel, which scoring counts as wrong against any class.
    Multiple predicted names mapping to one vocabulary name merge.
    """
    gt_index = {name: i for i, name in enumerate(gt_vocab)}
    lut = np.full(65536, UNMATCHED_LABEL, dtype=np.uint16)
    for idx, name in enumerate(pred_names):
        if name not in assignment.entries:
            raise ShapeMismatchError(f"predicted name {name!r} missing from assignment")
        match = assignment.entries[name]
        if match is not None:
            lut[idx] = gt_index[match.gt_name]
    labels = pred_map.labels
    real = labels[(labels != IGNORE_LABEL) & (labels != UNMATCHED_LABEL)]
    if real.size and int(real.max()) >= len(pred_names):
        raise ShapeMismatchError("prediction label index out of range for pred_names")
    return SegmentationMap(labels=lut[labels])
