"""Seeded simulation of tagger errors on top of oracle class lists.

Each image draws from its own random stream derived from the master seed and
the image id, so results are independent of evaluation order and
parallelism. The derivation is documented and fixed: FNV-1a 64-bit over the
UTF-8 image id, XORed into the master seed, then passed through one
splitmix64 round; the result keys a Philox generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PerturbationError
from .runner import evaluate_predictions, segment_dataset
from .segmenter import AggregationWeights

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, image_id: str) -> int:
    """64-bit per-image seed; stable across platforms and runs."""
    return _splitmix64((master_seed & _MASK64) ^ _fnv1a64(image_id.encode("utf-8")))


@dataclass
class PerturbationConfig:
    """Per-class Bernoulli dropping plus uniform false-positive injection.

    ``drop_count`` switches to dropping exactly that many classes per image
    (deterministic-count mode); otherwise each class is dropped
    independently with probability ``drop_rate``.
    """

    drop_rate: float = 0.0
    fp_count: int = 0
    master_seed: int = 0
    vocabulary: list[str] = field(default_factory=list)
    drop_count: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.drop_rate <= 1.0:
            raise PerturbationError(f"drop_rate {self.drop_rate} outside [0, 1]")
        if self.fp_count < 0:
            raise PerturbationError("fp_count must be non-negative")
        if self.fp_count > 0 and not self.vocabulary:
            raise PerturbationError("false-positive injection needs a vocabulary")


@dataclass
class PerturbedTagSet:
    image_id: str
    survivors: list[str]   # GT classes kept, original order
    injected: list[str]    # sampled false classes, sample order
    seed: int

    @property
    def tags(self) -> list[str]:
        return self.survivors + self.injected


def perturb_tags(
    gt_classes: list[str], cfg: PerturbationConfig, image_id: str
) -> PerturbedTagSet:
    """Drop GT classes and inject vocabulary-sampled false positives.

    Survivors keep their original order; injected classes are sampled
    uniformly without replacement from the vocabulary minus the image's GT
    set. The empty result is legal.
    """
    seed = derive_seed(cfg.master_seed, image_id)
    rng = np.random.Generator(np.random.Philox(key=seed))
    gt_classes = list(gt_classes)
    if cfg.drop_count is not None:
        k = min(cfg.drop_count, len(gt_classes))
        dropped = set(rng.choice(len(gt_classes), size=k, replace=False).tolist()) if k else set()
        survivors = [c for i, c in enumerate(gt_classes) if i not in dropped]
    else:
        keep = rng.random(len(gt_classes)) >= cfg.drop_rate
        survivors = [c for c, k in zip(gt_classes, keep) if k]
    injected: list[str] = []
    if cfg.fp_count > 0:
        gt_set = set(gt_classes)
        candidates = [v for v in cfg.vocabulary if v not in gt_set]
        if cfg.fp_count > len(candidates):
            raise PerturbationError(
                f"cannot sample {cfg.fp_count} false positives from "
                f"{len(candidates)} candidates for image {image_id!r}"
            )
        idx = rng.choice(len(candidates), size=cfg.fp_count, replace=False)
        injected = [candidates[i] for i in idx.tolist()]
    assert not set(injected) & set(gt_classes)
    return PerturbedTagSet(
        image_id=image_id, survivors=survivors, injected=injected, seed=seed
    )


def sweep_perturbation(
    manifest,
    grid: list[tuple[float, int]],
    weights: AggregationWeights | None,
    tsbert: float,
    master_seed: int = 0,
    fp_vocabulary: list[str] | None = None,
    threads: int = 1,
) -> list[dict]:
    """Evaluate the dataset once per (drop_rate, fp_count) grid point.

    Rows follow grid order; everything is a pure function of the inputs and
    the master seed. False positives are sampled from ``fp_vocabulary``
    (default: the manifest vocabulary).
    """
    vocab = fp_vocabulary if fp_vocabulary is not None else manifest.vocabulary
    oracle = {e.image_id: manifest.oracle_tags(e) for e in manifest.entries}
    rows = []
    for drop_rate, fp_count in grid:
        cfg = PerturbationConfig(
            drop_rate=drop_rate,
            fp_count=fp_count,
            master_seed=master_seed,
            vocabulary=vocab,
        )
        tags = {
            image_id: perturb_tags(gt, cfg, image_id).tags
            for image_id, gt in oracle.items()
        }
        predictions, failures = segment_dataset(manifest, tags, weights, threads)
        if failures:
            raise PerturbationError(
                f"segmentation failed for {[f.image_id for f in failures]}"
            )
        report = evaluate_predictions(
            manifest,
            predictions,
            tsbert,
            {"drop_rate": drop_rate, "fp_count": fp_count, "master_seed": master_seed},
        )
        rows.append(
            {
                "drop_rate": drop_rate,
                "fp_count": fp_count,
                "soft_miou": report.soft_miou,
                "hard_miou": report.hard_miou,
                "acc": report.tagging.accuracy,
                "fp_mean": report.tagging.fp_mean,
                "fn_mean": report.tagging.fn_mean,
            }
        )
    return rows
