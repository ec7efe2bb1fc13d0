"""Per-class IoU, hard/soft mIoU, and tagging-quality statistics.

Accumulation scope is dataset-global: one confusion matrix over all images.
The matrix has one extra prediction column for the unmatched sentinel, which
contributes to the ground-truth class's false negatives and to no class's
true positives. Classes with zero union are excluded from the mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assign import AssignmentMap
from .containers import IGNORE_LABEL, UNMATCHED_LABEL, SegmentationMap
from .errors import EvaluationInputError, MetricsError, ShapeMismatchError


@dataclass
class ConfusionMatrix:
    """N x (N+1) uint64 counts, indexed [gt][pred]; column N is the sentinel."""

    num_classes: int
    counts: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros((self.num_classes, self.num_classes + 1), dtype=np.uint64)
        else:
            self.counts = np.ascontiguousarray(self.counts, dtype=np.uint64)
            if self.counts.shape != (self.num_classes, self.num_classes + 1):
                raise ShapeMismatchError(f"counts shape {self.counts.shape}")

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.num_classes != self.num_classes:
            raise ShapeMismatchError("merging matrices of different class counts")
        self.counts += other.counts
        return self

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def accumulate(
    conf: ConfusionMatrix, gt: SegmentationMap, pred: SegmentationMap
) -> ConfusionMatrix:
    """Tally every non-ignore ground-truth pixel into the matrix."""
    if gt.labels.shape != pred.labels.shape:
        raise ShapeMismatchError(
            f"gt {gt.labels.shape} vs pred {pred.labels.shape}"
        )
    n = conf.num_classes
    g = gt.labels.ravel().astype(np.int64)
    p = pred.labels.ravel().astype(np.int64)
    keep = g != IGNORE_LABEL
    g = g[keep]
    p = p[keep]
    if g.size and int(g.max()) >= n:
        raise MetricsError(f"gt label {int(g.max())} out of range for {n} classes")
    bad = (p >= n) & (p != UNMATCHED_LABEL)
    if np.any(bad):
        raise MetricsError(f"pred label {int(p[bad][0])} out of range for {n} classes")
    p = np.where(p == UNMATCHED_LABEL, n, p)
    np.add.at(conf.counts, (g, p), 1)
    return conf


@dataclass
class IouResult:
    per_class: list[float | None]  # None for classes with zero union
    miou: float


def miou(conf: ConfusionMatrix) -> IouResult:
    """IoU_c = TP / (TP + FP + FN); mean over classes with nonzero union."""
    if conf.total == 0:
        raise MetricsError("empty confusion matrix")
    c = conf.counts.astype(np.float64)
    n = conf.num_classes
    tp = np.diag(c[:, :n])
    fn = c.sum(axis=1) - tp  # row includes the sentinel column
    fp = c[:, :n].sum(axis=0) - tp
    union = tp + fp + fn
    per_class: list[float | None] = []
    scored = []
    for i in range(n):
        if union[i] == 0:
            per_class.append(None)
        else:
            iou = float(tp[i] / union[i])
            per_class.append(iou)
            scored.append(iou)
    if not scored:
        raise MetricsError("no class has a nonzero union")
    # plain left-to-right sum so the value matches a scalar oracle exactly
    return IouResult(per_class=per_class, miou=sum(scored) / len(scored))


@dataclass
class TaggingStats:
    """Tag-level quality after assignment: recall percentage and mean
    per-image counts of spurious and missed classes."""

    accuracy: float          # 100 * matched GT classes / total GT classes (micro)
    accuracy_macro: float    # mean over images of per-image recall percentage
    fp_mean: float
    fn_mean: float
    per_image: dict[str, dict[str, int]]

    def to_json_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "accuracy_macro": self.accuracy_macro,
            "fp_mean": self.fp_mean,
            "fn_mean": self.fn_mean,
        }


def tagging_stats(
    gt_class_sets: dict[str, set[str]],
    assignments: dict[str, AssignmentMap],
) -> TaggingStats:
    """A GT class counts as matched when at least one predicted name is
    assigned to it; predicted names that are unmatched or assigned to a class
    absent from the image's GT count as false positives."""
    if set(gt_class_sets) != set(assignments):
        missing = set(gt_class_sets) ^ set(assignments)
        raise EvaluationInputError(f"image sets misaligned: {sorted(missing)[:5]}")
    per_image: dict[str, dict[str, int]] = {}
    total_gt = 0
    total_matched = 0
    recalls = []
    fps = []
    fns = []
    for image_id in sorted(gt_class_sets):
        gt_set = gt_class_sets[image_id]
        amap = assignments[image_id]
        assigned_gt = {m.gt_name for m in amap.entries.values() if m is not None}
        matched = len(gt_set & assigned_gt)
        missed = len(gt_set) - matched
        fp = sum(
            1
            for m in amap.entries.values()
            if m is None or m.gt_name not in gt_set
        )
        assert matched + missed == len(gt_set)
        per_image[image_id] = {"matched": matched, "missed": missed, "fp": fp}
        total_gt += len(gt_set)
        total_matched += matched
        if gt_set:
            recalls.append(100.0 * matched / len(gt_set))
        fps.append(fp)
        fns.append(missed)
    accuracy = 100.0 * total_matched / total_gt if total_gt else 0.0
    return TaggingStats(
        accuracy=accuracy,
        accuracy_macro=float(np.mean(recalls)) if recalls else 0.0,
        fp_mean=float(np.mean(fps)) if fps else 0.0,
        fn_mean=float(np.mean(fns)) if fns else 0.0,
        per_image=per_image,
    )


@dataclass
class EvaluationReport:
    """Everything a run produces, with enough configuration echoed to
    reproduce any number from the report alone."""

    class_names: list[str]
    per_class_iou_hard: list[float | None]
    per_class_iou_soft: list[float | None]
    hard_miou: float
    soft_miou: float
    tagging: TaggingStats
    config: dict

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "hard_miou": self.hard_miou,
            "soft_miou": self.soft_miou,
            "per_class_iou": {
                name: {"hard": h, "soft": s}
                for name, h, s in zip(
                    self.class_names, self.per_class_iou_hard, self.per_class_iou_soft
                )
            },
            "tagging": self.tagging.to_json_dict(),
        }

    def per_class_csv(self) -> str:
        lines = ["class,iou"]
        for name, s in zip(self.class_names, self.per_class_iou_soft):
            lines.append(f"{name},{'' if s is None else repr(s)}")
        return "\n".join(lines) + "\n"
