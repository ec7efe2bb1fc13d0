"""Dataset-level orchestration shared by the CLI commands.

Images are independent, so segmentation and per-image scoring run in a
bounded thread pool; merges are index-ordered, making the results identical
for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .assign import AssignmentMap, apply_assignment, hard_assign, soft_assign
from .containers import SegmentationMap, load_tags, read_embedding
from .embeddings import DenseImageEmbedding
from .errors import EvaluationInputError, VfsegError
from .manifest import DatasetManifest, ManifestEntry
from .metrics import (
    ConfusionMatrix,
    EvaluationReport,
    accumulate,
    miou,
    tagging_stats,
)
from .segmenter import AggregationWeights, segment_image


@dataclass
class ImagePrediction:
    image_id: str
    segmap: SegmentationMap  # labels index into active_classes
    active_classes: list[str]


@dataclass
class ImageFailure:
    image_id: str
    error: str


def resolve_tags(
    manifest: DatasetManifest, tagger: str, tags_file: str | None = None
) -> dict[str, list[str]]:
    """Per-image class lists from the configured tag source.

    ``oracle`` derives each list from the GT map's distinct labels; ``file``
    reads a tag document and requires an entry for every image.
    """
    if tagger == "oracle":
        return {
            e.image_id: manifest.oracle_tags(e) for e in manifest.entries
        }
    if tagger == "file":
        if tags_file is not None:
            tags = load_tags(tags_file)
        else:
            tags = {}
            for e in manifest.entries:
                if e.tags_path is None:
                    raise EvaluationInputError(f"no tags for image {e.image_id!r}")
                tags.update({e.image_id: load_tags(e.tags_path).get(e.image_id, None)})
                if tags[e.image_id] is None:
                    raise EvaluationInputError(
                        f"tag file {e.tags_path} lacks image {e.image_id!r}"
                    )
        missing = [e.image_id for e in manifest.entries if e.image_id not in tags]
        if missing:
            raise EvaluationInputError(f"tags missing for images: {missing}")
        return {e.image_id: tags[e.image_id] for e in manifest.entries}
    raise ValueError(f"unknown tagger source {tagger!r}")


def segment_dataset(
    manifest: DatasetManifest,
    tags_by_image: dict[str, list[str]],
    weights: AggregationWeights | None,
    threads: int = 1,
) -> tuple[dict[str, ImagePrediction], list[ImageFailure]]:
    """Segment every manifest image; failures are collected, not raised."""

    def work(entry: ManifestEntry):
        img = DenseImageEmbedding.from_container(read_embedding(entry.embedding_path))
        gt = manifest.load_gt(entry)
        active = tags_by_image[entry.image_id]
        segmap = segment_image(img, active, manifest.text_bank, weights, gt.height, gt.width)
        return ImagePrediction(
            image_id=entry.image_id, segmap=segmap, active_classes=list(active)
        )

    predictions: dict[str, ImagePrediction] = {}
    failures: list[ImageFailure] = []
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = [(e.image_id, pool.submit(work, e)) for e in manifest.entries]
        for image_id, fut in futures:
            try:
                predictions[image_id] = fut.result()
            except VfsegError as err:
                failures.append(ImageFailure(image_id=image_id, error=str(err)))
    return predictions, failures


def evaluate_predictions(
    manifest: DatasetManifest,
    predictions: dict[str, ImagePrediction],
    tsbert: float,
    config_echo: dict | None = None,
) -> EvaluationReport:
    """Hard and soft mIoU plus tagging stats over the whole dataset."""
    missing = [e.image_id for e in manifest.entries if e.image_id not in predictions]
    if missing:
        raise EvaluationInputError(f"predictions missing for images: {missing}")
    vocab = manifest.vocabulary
    n = len(vocab)
    conf_hard = ConfusionMatrix(num_classes=n)
    conf_soft = ConfusionMatrix(num_classes=n)
    gt_sets: dict[str, set[str]] = {}
    soft_maps: dict[str, AssignmentMap] = {}
    for entry in manifest.entries:
        pred = predictions[entry.image_id]
        gt = manifest.load_gt(entry)
        gt_sets[entry.image_id] = {vocab[i] for i in gt.class_indices()}
        a_hard = hard_assign(pred.active_classes, vocab)
        a_soft = soft_assign(pred.active_classes, vocab, manifest.sbert_bank, tsbert)
        soft_maps[entry.image_id] = a_soft
        accumulate(
            conf_hard,
            gt,
            apply_assignment(pred.segmap, pred.active_classes, a_hard, vocab),
        )
        accumulate(
            conf_soft,
            gt,
            apply_assignment(pred.segmap, pred.active_classes, a_soft, vocab),
        )
    hard = miou(conf_hard)
    soft = miou(conf_soft)
    stats = tagging_stats(gt_sets, soft_maps)
    return EvaluationReport(
        class_names=list(vocab),
        per_class_iou_hard=hard.per_class,
        per_class_iou_soft=soft.per_class,
        hard_miou=hard.miou,
        soft_miou=soft.miou,
        tagging=stats,
        config=dict(config_echo or {}, tsbert=tsbert),
    )


def sweep_threshold(
    manifest: DatasetManifest,
    predictions: dict[str, ImagePrediction],
    thresholds: list[float],
    config_echo: dict | None = None,
) -> list[dict]:
    """One row per threshold: soft mIoU and total matched-name count.

    Matched counts are asserted non-increasing in the threshold.
    """
    rows = []
    prev_matched = None
    for t in sorted(min(max(float(t), 0.0), 1.0) for t in thresholds):
        report = evaluate_predictions(manifest, predictions, t, config_echo)
        matched = 0
        for pred in predictions.values():
            amap = soft_assign(
                pred.active_classes, manifest.vocabulary, manifest.sbert_bank, t
            )
            matched += len(amap.matched_names())
        if prev_matched is not None and matched > prev_matched:
            raise AssertionError(
                f"matched-name count increased from {prev_matched} to {matched} at T={t}"
            )
        prev_matched = matched
        rows.append(
            {"tsbert": t, "soft_miou": report.soft_miou, "matched_names": matched}
        )
    return rows
