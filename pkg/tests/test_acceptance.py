"""Acceptance suite: one test per release criterion, each printing a
pass/fail line. Tolerances are pinned here and nowhere else."""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from synth_datasets import BLOB_CLASSES, build_blob_dataset, build_husky_dataset
from vfseg.cli import main
from vfseg.containers import (
    EmbeddingContainer,
    SegmentationMap,
    read_embedding,
    read_segmap,
    write_embedding,
    write_segmap,
)
from vfseg.embeddings import DenseImageEmbedding, TextEmbeddingSet
from vfseg.manifest import load_manifest
from vfseg.metrics import ConfusionMatrix, accumulate, miou
from vfseg.perturb import PerturbationConfig, perturb_tags
from vfseg.runner import (
    evaluate_predictions,
    resolve_tags,
    segment_dataset,
    sweep_threshold,
)
from vfseg.segmenter import (
    aggregate,
    attention,
    class_aggregate,
    compute_cost_volume,
    random_weights,
    read_weights,
    spatial_aggregate,
)
from test_metrics import brute_force_iou
from test_segmenter import identity_weights, scalar_cost_volume

FIXTURES = Path(__file__).parent / "fixtures"


def report(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_criterion_cost_volume_oracle():
    rng = np.random.default_rng(2024)
    start = time.monotonic()
    worst = 0.0
    for _ in range(100):
        h = int(rng.integers(1, 17))
        w = int(rng.integers(1, 17))
        d = int(rng.integers(1, 33))
        n = int(rng.integers(1, 11))
        img = DenseImageEmbedding(data=rng.normal(size=(h, w, d)))
        txt = TextEmbeddingSet(
            names=[f"c{i}" for i in range(n)], vectors=rng.normal(size=(n, d))
        )
        got = compute_cost_volume(img, txt).values
        want = scalar_cost_volume(img, txt)
        worst = max(worst, float(np.abs(got - want).max()))
    elapsed = time.monotonic() - start
    report(
        "cost-volume oracle (100 random instances, tol 1e-6, < 10 s)",
        worst <= 1e-6 and elapsed < 10.0,
        f"max err {worst:.2e}, {elapsed:.2f} s",
    )


def test_criterion_miou_oracle():
    ok = True
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 9))
        gt = rng.integers(0, n, size=(16, 16)).astype(np.uint16)
        gt[rng.random((16, 16)) < 0.1] = 65535
        pred = rng.integers(0, n, size=(16, 16)).astype(np.uint16)
        pred[rng.random((16, 16)) < 0.1] = 65534
        conf = accumulate(
            ConfusionMatrix(num_classes=n),
            SegmentationMap(labels=gt),
            SegmentationMap(labels=pred),
        )
        if conf.total == 0:
            continue
        result = miou(conf)
        per_class, expected = brute_force_iou(gt, pred, n)
        ok = ok and result.per_class == per_class and result.miou == expected
    report("mIoU equals brute-force set computation (100 random 16x16 pairs, exact)", ok)


def test_criterion_hand_miou_example():
    gt = SegmentationMap(labels=np.array([[0, 0, 1, 1]], dtype=np.uint16))
    pred = SegmentationMap(labels=np.array([[0, 1, 1, 1]], dtype=np.uint16))
    result = miou(accumulate(ConfusionMatrix(num_classes=2), gt, pred))
    report(
        "hand example gt=[0,0,1,1], pred=[0,1,1,1] -> mIoU 7/12 exactly",
        result.miou == (1 / 2 + 2 / 3) / 2,
        f"got {result.miou}",
    )


def _blob_eval(tmp_path, tags):
    manifest = load_manifest(build_blob_dataset(tmp_path))
    preds, failures = segment_dataset(manifest, tags, None)
    assert not failures
    return manifest, evaluate_predictions(manifest, preds, 0.5)


def test_criterion_end_to_end_oracle_scene(tmp_path):
    manifest = load_manifest(build_blob_dataset(tmp_path / "a"))
    tags = resolve_tags(manifest, "oracle")
    preds, failures = segment_dataset(manifest, tags, None)
    assert not failures
    rep = evaluate_predictions(manifest, preds, 0.5)
    ok = (
        rep.hard_miou == 1.0
        and rep.tagging.accuracy == 100.0
        and rep.tagging.fp_mean == 0.0
        and rep.tagging.fn_mean == 0.0
    )
    report("oracle scene: hard mIoU 1.0, Acc 100, #FP = #FN = 0 (exact)", ok)

    # drop the "sky" class from its image's tags
    dropped = dict(tags)
    dropped["img_sky"] = [t for t in dropped["img_sky"] if t != "sky"]
    manifest2, rep2 = _blob_eval(tmp_path / "b", dropped)
    idx = {name: i for i, name in enumerate(manifest2.vocabulary)}
    per = rep2.per_class_iou_hard
    ok = (
        per[idx["sky"]] == 0.0
        and per[idx["grass"]] == 1.0
        and per[idx["water"]] == 1.0
    )
    report(
        "oracle scene: dropping one class zeroes its IoU, others stay 1.0 (exact)",
        ok,
        f"per-class {per}",
    )


def test_criterion_fn_fp_asymmetry(tmp_path):
    manifest = load_manifest(build_blob_dataset(tmp_path))
    oracle = resolve_tags(manifest, "oracle")
    master_seed = 77

    drop_cfg = PerturbationConfig(master_seed=master_seed, drop_count=1)
    fp_cfg = PerturbationConfig(
        fp_count=1, master_seed=master_seed, vocabulary=manifest.vocabulary
    )

    def run(cfg):
        tags = {
            image_id: perturb_tags(gt, cfg, image_id).tags
            for image_id, gt in oracle.items()
        }
        preds, failures = segment_dataset(manifest, tags, None)
        assert not failures
        return evaluate_predictions(manifest, preds, 0.5)

    miou_drop = run(drop_cfg).soft_miou
    miou_fp = run(fp_cfg).soft_miou
    miou_drop2 = run(drop_cfg).soft_miou
    report(
        "FN worse than FP: mIoU(drop 1 true) < mIoU(inject 1 false) by >= 0.2",
        miou_fp - miou_drop >= 0.2 and miou_drop == miou_drop2,
        f"drop {miou_drop:.4f} vs inject {miou_fp:.4f}",
    )


def test_criterion_threshold_behavior(tmp_path):
    manifest = load_manifest(build_husky_dataset(tmp_path))
    tags = resolve_tags(manifest, "file")
    preds, failures = segment_dataset(manifest, tags, None)
    assert not failures
    thresholds = [round(0.1 * i, 1) for i in range(11)]
    rows = sweep_threshold(manifest, preds, thresholds)  # asserts monotone itself
    counts = {r["tsbert"]: r["matched_names"] for r in rows}
    non_increasing = all(
        counts[a] >= counts[b]
        for a, b in zip(thresholds, thresholds[1:])
    )
    all_matched_at_zero = counts[0.0] == sum(len(t) for t in tags.values())
    husky_counts = (counts[0.0], counts[0.5], counts[0.9])
    report(
        "threshold sweep: counts non-increasing, all matched at T=0, husky (2,2,1)",
        non_increasing and all_matched_at_zero and husky_counts == (2, 2, 1),
        f"counts {husky_counts}",
    )


def test_criterion_aggregation_structure():
    rng = np.random.default_rng(5)
    img = DenseImageEmbedding(data=rng.normal(size=(4, 4, 8)))
    txt = TextEmbeddingSet(names=["a", "b", "c"], vectors=rng.normal(size=(3, 8)))
    vol = compute_cost_volume(img, txt)

    k0 = np.array_equal(aggregate(vol, img, txt, None), vol.values)

    w_id = identity_weights(img.dim)
    f = vol.values
    passthrough = (
        np.abs(spatial_aggregate(f, img, w_id, 0) - f).max() <= 1e-6
        and np.abs(class_aggregate(f, txt, w_id, 0) - f).max() <= 1e-6
    )

    w = random_weights(seed=7, num_iterations=1, embed_dim=img.dim)
    perm = [2, 0, 1]
    sp_equiv = (
        np.abs(
            spatial_aggregate(f[:, perm], img, w, 0)
            - spatial_aggregate(f, img, w, 0)[:, perm]
        ).max()
        <= 1e-6
    )
    sperm = rng.permutation(16)
    cl_equiv = (
        np.abs(
            class_aggregate(f[sperm], txt, w, 0) - class_aggregate(f, txt, w, 0)[sperm]
        ).max()
        <= 1e-6
    )
    x = rng.normal(size=(10, w.model_dim))
    _, attn = attention(x, w.iterations[0].spatial, return_attn=True)
    rows_ok = np.abs(attn.sum(axis=-1) - 1.0).max() <= 1e-6
    report(
        "aggregation: K=0 identity, residual passthrough, permutation "
        "equivariance, attention rows sum to 1 (tol 1e-6)",
        k0 and passthrough and sp_equiv and cl_equiv and rows_ok,
    )


def test_criterion_threads_byte_identical(tmp_path):
    manifest = build_blob_dataset(tmp_path / "d")
    outs = {}
    for threads in ("1", "8"):
        out = tmp_path / f"t{threads}"
        assert (
            main(
                [
                    "segment",
                    "--manifest",
                    str(manifest),
                    "--out",
                    str(out),
                    "--threads",
                    threads,
                ]
            )
            == 0
        )
        assert (
            main(
                [
                    "evaluate",
                    "--manifest",
                    str(manifest),
                    "--pred",
                    str(out),
                    "--out",
                    str(out),
                    "--threads",
                    threads,
                ]
            )
            == 0
        )
        outs[threads] = {
            p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file()
        }
    report("--threads 1 vs --threads 8 byte-identical artifacts", outs["1"] == outs["8"])


def test_criterion_format_round_trips(tmp_path):
    rng = np.random.default_rng(9)
    ok = True
    for shape in [(3, 5), (2, 4, 6), (1, 1), (7, 2, 3)]:
        c = EmbeddingContainer(
            data=rng.normal(size=shape).astype(np.float32), provenance="rt"
        )
        p = tmp_path / "c.vfse"
        write_embedding(c, p)
        first = p.read_bytes()
        write_embedding(read_embedding(p), p)
        ok = ok and p.read_bytes() == first and read_embedding(p) == c
    m = SegmentationMap(
        labels=rng.integers(0, 9, size=(16, 16)).astype(np.uint16)
    )
    p = tmp_path / "m.segm"
    write_segmap(m, p)
    first = p.read_bytes()
    write_segmap(read_segmap(p), p)
    ok = ok and p.read_bytes() == first

    golden = read_embedding(FIXTURES / "golden_embedding.vfse")
    ok = ok and golden.provenance == "clip-vit-b-16"
    ok = ok and np.array_equal(
        golden.data, np.arange(16, dtype=np.float32).reshape(2, 2, 4) / 4.0
    )
    gmap = read_segmap(FIXTURES / "golden_map.segm")
    ok = ok and np.array_equal(
        gmap.labels, np.array([[0, 1], [65535, 2]], dtype=np.uint16)
    )
    report("containers and maps round-trip bit-exactly; golden binaries parse", ok)
