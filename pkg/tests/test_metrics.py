import numpy as np
import pytest

from vfseg.assign import AssignmentMap, Match
from vfseg.containers import IGNORE_LABEL, UNMATCHED_LABEL, SegmentationMap
from vfseg.errors import EvaluationInputError, MetricsError, ShapeMismatchError
from vfseg.metrics import ConfusionMatrix, accumulate, miou, tagging_stats


def seg(arr):
    return SegmentationMap(labels=np.asarray(arr, dtype=np.uint16))


def brute_force_iou(gt, pred, n):
    """Set-based per-class IoU, exact integer arithmetic."""
    gt = np.asarray(gt).ravel()
    pred = np.asarray(pred).ravel()
    scored = gt != IGNORE_LABEL
    per_class = []
    for c in range(n):
        tp = int(np.sum(scored & (gt == c) & (pred == c)))
        fp = int(np.sum(scored & (gt != c) & (pred == c)))
        fn = int(np.sum(scored & (gt == c) & (pred != c)))
        union = tp + fp + fn
        per_class.append(None if union == 0 else tp / union)
    vals = [v for v in per_class if v is not None]
    return per_class, sum(vals) / len(vals)


def test_identical_maps_diagonal_only():
    m = seg([[0, 1], [1, 0]])
    conf = accumulate(ConfusionMatrix(num_classes=2), m, m)
    assert conf.counts[0, 0] == 2 and conf.counts[1, 1] == 2
    assert conf.total == 4
    assert miou(conf).miou == 1.0


def test_all_ignore_skipped():
    gt = seg(np.full((4, 4), IGNORE_LABEL))
    pred = seg(np.zeros((4, 4)))
    conf = accumulate(ConfusionMatrix(num_classes=2), gt, pred)
    assert conf.total == 0
    with pytest.raises(MetricsError):
        miou(conf)


def test_hand_confusion_example():
    gt = seg([[0, 0, 1, 1]])
    pred = seg([[0, 1, 1, 1]])
    conf = accumulate(ConfusionMatrix(num_classes=2), gt, pred)
    result = miou(conf)
    assert result.per_class[0] == pytest.approx(1 / 2)
    assert result.per_class[1] == pytest.approx(2 / 3)
    assert result.miou == pytest.approx(7 / 12)


def test_all_unmatched_sentinel_zero_miou():
    gt = seg([[0, 1]])
    pred = seg([[UNMATCHED_LABEL, UNMATCHED_LABEL]])
    conf = accumulate(ConfusionMatrix(num_classes=2), gt, pred)
    assert miou(conf).miou == 0.0


def test_zero_union_classes_excluded():
    gt = seg([[0, 0]])
    pred = seg([[0, 0]])
    conf = accumulate(ConfusionMatrix(num_classes=3), gt, pred)
    result = miou(conf)
    assert result.per_class[1] is None and result.per_class[2] is None
    assert result.miou == 1.0


def test_accumulate_matches_scalar_tally():
    rng = np.random.default_rng(3)
    n = 4
    gt_arr = rng.integers(0, n, size=(16, 16)).astype(np.uint16)
    gt_arr[rng.random((16, 16)) < 0.1] = IGNORE_LABEL
    pred_arr = rng.integers(0, n, size=(16, 16)).astype(np.uint16)
    pred_arr[rng.random((16, 16)) < 0.1] = UNMATCHED_LABEL
    conf = accumulate(ConfusionMatrix(num_classes=n), seg(gt_arr), seg(pred_arr))
    expected = np.zeros((n, n + 1), dtype=np.uint64)
    for g, p in zip(gt_arr.ravel(), pred_arr.ravel()):
        if g == IGNORE_LABEL:
            continue
        expected[g, n if p == UNMATCHED_LABEL else p] += 1
    np.testing.assert_array_equal(conf.counts, expected)


def test_miou_oracle_equivalence_many_seeds():
    n = 5
    for seed in range(100):
        rng = np.random.default_rng(seed)
        gt_arr = rng.integers(0, n, size=(8, 8)).astype(np.uint16)
        gt_arr[rng.random((8, 8)) < 0.15] = IGNORE_LABEL
        pred_arr = rng.integers(0, n, size=(8, 8)).astype(np.uint16)
        pred_arr[rng.random((8, 8)) < 0.15] = UNMATCHED_LABEL
        conf = accumulate(ConfusionMatrix(num_classes=n), seg(gt_arr), seg(pred_arr))
        if conf.total == 0:
            continue
        result = miou(conf)
        per_class, expected_miou = brute_force_iou(gt_arr, pred_arr, n)
        assert result.per_class == per_class
        assert result.miou == expected_miou


def test_accumulate_order_independent():
    rng = np.random.default_rng(8)
    maps = [
        (seg(rng.integers(0, 3, (4, 4))), seg(rng.integers(0, 3, (4, 4))))
        for _ in range(5)
    ]
    a = ConfusionMatrix(num_classes=3)
    for gt, pred in maps:
        accumulate(a, gt, pred)
    b = ConfusionMatrix(num_classes=3)
    for gt, pred in reversed(maps):
        accumulate(b, gt, pred)
    np.testing.assert_array_equal(a.counts, b.counts)


def test_accumulate_shape_and_range_errors():
    with pytest.raises(ShapeMismatchError):
        accumulate(ConfusionMatrix(num_classes=2), seg([[0]]), seg([[0, 1]]))
    with pytest.raises(MetricsError):
        accumulate(ConfusionMatrix(num_classes=2), seg([[5]]), seg([[0]]))
    with pytest.raises(MetricsError):
        accumulate(ConfusionMatrix(num_classes=2), seg([[0]]), seg([[7]]))


def amap(entries):
    return AssignmentMap(entries=entries, threshold=0.5, mode="soft")


def test_tagging_exact_predictions():
    gt_sets = {"i1": {"a", "b"}, "i2": {"c"}}
    assignments = {
        "i1": amap({"a": Match("a", 1.0), "b": Match("b", 1.0)}),
        "i2": amap({"c": Match("c", 1.0)}),
    }
    stats = tagging_stats(gt_sets, assignments)
    assert stats.accuracy == 100.0
    assert stats.fp_mean == 0.0 and stats.fn_mean == 0.0


def test_tagging_mixed_example():
    # GT {a, b}, predicted {a, z} with z unmatched
    stats = tagging_stats(
        {"i": {"a", "b"}}, {"i": amap({"a": Match("a", 1.0), "z": None})}
    )
    assert stats.accuracy == 50.0
    assert stats.fp_mean == 1.0 and stats.fn_mean == 1.0


def test_tagging_empty_predictions():
    stats = tagging_stats(
        {"i1": {"a", "b"}, "i2": {"c"}}, {"i1": amap({}), "i2": amap({})}
    )
    assert stats.accuracy == 0.0
    assert stats.fp_mean == 0.0
    assert stats.fn_mean == pytest.approx(1.5)


def test_tagging_fp_for_class_absent_from_image():
    # "b" is a real vocab class but absent from this image's GT
    stats = tagging_stats({"i": {"a"}}, {"i": amap({"a": Match("a", 1.0), "b": Match("b", 1.0)})})
    assert stats.accuracy == 100.0
    assert stats.fp_mean == 1.0


def test_tagging_misaligned_ids():
    with pytest.raises(EvaluationInputError):
        tagging_stats({"i1": {"a"}}, {"i2": amap({})})
