"""Evaluation metric tests (AUROC, DeLong, matching, FROC, AP)."""

import numpy as np
import pytest

import oracles
from voxrad.detect import DetectionMap, Lesion
from voxrad.errors import InvalidArgumentError, SingleClassError
from voxrad.metrics import (
    auroc,
    average_precision,
    delong_compare,
    froc,
    match_lesions,
    operating_point,
    roc_curve,
    sensitivity_at_fp,
)

RNG = np.random.default_rng(99)


# ---------------------------------------------------------------------------
# AUROC

def test_auroc_example():
    assert auroc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75


def test_auroc_perfect_and_ties():
    assert auroc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
    assert auroc([0.5, 0.5, 0.5, 0.5], [0, 1, 0, 1]) == 0.5


def test_auroc_equals_pairwise_oracle_exactly():
    for _ in range(100):
        n = int(RNG.integers(4, 40))
        scores = np.round(RNG.random(n), 2)  # induce ties
        labels = RNG.integers(0, 2, n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        assert auroc(scores, labels) == oracles.naive_auroc(scores, labels)


def test_auroc_monotone_transform_invariant():
    scores = RNG.random(50)
    labels = RNG.integers(0, 2, 50)
    labels[0], labels[1] = 0, 1
    a = auroc(scores, labels)
    assert auroc(np.exp(3 * scores), labels) == a
    assert auroc(np.argsort(np.argsort(scores)).astype(float), labels) == a


def test_auroc_single_class():
    with pytest.raises(SingleClassError):
        auroc([0.1, 0.2], [1, 1])


def test_roc_curve_consistency():
    for _ in range(20):
        scores = np.round(RNG.random(30), 1)
        labels = RNG.integers(0, 2, 30)
        labels[:2] = [0, 1]
        c = roc_curve(scores, labels)
        assert c.fpr[0] == 0 and c.tpr[0] == 0
        assert c.fpr[-1] == 1 and c.tpr[-1] == 1
        assert np.all(np.diff(c.fpr) >= 0) and np.all(np.diff(c.tpr) >= 0)
        assert abs(c.auc - auroc(scores, labels)) < 1e-12


# ---------------------------------------------------------------------------
# DeLong

def test_delong_identical_classifiers():
    scores = RNG.random(30)
    labels = RNG.integers(0, 2, 30)
    labels[:2] = [0, 1]
    res = delong_compare(scores, scores, labels)
    assert res["p_value"] == 1.0
    assert res["auc_a"] == res["auc_b"]


def test_delong_ci_shrinks_with_n():
    def width(n, seed):
        rng = np.random.default_rng(seed)
        labels = np.r_[np.ones(n // 2), np.zeros(n // 2)]
        a = labels * 0.6 + rng.random(n) * 0.8
        b = labels * 0.5 + rng.random(n) * 0.9
        res = delong_compare(a, b, labels)
        return res["ci_a"][1] - res["ci_a"][0]

    w50 = np.mean([width(50, s) for s in range(10)])
    w500 = np.mean([width(500, s) for s in range(10)])
    assert w500 < w50


def test_delong_agrees_with_permutation_oracle():
    rng = np.random.default_rng(5)
    for seed in range(3):
        r = np.random.default_rng(seed)
        labels = np.r_[np.ones(10), np.zeros(10)]
        a = labels * 0.8 + r.random(20)
        b = labels * 0.3 + r.random(20)
        res = delong_compare(a, b, labels)
        # sign-flip permutation of the paired scores
        n_perm = 20000
        flips = rng.random((n_perm, 20)) < 0.5
        pa = np.where(flips, b, a)
        pb = np.where(flips, a, b)
        obs = abs(res["auc_a"] - res["auc_b"])
        count = 0
        for i in range(n_perm):
            d = abs(auroc(pa[i], labels) - auroc(pb[i], labels))
            if d >= obs - 1e-12:
                count += 1
        p_perm = count / n_perm
        assert abs(res["p_value"] - p_perm) < 0.05


def test_delong_validation():
    with pytest.raises(InvalidArgumentError):
        delong_compare([0.1, 0.2], [0.1], [1, 0])
    with pytest.raises(SingleClassError):
        delong_compare([0.1, 0.2], [0.3, 0.4], [1, 1])


# ---------------------------------------------------------------------------
# lesion matching

def _dm(labels, scores, spacing=(1.0, 1.0, 1.0)):
    labels = np.asarray(labels)
    lesions = []
    for i, s in enumerate(scores, start=1):
        lesions.append(Lesion(id=i, voxel_count=int((labels == i).sum()),
                              score=float(s), peak_index=-1))
    return DetectionMap(labels=labels.astype(np.uint16), spacing=spacing,
                        origin=(0, 0, 0), lesions=lesions)


def test_match_identical_masks():
    gt = np.zeros((8, 8, 4), int)
    gt[2:5, 2:5, 1:3] = 1
    dm = _dm(gt, [0.9])
    res = match_lesions(dm, gt)
    assert res.hits == [(1, 1, 1.0)]
    assert not res.false_positives and not res.missed


def test_match_overlapping_cubes():
    gt = np.zeros((30, 12, 12), int)
    pred = np.zeros((30, 12, 12), int)
    gt[0:10, 0:10, 0:10] = 1
    pred[5:15, 0:10, 0:10] = 1  # 500 voxel overlap
    res = match_lesions(_dm(pred, [0.8]), gt)
    assert res.hits[0][2] == pytest.approx(500 / 1500)


def test_match_boundary_iou_is_hit():
    # |A|=110, |B|=110, inter=20 -> IoU exactly 0.10
    gt = np.zeros((300, 2, 1), int)
    pred = np.zeros((300, 2, 1), int)
    gt[0:110, 0, 0] = 1
    pred[90:200, 0, 0] = 1
    res = match_lesions(_dm(pred, [0.9]), gt)
    assert len(res.hits) == 1
    assert res.hits[0][2] == pytest.approx(0.10)


def test_match_each_gt_used_once():
    gt = np.zeros((40, 4, 1), int)
    gt[0:10, 0, 0] = 1
    pred = np.zeros((40, 4, 1), int)
    pred[0:10, 0, 0] = 1   # lesion 1: perfect
    pred[2:10, 1, 0] = 2   # lesion 2: overlaps same gt in 0 voxels (row 1)
    res = match_lesions(_dm(pred, [0.9, 0.8]), gt)
    assert len(res.hits) == 1
    assert res.false_positives == [2]


def test_match_relabeling_invariance():
    gt = np.zeros((30, 6, 2), int)
    gt[0:8, 0:3, :] = 3
    gt[15:25, 0:4, :] = 7
    pred = np.zeros((30, 6, 2), int)
    pred[0:8, 0:3, :] = 2
    pred[16:24, 0:4, :] = 1
    res = match_lesions(_dm(pred, [0.5, 0.9]), gt)
    assert {h[1] for h in res.hits} == {3, 7}


# ---------------------------------------------------------------------------
# FROC

def _case(hit: bool, fp: int, gt_present=True, score=0.9):
    shape = (40, 10, 2)
    gt = np.zeros(shape, int)
    pred = np.zeros(shape, int)
    scores = []
    lid = 0
    if gt_present:
        gt[0:6, 0:3, :] = 1
    if hit:
        lid += 1
        pred[0:6, 0:3, :] = lid
        scores.append(score)
    for i in range(fp):
        lid += 1
        pred[10 + 4 * i: 12 + 4 * i, 6:9, :] = lid
        scores.append(score)
    return _dm(pred, scores), gt


def test_froc_single_perfect_case():
    curve = froc([_case(hit=True, fp=0)])
    assert (0.0, 1.0) in list(zip(curve.fp_per_case, curve.sensitivity))
    assert sensitivity_at_fp(curve, 0.0) == 1.0


def test_froc_reproduces_constructed_cohort():
    cases = []
    for i in range(200):
        if i < 91:
            cases.append(_case(hit=True, fp=0))            # matched gt
        elif i < 108:
            cases.append(_case(hit=False, fp=0))           # missed gt
        elif i < 148:
            cases.append(_case(hit=False, fp=1, gt_present=False))  # 40 FPs
        else:
            cases.append(_case(hit=False, fp=0, gt_present=False))
    curve = froc(cases)
    s = sensitivity_at_fp(curve, 0.2)
    assert s == pytest.approx(91 / 108)
    i = np.argmin(np.abs(curve.fp_per_case - 0.2))
    assert curve.fp_per_case[i] == pytest.approx(40 / 200)
    assert curve.sensitivity[i] == pytest.approx(91 / 108, abs=1e-12)


def test_removing_fp_never_hurts():
    base = [_case(hit=True, fp=2), _case(hit=False, fp=1), _case(hit=True, fp=0)]
    fewer = [_case(hit=True, fp=1), _case(hit=False, fp=0), _case(hit=True, fp=0)]
    c1, c2 = froc(base), froc(fewer)
    for r in (0.0, 0.5, 1.0, 2.0):
        assert sensitivity_at_fp(c2, r) >= sensitivity_at_fp(c1, r)


# ---------------------------------------------------------------------------
# average precision

def test_ap_trivial_cases():
    assert average_precision([(0.9, True)], total_gt=1) == 1.0
    assert average_precision([], total_gt=3) == 0.0


def test_ap_hand_case():
    dets = [(0.9, True), (0.8, False), (0.7, True)]
    assert average_precision(dets, total_gt=2) == pytest.approx(
        0.5 * (1.0 + 2 / 3), abs=1e-9
    )


# ---------------------------------------------------------------------------
# operating points

def test_operating_point_paper_counts():
    # 200 patients: 80 positive (75 detected), 120 negative (28 false alarms)
    scores = np.r_[np.full(75, 0.9), np.full(5, 0.1),
                   np.full(28, 0.9), np.full(92, 0.1)]
    labels = np.r_[np.ones(80), np.zeros(120)]
    op = operating_point(scores, labels, 0.5)
    assert (op["tp"], op["fn"], op["tn"], op["fp"]) == (75, 5, 92, 28)
    assert op["sensitivity"] == pytest.approx(75 / 80)
    assert op["specificity"] == pytest.approx(92 / 120)
    assert op["precision"] == pytest.approx(75 / 103)


def test_operating_point_extremes():
    scores = [0.2, 0.6, 0.8, 0.4]
    labels = [0, 1, 1, 0]
    lo = operating_point(scores, labels, 0.0)
    assert lo["sensitivity"] == 1.0 and lo["specificity"] == 0.0
    hi = operating_point(scores, labels, 0.9)
    assert hi["sensitivity"] == 0.0 and hi["specificity"] == 1.0
