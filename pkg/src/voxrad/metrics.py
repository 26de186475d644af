"""Patient- and lesion-level evaluation metrics.

AUROC uses the tie-aware Mann-Whitney formulation (pairs with equal scores
count 0.5); the paired-AUC comparison follows DeLong's placement-value
covariance estimate with normal-approximation confidence intervals. Lesion
matching is greedy in descending prediction score with an inclusive
IoU >= 0.10 hit rule; FROC counts unmatched predictions as false positives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .detect import DetectionMap
from .errors import InvalidArgumentError, SingleClassError

__all__ = [
    "RocCurve",
    "LesionMatchResult",
    "FrocCurve",
    "auroc",
    "roc_curve",
    "delong_compare",
    "match_lesions",
    "froc",
    "sensitivity_at_fp",
    "average_precision",
    "operating_point",
]

IOU_HIT_THRESHOLD = 0.10


def _check_binary(labels) -> tuple[int, int]:
    labels = np.asarray(labels)
    npos = int((labels == 1).sum())
    nneg = int((labels == 0).sum())
    if npos == 0 or nneg == 0:
        raise SingleClassError("both classes are required")
    if npos + nneg != labels.size:
        raise InvalidArgumentError("labels must be 0/1")
    return npos, nneg


def _midranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="stable")
    z = x[order]
    n = len(x)
    t = np.empty(n)
    i = 0
    while i < n:
        j = i
        while j < n and z[j] == z[i]:
            j += 1
        t[i:j] = 0.5 * (i + j - 1) + 1
        i = j
    out = np.empty(n)
    out[order] = t
    return out


def auroc(scores, labels) -> float:
    """Mann-Whitney AUC: mean over (pos, neg) pairs of 1[s+>s-] + 0.5[s+=s-]."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    m, n = _check_binary(labels)
    r = _midranks(scores)
    rank_sum = float(r[labels == 1].sum())
    return (rank_sum - m * (m + 1) / 2.0) / (m * n)


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray  # descending; decision score >= t
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def roc_curve(scores, labels) -> RocCurve:
    """ROC points swept over unique scores, anchored at (0,0) and (1,1);
    the stored AUC is the trapezoidal area under the curve."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    m, n = _check_binary(labels)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    pos = (labels[order] == 1).astype(np.int64)
    last = np.flatnonzero(np.r_[s[1:] != s[:-1], True])  # last row per unique value
    tp = np.cumsum(pos)[last]
    fp = (last + 1) - tp
    tpr = np.r_[0.0, tp / m, 1.0]
    fpr = np.r_[0.0, fp / n, 1.0]
    thr = np.r_[np.inf, s[last], -np.inf]
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(thresholds=thr, fpr=fpr, tpr=tpr, auc=auc)


def _placements(scores: np.ndarray, labels: np.ndarray):
    """DeLong placement values (v01 per positive, v10 per negative)."""
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    m, n = len(pos), len(neg)
    tx = _midranks(pos)
    ty = _midranks(neg)
    tz = _midranks(np.concatenate([pos, neg]))
    v01 = (tz[:m] - tx) / n
    v10 = 1.0 - (tz[m:] - ty) / m
    return v01, v10


def _var(a: np.ndarray) -> float:
    return float(a.var(ddof=1)) if len(a) > 1 else 0.0


def delong_compare(scores_a, scores_b, labels) -> dict:
    """Paired DeLong test of two AUCs on the same label vector.

    Returns AUCs, DeLong standard errors, 95% CIs (auc +/- 1.96 SE), the z
    statistic and two-sided p-value. A degenerate zero-variance difference
    gives p = 1 when the AUCs are equal (and 0 otherwise).
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    labels = np.asarray(labels)
    if a.shape != b.shape or a.shape[0] != labels.shape[0]:
        raise InvalidArgumentError("paired scores/labels length mismatch")
    m, n = _check_binary(labels)

    v01a, v10a = _placements(a, labels)
    v01b, v10b = _placements(b, labels)
    auc_a = float(v01a.mean())
    auc_b = float(v01b.mean())

    se_a = math.sqrt(_var(v01a) / m + _var(v10a) / n)
    se_b = math.sqrt(_var(v01b) / m + _var(v10b) / n)
    var_diff = _var(v01a - v01b) / m + _var(v10a - v10b) / n

    if var_diff <= 0:
        z = 0.0
        p = 1.0 if auc_a == auc_b else 0.0
    else:
        z = (auc_a - auc_b) / math.sqrt(var_diff)
        p = math.erfc(abs(z) / math.sqrt(2.0))
    return {
        "auc_a": auc_a,
        "auc_b": auc_b,
        "se_a": se_a,
        "se_b": se_b,
        "ci_a": (auc_a - 1.96 * se_a, auc_a + 1.96 * se_a),
        "ci_b": (auc_b - 1.96 * se_b, auc_b + 1.96 * se_b),
        "z": z,
        "p_value": p,
    }


# ---------------------------------------------------------------------------
# lesion matching

@dataclass(frozen=True)
class LesionMatchResult:
    hits: list  # (pred_id, gt_id, iou)
    false_positives: list  # pred ids
    missed: list  # gt ids


def match_lesions(pred: DetectionMap, gt_labels) -> LesionMatchResult:
    """Greedy one-to-one matching: predictions in descending score order each
    claim the unmatched ground-truth lesion of highest IoU, counting a hit
    when IoU >= 0.10 (inclusive)."""
    gt = np.asarray(gt_labels)
    if gt.shape != pred.labels.shape:
        raise InvalidArgumentError("prediction and ground-truth grids differ")
    pl = pred.labels.astype(np.int64)
    gl = gt.astype(np.int64)

    gt_ids = sorted(int(v) for v in np.unique(gl) if v != 0)
    pred_sizes = {l.id: l.voxel_count for l in pred.lesions}
    gt_sizes = {g: int((gl == g).sum()) for g in gt_ids}

    # pairwise intersections via a joint histogram of (pred, gt) labels
    both = (pl > 0) & (gl > 0)
    inter: dict[tuple[int, int], int] = {}
    if both.any():
        ngt = max(gt_ids) + 1
        joint = pl[both] * ngt + gl[both]
        counts = np.bincount(joint)
        for code in np.flatnonzero(counts):
            inter[(int(code) // ngt, int(code) % ngt)] = int(counts[code])

    order = sorted(pred.lesions, key=lambda l: (-l.score, l.id))
    taken = set()
    hits, fps = [], []
    for les in order:
        best = None
        for g in gt_ids:
            if g in taken:
                continue
            i = inter.get((les.id, g), 0)
            if i == 0:
                continue
            iou = i / (pred_sizes[les.id] + gt_sizes[g] - i)
            if iou >= IOU_HIT_THRESHOLD and (best is None or iou > best[1]):
                best = (g, iou)
        if best is None:
            fps.append(les.id)
        else:
            taken.add(best[0])
            hits.append((les.id, best[0], best[1]))
    missed = [g for g in gt_ids if g not in taken]
    return LesionMatchResult(hits=hits, false_positives=fps, missed=missed)


# ---------------------------------------------------------------------------
# FROC / average precision

@dataclass(frozen=True)
class FrocCurve:
    thresholds: np.ndarray  # descending
    fp_per_case: np.ndarray  # non-decreasing
    sensitivity: np.ndarray  # non-decreasing
    total_gt: int
    n_cases: int


def _scored_detections(per_case: list[tuple[DetectionMap, np.ndarray]]):
    """(score, is_hit) per detection across the cohort + total gt count.

    Greedy matching in score order is stable under score thresholding, so a
    single match per case fixes every detection's hit/FP status for the
    whole threshold sweep.
    """
    dets = []
    total_gt = 0
    for dm, gt in per_case:
        res = match_lesions(dm, gt)
        hit_ids = {p for p, _, _ in res.hits}
        for les in dm.lesions:
            dets.append((les.score, les.id in hit_ids))
        total_gt += len({int(v) for v in np.unique(np.asarray(gt)) if v != 0})
    return dets, total_gt


def froc(per_case: list[tuple[DetectionMap, np.ndarray]]) -> FrocCurve:
    """Lesion sensitivity vs mean false positives per case, swept over all
    detection scores (decision: score >= t)."""
    if not per_case:
        raise InvalidArgumentError("froc needs at least one case")
    dets, total_gt = _scored_detections(per_case)
    if total_gt == 0:
        raise InvalidArgumentError("froc needs at least one ground-truth lesion")
    n_cases = len(per_case)
    if not dets:
        return FrocCurve(np.empty(0), np.empty(0), np.empty(0), total_gt, n_cases)

    scores = np.array([s for s, _ in dets])
    hits = np.array([h for _, h in dets], dtype=np.int64)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    h = np.cumsum(hits[order])
    d = np.arange(1, len(s) + 1)
    last = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    return FrocCurve(
        thresholds=s[last],
        fp_per_case=(d[last] - h[last]) / n_cases,
        sensitivity=h[last] / total_gt,
        total_gt=total_gt,
        n_cases=n_cases,
    )


def sensitivity_at_fp(curve: FrocCurve, fp_rate: float) -> float:
    """Step-wise query: the best sensitivity achieved at <= fp_rate FPs/case."""
    ok = curve.fp_per_case <= fp_rate + 1e-12
    return float(curve.sensitivity[ok].max()) if ok.any() else 0.0


def average_precision(detections: list[tuple[float, bool]], total_gt: int) -> float:
    """AP over ranked detections: sum of precision at each hit / total_gt."""
    if total_gt < 1:
        raise InvalidArgumentError("total_gt must be >= 1")
    if not detections:
        return 0.0
    order = sorted(range(len(detections)), key=lambda i: -detections[i][0])
    ap = 0.0
    tp = 0
    for rank, i in enumerate(order, start=1):
        if detections[i][1]:
            tp += 1
            ap += tp / rank
    return ap / total_gt


def operating_point(scores, labels, t: float) -> dict:
    """Confusion counts and ratios for the decision rule score >= t."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    _check_binary(labels)
    pred = scores >= t
    tp = int((pred & (labels == 1)).sum())
    fp = int((pred & (labels == 0)).sum())
    fn = int((~pred & (labels == 1)).sum())
    tn = int((~pred & (labels == 0)).sum())
    return {
        "threshold": float(t),
        "tp": tp, "fp": fp, "fn": fn, "tn": tn,
        "sensitivity": tp / (tp + fn),
        "specificity": tn / (tn + fp),
        "precision": tp / (tp + fp) if tp + fp else 0.0,
    }
