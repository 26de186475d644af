"""Exact per-row SHAP attributions for the tree ensemble.

Implements the polynomial-time path algorithm with path-dependent
(cover-weighted) expectations: the conditional expectation of a tree given a
feature subset follows the row where the subset decides and averages the
children by training cover elsewhere. Attributions therefore satisfy
``base + sum(phi) == margin(row)`` exactly (up to float error), where
``base`` is the cover-weighted expectation of the whole ensemble.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, ModelSchemaError
from .gbt import Tree, TreeEnsemble, predict_margin

__all__ = [
    "ShapVector",
    "LesionExplanation",
    "tree_shap",
    "tree_shap_batch",
    "ensemble_expectation",
    "explain_lesion",
    "write_explanation",
]


@dataclass(frozen=True)
class ShapVector:
    phi: np.ndarray  # one attribution per feature, margin units
    base: float  # expected ensemble margin


@dataclass(frozen=True)
class LesionExplanation:
    lesion_id: int
    n_voxels: int
    # (feature name, mean phi, mean |phi|), ranked by mean |phi| descending
    top: list[tuple[str, float, float]]
    base: float


def _check_cover(tree: Tree):
    if tree.cover is None or len(tree.cover) != len(tree.feature):
        raise ModelSchemaError("tree is missing cover counts")
    internal = tree.feature >= 0
    if np.any(tree.cover[internal] <= 0):
        raise ModelSchemaError("non-positive cover on an internal node")


def _expectations(tree: Tree) -> np.ndarray:
    """Cover-weighted expectation of the subtree below each node."""
    exp = tree.value.astype(np.float64).copy()

    def rec(i: int) -> float:
        if tree.feature[i] < 0:
            return exp[i]
        l, r = tree.left[i], tree.right[i]
        wl, wr = tree.cover[l], tree.cover[r]
        exp[i] = (wl * rec(l) + wr * rec(r)) / (wl + wr)
        return exp[i]

    rec(0)
    return exp


def ensemble_expectation(ens: TreeEnsemble) -> float:
    """Expected margin of the ensemble under the training distribution."""
    total = ens.base_margin
    for t in ens.trees:
        _check_cover(t)
        total += _expectations(t)[0]
    return float(total)


# ---------------------------------------------------------------------------
# path algorithm

def _extend(fidx, zf, of, pw, depth, pz, po, pi):
    fidx[depth] = pi
    zf[depth] = pz
    of[depth] = po
    pw[depth] = 1.0 if depth == 0 else 0.0
    for i in range(depth - 1, -1, -1):
        pw[i + 1] += po * pw[i] * (i + 1) / (depth + 1)
        pw[i] = pz * pw[i] * (depth - i) / (depth + 1)


def _unwind(fidx, zf, of, pw, depth, idx):
    po = of[idx]
    pz = zf[idx]
    nxt = pw[depth]
    for i in range(depth - 1, -1, -1):
        if po != 0.0:
            tmp = pw[i]
            pw[i] = nxt * (depth + 1) / ((i + 1) * po)
            nxt = tmp - pw[i] * pz * (depth - i) / (depth + 1)
        else:
            pw[i] = pw[i] * (depth + 1) / (pz * (depth - i))
    for i in range(idx, depth):
        fidx[i] = fidx[i + 1]
        zf[i] = zf[i + 1]
        of[i] = of[i + 1]


def _unwound_sum(zf, of, pw, depth, idx):
    po = of[idx]
    pz = zf[idx]
    nxt = pw[depth]
    total = 0.0
    for i in range(depth - 1, -1, -1):
        if po != 0.0:
            tmp = nxt * (depth + 1) / ((i + 1) * po)
            total += tmp
            nxt = pw[i] - tmp * pz * (depth - i) / (depth + 1)
        else:
            total += pw[i] / pz / ((depth - i) / (depth + 1))
    return total


def _shap_recurse(tree: Tree, x, phi, node, depth, p_fidx, p_zf, p_of, p_pw,
                  pz, po, pi, budget):
    # fresh path arrays per call; entries 0..depth-1 come from the parent
    # and _extend appends this split at index ``depth``
    fidx = np.empty(budget, dtype=np.int64)
    zf = np.empty(budget)
    of = np.empty(budget)
    pw = np.empty(budget)
    fidx[:depth] = p_fidx[:depth]
    zf[:depth] = p_zf[:depth]
    of[:depth] = p_of[:depth]
    pw[:depth] = p_pw[:depth]
    _extend(fidx, zf, of, pw, depth, pz, po, pi)

    f = tree.feature[node]
    if f < 0:
        leaf = tree.value[node]
        for i in range(1, depth + 1):
            w = _unwound_sum(zf, of, pw, depth, i)
            phi[fidx[i]] += w * (of[i] - zf[i]) * leaf
        return

    if x[f] < tree.threshold[node]:
        hot, cold = tree.left[node], tree.right[node]
    else:
        hot, cold = tree.right[node], tree.left[node]
    w = tree.cover[node]
    hot_z = tree.cover[hot] / w
    cold_z = tree.cover[cold] / w

    iz, io = 1.0, 1.0
    k = 1
    while k <= depth:
        if fidx[k] == f:
            break
        k += 1
    if k <= depth:
        iz, io = zf[k], of[k]
        _unwind(fidx, zf, of, pw, depth, k)
        depth -= 1

    _shap_recurse(tree, x, phi, hot, depth + 1, fidx, zf, of, pw,
                  iz * hot_z, io, f, budget)
    _shap_recurse(tree, x, phi, cold, depth + 1, fidx, zf, of, pw,
                  iz * cold_z, 0.0, f, budget)


def _tree_depth(tree: Tree, node: int = 0) -> int:
    if tree.feature[node] < 0:
        return 0
    return 1 + max(_tree_depth(tree, tree.left[node]),
                   _tree_depth(tree, tree.right[node]))


def tree_shap(ens: TreeEnsemble, row) -> ShapVector:
    """Exact Shapley attributions of one row under the tree-conditional
    (path-dependent) expectation."""
    x = np.asarray(row, dtype=np.float64).ravel()
    if x.shape[0] != ens.n_features:
        raise InvalidArgumentError(
            f"row width {x.shape[0]} != {ens.n_features} model features"
        )
    phi = np.zeros(ens.n_features)
    base = ens.base_margin
    empty_i = np.zeros(0, dtype=np.int64)
    empty_f = np.zeros(0)
    for t in ens.trees:
        _check_cover(t)
        base += _expectations(t)[0]
        if t.feature[0] < 0:  # single-leaf tree contributes only to base
            continue
        budget = _tree_depth(t) + 2
        _shap_recurse(t, x, phi, 0, 0, empty_i, empty_f, empty_f, empty_f,
                      1.0, 1.0, -1, budget)
    return ShapVector(phi=phi, base=float(base))


def tree_shap_batch(ens: TreeEnsemble, rows: np.ndarray) -> tuple[np.ndarray, float]:
    """phi matrix (n_rows, n_features) and the shared base value."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    out = np.empty((rows.shape[0], ens.n_features))
    base = 0.0
    for i, r in enumerate(rows):
        sv = tree_shap(ens, r)
        out[i] = sv.phi
        base = sv.base
    return out, base


# ---------------------------------------------------------------------------
# lesion-level aggregation

def explain_lesion(ens: TreeEnsemble, rows: np.ndarray, lesion_id: int = 1,
                   k: int = 20, aggregate: str = "mean") -> LesionExplanation:
    """Aggregate per-voxel attributions over a lesion and rank features.

    ``aggregate='mean'`` ranks by mean |phi| over the lesion's voxel rows
    (``'max'`` is available as an alternative); ties resolve in canonical
    feature order.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    if rows.shape[0] < 1:
        raise InvalidArgumentError("explain_lesion needs at least one voxel row")
    if aggregate not in ("mean", "max"):
        raise InvalidArgumentError(f"unknown aggregate {aggregate!r}")
    phis, base = tree_shap_batch(ens, rows)
    mean_phi = phis.mean(axis=0)
    if aggregate == "mean":
        weight = np.abs(phis).mean(axis=0)
    else:
        weight = np.abs(phis).max(axis=0)
    order = sorted(range(ens.n_features), key=lambda i: (-weight[i], i))
    k = min(k, ens.n_features)
    top = [(ens.feature_names[i], float(mean_phi[i]), float(weight[i]))
           for i in order[:k]]
    return LesionExplanation(lesion_id=lesion_id, n_voxels=rows.shape[0],
                             top=top, base=base)


def write_explanation(le: LesionExplanation, json_path, csv_path=None,
                      config_hash: str = "") -> None:
    doc = {
        "lesion_id": le.lesion_id,
        "n_voxels": le.n_voxels,
        "base_margin_expectation": le.base,
        "features": [
            {"name": n, "mean_phi": p, "mean_abs_phi": a} for n, p, a in le.top
        ],
        "config_hash": config_hash,
    }
    Path(json_path).parent.mkdir(parents=True, exist_ok=True)
    Path(json_path).write_text(json.dumps(doc, indent=1, sort_keys=True))
    if csv_path is not None:
        with open(csv_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["feature", "mean_phi", "mean_abs_phi"])
            for n, p, a in le.top:
                w.writerow([n, repr(p), repr(a)])
