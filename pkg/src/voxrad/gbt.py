"""Gradient-boosted regression trees with a logistic objective.

Second-order boosting with exact greedy split search on presorted feature
columns. Deliberately small: binary logistic objective only, level-wise
growth, per-tree row/column subsampling, deterministic under a fixed seed
(identical serialized bytes across runs and thread counts).

Split gain is ``0.5 * (GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)) - gamma`` and a
split is committed only when that exceeds zero; leaf weights are
``-lr * G/(H+l)`` with the learning rate folded in. Node cover (training row
counts) is stored on every node to support path-dependent SHAP.
"""

from __future__ import annotations

import hashlib
import json
import logging
import zlib
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit, prange

from .errors import InvalidArgumentError, ModelSchemaError, SingleClassError
from .features.spec import FeatureMatrix

log = logging.getLogger(__name__)

__all__ = [
    "TrainConfig",
    "SamplingPolicy",
    "Tree",
    "TreeEnsemble",
    "assemble_training_set",
    "train",
    "predict_proba",
    "predict_margin",
    "cross_validate",
    "tune",
    "save_model",
    "load_model",
    "DEFAULT_SEARCH_SPACE",
]


@dataclass(frozen=True)
class TrainConfig:
    max_depth: int = 4
    num_rounds: int = 100
    learning_rate: float = 0.1
    min_child_weight: float = 1.0
    l2_lambda: float = 1.0
    gamma: float = 0.0
    subsample: float = 1.0
    colsample: float = 1.0
    early_stop_rounds: int = 0  # 0 disables
    seed: int = 0

    def __post_init__(self):
        if self.max_depth < 1 or self.num_rounds < 0:
            raise InvalidArgumentError("max_depth >= 1 and num_rounds >= 0 required")
        if not (0 < self.learning_rate <= 1):
            raise InvalidArgumentError("learning_rate must be in (0, 1]")
        if not (0 < self.subsample <= 1) or not (0 < self.colsample <= 1):
            raise InvalidArgumentError("subsample/colsample must be in (0, 1]")
        if self.l2_lambda < 0 or self.gamma < 0 or self.min_child_weight < 0:
            raise InvalidArgumentError("l2_lambda/gamma/min_child_weight must be >= 0")

    def to_dict(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "num_rounds": self.num_rounds,
            "learning_rate": self.learning_rate,
            "min_child_weight": self.min_child_weight,
            "l2_lambda": self.l2_lambda,
            "gamma": self.gamma,
            "subsample": self.subsample,
            "colsample": self.colsample,
            "early_stop_rounds": self.early_stop_rounds,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass(frozen=True)
class SamplingPolicy:
    """How voxel rows are sampled per patient for training.

    All csPCa rows are kept. Negatives: 'match-positive' draws as many as
    there are positives (falling back to ``fixed_n`` for lesion-free
    patients); 'fixed' always draws ``fixed_n``. Sampling is without
    replacement and seeded per case.
    """

    mode: str = "match-positive"
    fixed_n: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("match-positive", "fixed"):
            raise InvalidArgumentError(f"unknown sampling mode {self.mode!r}")
        if self.fixed_n < 1:
            raise InvalidArgumentError("fixed_n must be >= 1")

    def to_dict(self) -> dict:
        return {"mode": self.mode, "fixed_n": self.fixed_n, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingPolicy":
        return cls(**d)


@dataclass
class Tree:
    """Flat binary tree; leaves have feature == -1 and carry the weight."""

    feature: np.ndarray  # int32, -1 at leaves
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # float64 leaf weights (0 internally)
    cover: np.ndarray  # float64 training rows through the node

    def to_lists(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "cover": self.cover.tolist(),
            "default": "left",  # features are never missing; kept for format
        }

    @classmethod
    def from_lists(cls, d: dict) -> "Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int32),
            threshold=np.asarray(d["threshold"], dtype=np.float64),
            left=np.asarray(d["left"], dtype=np.int32),
            right=np.asarray(d["right"], dtype=np.int32),
            value=np.asarray(d["value"], dtype=np.float64),
            cover=np.asarray(d["cover"], dtype=np.float64),
        )


@dataclass
class TreeEnsemble:
    trees: list[Tree]
    base_margin: float
    feature_names: list[str]
    training_log_loss: list[float] = field(default_factory=list)
    _flat: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def flat_arrays(self):
        """Trees concatenated with global child indices (for the kernels)."""
        if self._flat is None:
            offs = [0]
            for t in self.trees:
                offs.append(offs[-1] + len(t.feature))
            n = offs[-1]
            feat = np.empty(n, dtype=np.int64)
            thr = np.empty(n, dtype=np.float64)
            left = np.empty(n, dtype=np.int64)
            right = np.empty(n, dtype=np.int64)
            value = np.empty(n, dtype=np.float64)
            for i, t in enumerate(self.trees):
                o = offs[i]
                sl = slice(o, o + len(t.feature))
                feat[sl] = t.feature
                thr[sl] = t.threshold
                left[sl] = np.where(t.left >= 0, t.left + o, -1)
                right[sl] = np.where(t.right >= 0, t.right + o, -1)
                value[sl] = t.value
            self._flat = (feat, thr, left, right, value,
                          np.asarray(offs[:-1], dtype=np.int64))
        return self._flat


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def log_loss(y, p) -> float:
    p = np.clip(p, 1e-15, 1 - 1e-15)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


# ---------------------------------------------------------------------------
# training set assembly

def _case_rng(seed: int, case_id: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(case_id.encode())])


def assemble_training_set(matrices: list[FeatureMatrix], policy: SamplingPolicy
                          ) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Stack sampled rows of all cases -> (X, y, patient_id per row)."""
    xs, ys, pids = [], [], []
    for fm in matrices:
        pos = np.flatnonzero(fm.labels == 1)
        neg = np.flatnonzero(fm.labels == 0)
        if policy.mode == "match-positive" and len(pos) > 0:
            want = len(pos)
        else:
            want = policy.fixed_n
        if want > len(neg):
            log.warning("%s: wanted %d negative rows, only %d available",
                        fm.case_id, want, len(neg))
            take = neg
        else:
            rng = _case_rng(policy.seed, fm.case_id)
            take = np.sort(rng.choice(neg, size=want, replace=False))
        keep = np.concatenate([pos, take])
        xs.append(fm.values[keep])
        ys.append(fm.labels[keep].astype(np.float64))
        pids.extend([fm.case_id] * len(keep))
    if not xs:
        raise InvalidArgumentError("no labeled rows to assemble")
    return np.vstack(xs), np.concatenate(ys), pids


# ---------------------------------------------------------------------------
# split search

@njit(cache=True, parallel=True)
def _best_splits(xv, order, node_of, g, h, feats, n_nodes, node_g, node_h,
                 mcw, lam, gamma, out_gain, out_thr):
    """Per (candidate feature, alive node) best split; rows scanned in
    presorted order so all nodes of a level are handled in one pass."""
    n = xv.shape[0]
    for fi in prange(len(feats)):
        f = feats[fi]
        run_g = np.zeros(n_nodes)
        run_h = np.zeros(n_nodes)
        last = np.empty(n_nodes)
        seen = np.zeros(n_nodes, dtype=np.uint8)
        for k in range(n):
            row = order[k, f]
            d = node_of[row]
            if d < 0:
                continue
            v = xv[row, f]
            if seen[d] == 1 and v > last[d]:
                gl = run_g[d]
                hl = run_h[d]
                gr = node_g[d] - gl
                hr = node_h[d] - hl
                if hl >= mcw and hr >= mcw:
                    gain = 0.5 * (
                        gl * gl / (hl + lam)
                        + gr * gr / (hr + lam)
                        - (gl + gr) * (gl + gr) / (hl + hr + lam)
                    ) - gamma
                    if gain > out_gain[fi, d]:
                        out_gain[fi, d] = gain
                        out_thr[fi, d] = 0.5 * (last[d] + v)
            run_g[d] += g[row]
            run_h[d] += h[row]
            last[d] = v
            seen[d] = 1


@njit(cache=True, parallel=True)
def _margin_kernel(feat, thr, left, right, value, roots, base, x, out):
    for i in prange(x.shape[0]):
        s = base
        for t in range(roots.shape[0]):
            node = roots[t]
            while feat[node] >= 0:
                if x[i, feat[node]] < thr[node]:
                    node = left[node]
                else:
                    node = right[node]
            s += value[node]
        out[i] = s


def predict_margin(ens: TreeEnsemble, x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=np.float64)))
    if x.shape[1] != ens.n_features:
        raise InvalidArgumentError(
            f"row width {x.shape[1]} != {ens.n_features} model features"
        )
    out = np.empty(x.shape[0])
    if not ens.trees:
        out[:] = ens.base_margin
        return out
    feat, thr, left, right, value, roots = ens.flat_arrays()
    _margin_kernel(feat, thr, left, right, value, roots, ens.base_margin, x, out)
    return out


def predict_proba(ens: TreeEnsemble, x: np.ndarray) -> np.ndarray:
    """Voxel-wise probability: logistic(base_margin + sum of tree outputs)."""
    return _sigmoid(predict_margin(ens, x))


# ---------------------------------------------------------------------------
# boosting

def _logit(p: float) -> float:
    p = min(max(p, 1e-12), 1 - 1e-12)
    return float(np.log(p / (1 - p)))


def _grow_tree(xv, order, g, h, rows_in, feats_in, cfg: TrainConfig) -> Tree:
    n = xv.shape[0]
    node_of = np.full(n, -1, dtype=np.int64)
    node_of[rows_in] = 0

    feature = [np.int32(-1)]
    threshold = [0.0]
    left = [np.int32(-1)]
    right = [np.int32(-1)]
    value = [0.0]
    cover = [float(len(rows_in))]

    alive = [0]  # tree-node id per compact level slot
    node_g = np.array([g[rows_in].sum()])
    node_h = np.array([h[rows_in].sum()])

    for _depth in range(cfg.max_depth):
        n_nodes = len(alive)
        out_gain = np.zeros((len(feats_in), n_nodes))
        out_thr = np.full((len(feats_in), n_nodes), np.nan)
        _best_splits(xv, order, node_of, g, h, feats_in, n_nodes,
                     node_g, node_h, cfg.min_child_weight, cfg.l2_lambda,
                     cfg.gamma, out_gain, out_thr)

        split_feat = np.full(n_nodes, -1, dtype=np.int64)
        split_thr = np.zeros(n_nodes)
        child_of = np.full((n_nodes, 2), -1, dtype=np.int64)
        next_alive = []
        n_next = 0
        for j, tid in enumerate(alive):
            best_f = -1
            best_gain = 0.0
            best_t = 0.0
            for fi in range(len(feats_in)):
                gn = out_gain[fi, j]
                if gn > best_gain:
                    best_gain = gn
                    best_f = int(feats_in[fi])
                    best_t = float(out_thr[fi, j])
            if best_f < 0:
                value[tid] = -cfg.learning_rate * node_g[j] / (node_h[j] + cfg.l2_lambda)
                continue
            lid, rid = len(feature), len(feature) + 1
            feature[tid] = np.int32(best_f)
            threshold[tid] = best_t
            left[tid] = np.int32(lid)
            right[tid] = np.int32(rid)
            for _ in range(2):
                feature.append(np.int32(-1))
                threshold.append(0.0)
                left.append(np.int32(-1))
                right.append(np.int32(-1))
                value.append(0.0)
                cover.append(0.0)
            split_feat[j] = best_f
            split_thr[j] = best_t
            child_of[j, 0] = n_next
            child_of[j, 1] = n_next + 1
            next_alive.extend([lid, rid])
            n_next += 2

        if not next_alive:
            break

        # route rows of split nodes to compact child slots; leaf rows retire
        act = np.flatnonzero(node_of >= 0)
        d = node_of[act]
        has = split_feat[d] >= 0
        act_s = act[has]
        d_s = d[has]
        goes_left = xv[act_s, split_feat[d_s]] < split_thr[d_s]
        node_of[act] = -1
        node_of[act_s] = np.where(goes_left, child_of[d_s, 0], child_of[d_s, 1])

        node_g = np.bincount(node_of[act_s], weights=g[act_s], minlength=n_next)
        node_h = np.bincount(node_of[act_s], weights=h[act_s], minlength=n_next)
        counts = np.bincount(node_of[act_s], minlength=n_next)
        for slot, tid in enumerate(next_alive):
            cover[tid] = float(counts[slot])
        alive = next_alive

    for j, tid in enumerate(alive):
        if feature[tid] < 0 and value[tid] == 0.0:
            value[tid] = -cfg.learning_rate * node_g[j] / (node_h[j] + cfg.l2_lambda)

    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=np.asarray(value, dtype=np.float64),
        cover=np.asarray(cover, dtype=np.float64),
    )


def _tree_margins(tree: Tree, xv: np.ndarray) -> np.ndarray:
    ens = TreeEnsemble([tree], 0.0, [""] * xv.shape[1])
    return predict_margin(ens, xv)


def train(x, y, cfg: TrainConfig, feature_names: list[str] | None = None,
          eval_set: tuple[np.ndarray, np.ndarray] | None = None) -> TreeEnsemble:
    """Fit the boosted ensemble.

    ``eval_set=(x_val, y_val)`` enables early stopping when
    ``cfg.early_stop_rounds > 0`` (the returned ensemble is truncated to the
    best validation round).
    """
    xv = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if xv.ndim != 2 or xv.shape[0] != y.shape[0]:
        raise InvalidArgumentError("x must be (n, f) with matching y")
    if xv.shape[0] < 2:
        raise InvalidArgumentError("need at least 2 rows")
    if len(np.unique(y)) < 2:
        raise SingleClassError("training rows contain a single class")
    n, nf = xv.shape
    if feature_names is None:
        feature_names = [f"f{i}" for i in range(nf)]
    if len(feature_names) != nf:
        raise InvalidArgumentError("feature_names length != n columns")

    rng = np.random.default_rng(cfg.seed)
    order = np.argsort(xv, axis=0, kind="stable")
    base = _logit(float(y.mean()))
    margin = np.full(n, base)
    ens = TreeEnsemble([], base, list(feature_names))

    val_margin = None
    if eval_set is not None:
        xe = np.ascontiguousarray(np.asarray(eval_set[0], dtype=np.float64))
        ye = np.asarray(eval_set[1], dtype=np.float64)
        val_margin = np.full(len(ye), base)
        best_loss = np.inf
        best_round = -1

    for rnd in range(cfg.num_rounds):
        p = _sigmoid(margin)
        g = p - y
        h = p * (1.0 - p)

        if cfg.subsample < 1.0:
            k = max(1, int(round(cfg.subsample * n)))
            rows_in = np.sort(rng.choice(n, size=k, replace=False))
        else:
            rows_in = np.arange(n)
        if cfg.colsample < 1.0:
            k = max(1, int(round(cfg.colsample * nf)))
            feats_in = np.sort(rng.choice(nf, size=k, replace=False))
        else:
            feats_in = np.arange(nf)

        tree = _grow_tree(xv, order, g, h, rows_in,
                          feats_in.astype(np.int64), cfg)
        ens.trees.append(tree)
        ens._flat = None
        margin += _tree_margins(tree, xv)
        ens.training_log_loss.append(log_loss(y, _sigmoid(margin)))

        if val_margin is not None:
            val_margin += _tree_margins(tree, xe)
            vl = log_loss(ye, _sigmoid(val_margin))
            if vl < best_loss - 1e-12:
                best_loss = vl
                best_round = rnd
            elif cfg.early_stop_rounds > 0 and rnd - best_round >= cfg.early_stop_rounds:
                ens.trees = ens.trees[: best_round + 1]
                ens.training_log_loss = ens.training_log_loss[: best_round + 1]
                ens._flat = None
                break

    return ens


# ---------------------------------------------------------------------------
# patient-level cross-validation

def stratified_patient_folds(patient_ids: list[str], patient_pos: dict[str, bool],
                             k: int, seed: int) -> dict[str, int]:
    """Deterministic fold id per patient, stratified by csPCa status."""
    pats = sorted(set(patient_ids))
    pos = [p for p in pats if patient_pos[p]]
    neg = [p for p in pats if not patient_pos[p]]
    if len(pos) < k or len(neg) < k:
        raise InvalidArgumentError(
            f"need >= {k} patients per class, got {len(pos)} pos / {len(neg)} neg"
        )
    rng = np.random.default_rng(seed)
    fold_of = {}
    for group in (pos, neg):
        idx = rng.permutation(len(group))
        for i, j in enumerate(idx):
            fold_of[group[j]] = i % k
    return fold_of


def cross_validate(x, y, patient_ids: list[str], cfg: TrainConfig, k: int = 5,
                   seed: int = 0) -> dict:
    """Patient-grouped stratified k-fold CV; returns per-fold log-loss/AUROC."""
    from .metrics import auroc

    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    pid = np.asarray(patient_ids)
    patient_pos = {p: bool(y[pid == p].max() == 1) for p in set(patient_ids)}
    fold_of = stratified_patient_folds(patient_ids, patient_pos, k, seed)
    row_fold = np.array([fold_of[p] for p in patient_ids])

    losses, aucs = [], []
    for f in range(k):
        tr = row_fold != f
        te = ~tr
        ens = train(x[tr], y[tr], cfg)
        p = predict_proba(ens, x[te])
        losses.append(log_loss(y[te], p))
        aucs.append(auroc(p, y[te]) if len(np.unique(y[te])) == 2 else np.nan)
    losses = np.asarray(losses)
    return {
        "fold_log_loss": losses.tolist(),
        "fold_auroc": aucs,
        "mean_log_loss": float(losses.mean()),
        "sd_log_loss": float(losses.std()),
        "fold_of": fold_of,
    }


# ---------------------------------------------------------------------------
# hyperparameter search

DEFAULT_SEARCH_SPACE = {
    "max_depth": (3, 8),
    "learning_rate": (0.01, 0.3),  # log-uniform
    "num_rounds": (50, 500),
    "min_child_weight": (1.0, 10.0),
    "l2_lambda": (0.1, 10.0),  # log-uniform
    "gamma": (0.0, 5.0),
    "subsample": (0.5, 1.0),
    "colsample": (0.5, 1.0),
}


def _sample_config(rng: np.random.Generator, space: dict, seed: int) -> TrainConfig:
    def lo_hi(key):
        return space.get(key, DEFAULT_SEARCH_SPACE[key])

    d = {}
    d["max_depth"] = int(rng.integers(lo_hi("max_depth")[0], lo_hi("max_depth")[1] + 1))
    lo, hi = lo_hi("learning_rate")
    d["learning_rate"] = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    d["num_rounds"] = int(rng.integers(lo_hi("num_rounds")[0], lo_hi("num_rounds")[1] + 1))
    lo, hi = lo_hi("min_child_weight")
    d["min_child_weight"] = float(rng.uniform(lo, hi))
    lo, hi = lo_hi("l2_lambda")
    d["l2_lambda"] = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    lo, hi = lo_hi("gamma")
    d["gamma"] = float(rng.uniform(lo, hi))
    lo, hi = lo_hi("subsample")
    d["subsample"] = float(rng.uniform(lo, hi))
    lo, hi = lo_hi("colsample")
    d["colsample"] = float(rng.uniform(lo, hi))
    return TrainConfig(seed=seed, **d)


@dataclass
class TuneResult:
    best: TrainConfig
    trials: list  # (TrainConfig, mean CV log-loss)


def tune(x, y, patient_ids: list[str], space: dict | None = None,
         trials: int = 20, seed: int = 0, k: int = 5) -> TuneResult:
    """Seeded random search minimizing mean CV log-loss."""
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    space = space or DEFAULT_SEARCH_SPACE
    history = []
    best_cfg, best_loss = None, np.inf
    for t in range(trials):
        cfg = _sample_config(rng, space, seed)
        res = cross_validate(x, y, patient_ids, cfg, k=k, seed=seed)
        history.append((cfg, res["mean_log_loss"]))
        if res["mean_log_loss"] < best_loss:
            best_loss = res["mean_log_loss"]
            best_cfg = cfg
        log.info("tune trial %d/%d: log-loss %.5f", t + 1, trials,
                 res["mean_log_loss"])
    return TuneResult(best=best_cfg, trials=history)


# ---------------------------------------------------------------------------
# model bundle

SCHEMA_VERSION = 1

_REQUIRED_KEYS = ("schema_version", "base_margin", "trees", "feature_names",
                  "feature_names_sha", "stats", "feature_spec", "thresholds")


def _names_sha(names: list[str]) -> str:
    return hashlib.sha256("\n".join(names).encode()).hexdigest()


def ensemble_to_dict(ens: TreeEnsemble) -> dict:
    return {
        "base_margin": ens.base_margin,
        "trees": [t.to_lists() for t in ens.trees],
        "feature_names": list(ens.feature_names),
        "feature_names_sha": _names_sha(ens.feature_names),
        "training_log_loss": list(ens.training_log_loss),
    }


def save_model(ens: TreeEnsemble, bundle: dict, path) -> None:
    """Serialize the ensemble plus pipeline context into one JSON bundle.

    ``bundle`` must provide 'stats', 'feature_spec' and 'thresholds' (the
    preprocessing statistics, extraction settings and detection operating
    points needed to reproduce inference end to end). Output bytes are
    deterministic.
    """
    for key in ("stats", "feature_spec", "thresholds"):
        if key not in bundle:
            raise ModelSchemaError(f"bundle is missing {key!r}")
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(ensemble_to_dict(ens))
    doc.update(bundle)
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True))


def load_model(path) -> tuple[TreeEnsemble, dict]:
    """Load and validate a model bundle -> (ensemble, full bundle dict)."""
    with open(path) as f:
        doc = json.load(f)
    for key in _REQUIRED_KEYS:
        if key not in doc:
            raise ModelSchemaError(f"{path}: bundle is missing {key!r}")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ModelSchemaError(
            f"{path}: schema version {doc['schema_version']} != {SCHEMA_VERSION}"
        )
    names = [str(s) for s in doc["feature_names"]]
    if _names_sha(names) != doc["feature_names_sha"]:
        raise ModelSchemaError(f"{path}: feature name list fails its checksum")
    trees = [Tree.from_lists(t) for t in doc["trees"]]
    for t in trees:
        used = t.feature[t.feature >= 0]
        if used.size and used.max() >= len(names):
            raise ModelSchemaError(f"{path}: tree references unknown feature index")
    ens = TreeEnsemble(
        trees=trees,
        base_margin=float(doc["base_margin"]),
        feature_names=names,
        training_log_loss=[float(v) for v in doc.get("training_log_loss", [])],
    )
    return ens, doc
