"""Tumor probability maps -> scored lesion detection maps.

The post-processing chain: binarize the probability map at a Youden-optimal
voxel threshold, label 3D connected components (26-connectivity by default),
keep the three largest as candidate lesions, and score each by its local
peak: the highest mean probability inside a 10 mm diameter sphere centered
on any lesion voxel. The patient score is the best lesion score.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import EmptyMaskError, InvalidArgumentError, SingleClassError
from .nifti import write_nifti
from .volume import Volume3D

__all__ = [
    "OperatingThresholds",
    "Lesion",
    "DetectionMap",
    "youden_threshold",
    "connected_components_3d",
    "peak_score",
    "build_detection_map",
    "patient_score",
    "write_detection",
    "read_detection_sidecar",
]

DEFAULT_LESION_DECISION_T = 0.76
PEAK_RADIUS_MM = 5.0  # 10 mm diameter sphere


@dataclass(frozen=True)
class OperatingThresholds:
    voxel_youden_t: float
    lesion_decision_t: float = DEFAULT_LESION_DECISION_T

    def __post_init__(self):
        for name in ("voxel_youden_t", "lesion_decision_t"):
            v = getattr(self, name)
            if not (0 < v < 1):
                raise InvalidArgumentError(f"{name} must be in (0, 1), got {v}")

    def to_dict(self) -> dict:
        return {"voxel_youden_t": self.voxel_youden_t,
                "lesion_decision_t": self.lesion_decision_t}

    @classmethod
    def from_dict(cls, d: dict) -> "OperatingThresholds":
        return cls(voxel_youden_t=float(d["voxel_youden_t"]),
                   lesion_decision_t=float(d["lesion_decision_t"]))


@dataclass(frozen=True)
class Lesion:
    id: int
    voxel_count: int
    score: float
    peak_index: int  # canonical x-fastest linear index


@dataclass
class DetectionMap:
    """Labeled candidate lesions (ids 1..K, K <= 3, largest first)."""

    labels: np.ndarray  # uint16, case dims
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]
    lesions: list[Lesion] = field(default_factory=list)
    thresholds: OperatingThresholds | None = None


def youden_threshold(scores, labels) -> float:
    """Threshold (from the unique score values) maximizing sens + spec - 1
    for the decision rule ``score >= t``; ties resolve to the smallest t."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    npos = int((labels == 1).sum())
    nneg = int((labels == 0).sum())
    if npos == 0 or nneg == 0:
        raise SingleClassError("youden_threshold needs both classes")

    order = np.argsort(scores, kind="stable")
    s = scores[order]
    is_pos = (labels[order] == 1).astype(np.int64)
    first = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])  # unique value starts
    pos_before = np.r_[0, np.cumsum(is_pos)][first]
    neg_before = first - pos_before
    sens = (npos - pos_before) / npos
    spec = neg_before / nneg
    j = sens + spec - 1.0
    return float(s[first[np.argmax(j)]])


def connected_components_3d(binary, connectivity: int = 26,
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Label components of a binary array.

    Returns (labels, sizes) with labels 1..K numbered by first-encountered
    voxel in canonical x-fastest scan order; sizes[k-1] is component k's
    voxel count.
    """
    if connectivity not in (6, 26):
        raise InvalidArgumentError("connectivity must be 6 or 26")
    arr = np.asarray(binary)
    structure = (np.ones((3, 3, 3), dtype=bool) if connectivity == 26
                 else ndimage.generate_binary_structure(3, 1))
    raw, k = ndimage.label(arr, structure=structure)
    if k == 0:
        return np.zeros(arr.shape, dtype=np.uint16), np.zeros(0, dtype=np.int64)

    flat = raw.ravel(order="F")
    nz = np.flatnonzero(flat)
    first = np.full(k + 1, flat.size, dtype=np.int64)
    np.minimum.at(first, flat[nz], nz)
    remap = np.zeros(k + 1, dtype=np.uint16)
    remap[np.argsort(first[1:], kind="stable") + 1] = np.arange(1, k + 1)
    labels = remap[raw]
    sizes = np.bincount(labels.ravel(), minlength=k + 1)[1:].astype(np.int64)
    return labels, sizes


def _sphere_offsets(spacing, radius_mm=PEAK_RADIUS_MM) -> np.ndarray:
    sx, sy, sz = spacing
    rx = int(np.floor(radius_mm / sx))
    ry = int(np.floor(radius_mm / sy))
    rz = int(np.floor(radius_mm / sz))
    out = []
    r2 = radius_mm * radius_mm
    for dx in range(-rx, rx + 1):
        for dy in range(-ry, ry + 1):
            for dz in range(-rz, rz + 1):
                if (dx * sx) ** 2 + (dy * sy) ** 2 + (dz * sz) ** 2 <= r2:
                    out.append((dx, dy, dz))
    return np.asarray(out, dtype=np.int64)


def peak_score(tpmap: Volume3D, lesion_mask,
               ) -> tuple[float, int]:
    """Local peak of a lesion: per lesion voxel, the mean probability over
    voxel centers within 5 mm (sphere clipped at image bounds, not
    restricted to the lesion); the score is the best such mean.

    Returns (score, linear index of the peak voxel; ties -> lowest index).
    """
    mask = np.asarray(lesion_mask).astype(bool)
    if mask.shape != tpmap.dims:
        raise InvalidArgumentError("lesion mask dims differ from tpmap")
    if not mask.any():
        raise EmptyMaskError("peak_score requires a non-empty lesion")

    nx, ny, nz = tpmap.dims
    lin = np.flatnonzero(mask.ravel(order="F"))
    coords = np.stack([lin % nx, (lin // nx) % ny, lin // (nx * ny)], axis=1)
    offs = _sphere_offsets(tpmap.spacing)
    vals = tpmap.values

    best_mean = -np.inf
    best_lin = -1
    chunk = max(1, int(2e6) // len(offs))
    for s in range(0, len(coords), chunk):
        c = coords[s:s + chunk]
        pts = c[:, None, :] + offs[None, :, :]
        ok = ((pts >= 0).all(axis=2)
              & (pts[:, :, 0] < nx) & (pts[:, :, 1] < ny) & (pts[:, :, 2] < nz))
        px = np.clip(pts[:, :, 0], 0, nx - 1)
        py = np.clip(pts[:, :, 1], 0, ny - 1)
        pz = np.clip(pts[:, :, 2], 0, nz - 1)
        v = vals[px, py, pz]
        sums = np.where(ok, v, 0.0).sum(axis=1)
        counts = ok.sum(axis=1)
        means = sums / counts
        k = int(np.argmax(means))  # first max -> lowest linear index
        if means[k] > best_mean:
            best_mean = float(means[k])
            best_lin = int(lin[s + k])
    return best_mean, best_lin


def build_detection_map(tpmap: Volume3D, thresholds: OperatingThresholds,
                        connectivity: int = 26, max_lesions: int = 3
                        ) -> DetectionMap:
    """Binarize at the Youden threshold, keep the ``max_lesions`` largest
    components (ties by higher peak score, then lower component label) and
    score each by its local peak."""
    binary = tpmap.values >= thresholds.voxel_youden_t
    labels, sizes = connected_components_3d(binary, connectivity)
    k = len(sizes)
    out = DetectionMap(
        labels=np.zeros(tpmap.dims, dtype=np.uint16),
        spacing=tpmap.spacing,
        origin=tpmap.origin,
        lesions=[],
        thresholds=thresholds,
    )
    if k == 0:
        return out

    by_size = sorted(range(1, k + 1), key=lambda c: (-sizes[c - 1], c))
    if k > max_lesions:
        cut = sizes[by_size[max_lesions - 1] - 1]
        auto = [c for c in by_size if sizes[c - 1] > cut]
        tied = [c for c in by_size if sizes[c - 1] == cut]
        need_peaks = set(auto) | set(tied)
    else:
        auto, tied = by_size, []
        need_peaks = set(auto)

    peaks = {c: peak_score(tpmap, labels == c) for c in need_peaks}
    if k > max_lesions:
        tied.sort(key=lambda c: (-peaks[c][0], c))
        kept = auto + tied[: max_lesions - len(auto)]
    else:
        kept = auto

    kept.sort(key=lambda c: (-sizes[c - 1], -peaks[c][0], c))
    for new_id, c in enumerate(kept, start=1):
        score, peak_lin = peaks[c]
        out.labels[labels == c] = new_id
        out.lesions.append(Lesion(
            id=new_id,
            voxel_count=int(sizes[c - 1]),
            score=score,
            peak_index=peak_lin,
        ))
    return out


def patient_score(dm: DetectionMap) -> float:
    """Best lesion score; 0 without lesions."""
    return max((l.score for l in dm.lesions), default=0.0)


# ---------------------------------------------------------------------------
# persistence: u16 label NIfTI + JSON sidecar

def write_detection(dm: DetectionMap, nifti_path, sidecar_path,
                    config_hash: str = "") -> None:
    vol = Volume3D(dm.labels.astype(np.float64), dm.spacing, dm.origin)
    write_nifti(vol, nifti_path, dtype="u16",
                descrip=f"cfg={config_hash}" if config_hash else "")
    doc = {
        "lesions": [
            {"id": l.id, "size_voxels": l.voxel_count, "score": l.score,
             "peak_index": l.peak_index}
            for l in dm.lesions
        ],
        "patient_score": patient_score(dm),
        "thresholds": dm.thresholds.to_dict() if dm.thresholds else None,
        "config_hash": config_hash,
    }
    Path(sidecar_path).parent.mkdir(parents=True, exist_ok=True)
    Path(sidecar_path).write_text(json.dumps(doc, indent=1, sort_keys=True))


def read_detection_sidecar(path) -> dict:
    with open(path) as f:
        return json.load(f)
