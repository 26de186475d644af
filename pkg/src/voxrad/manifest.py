"""Dataset manifests and case loading.

A manifest is a JSON document listing one entry per case: file paths for the
T2W volume, diffusion series (or precomputed ADC/HBV maps), gland and zone
masks, optional PZ likelihood, ground-truth labels with per-lesion grade
groups, optional PI-RADS scores, and a train/test split tag. The published
schema lives in docs/schemas/manifest.schema.json.

``load_case`` reads every referenced volume and harmonizes all of them onto
the T2W grid (nearest-neighbor for masks and labels), then enforces the
record invariants; a case either loads completely valid or raises.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FrameMismatchError, LabelMismatchError, ManifestError
from .nifti import read_nifti
from .volume import Mask3D, Volume3D, resample_to_grid

__all__ = [
    "LesionInfo",
    "ManifestEntry",
    "DatasetManifest",
    "CaseRecord",
    "load_manifest",
    "load_case",
]

MANIFEST_VERSION = 1
FRAME_TOL_MM = 1e-3


@dataclass(frozen=True)
class LesionInfo:
    label: int
    grade_group: int
    pirads: int | None = None

    def __post_init__(self):
        if self.label < 1:
            raise ManifestError(f"lesion label must be >= 1, got {self.label}")
        if not 1 <= self.grade_group <= 5:
            raise ManifestError(f"grade group must be 1..5, got {self.grade_group}")
        if self.pirads is not None and not 1 <= self.pirads <= 5:
            raise ManifestError(f"PI-RADS must be 1..5, got {self.pirads}")


@dataclass(frozen=True)
class ManifestEntry:
    case_id: str
    t2w: str
    masks: dict  # {'prostate': path, 'pz': path, 'tz': path}
    split: str
    dwi: list = field(default_factory=list)  # [(b, path)]
    adc: str | None = None
    hbv: str | None = None
    pz_likelihood: str | None = None
    ref_masks: dict | None = None  # {'low': path, 'high': path}
    gt_labels: str | None = None
    gt_lesions: list = field(default_factory=list)  # [LesionInfo]
    pirads_patient: int | None = None


@dataclass
class DatasetManifest:
    path: Path
    entries: list[ManifestEntry]

    def split(self, tag: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == tag]

    @property
    def base_dir(self) -> Path:
        return self.path.parent


def _require(d: dict, key: str, ctx: str):
    if key not in d:
        raise ManifestError(f"{ctx}: missing required field {key!r}")
    return d[key]


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ManifestError(f"{path}: cannot parse manifest: {e}") from e
    if doc.get("version") != MANIFEST_VERSION:
        raise ManifestError(f"{path}: manifest version must be {MANIFEST_VERSION}")
    entries = []
    seen_ids = set()
    for raw in _require(doc, "cases", str(path)):
        cid = _require(raw, "case_id", str(path))
        if cid in seen_ids:
            raise ManifestError(f"{path}: duplicate case_id {cid!r}")
        seen_ids.add(cid)
        ctx = f"{path}:{cid}"
        split = _require(raw, "split", ctx)
        if split not in ("train", "test"):
            raise ManifestError(f"{ctx}: split must be train|test, got {split!r}")
        masks = _require(raw, "masks", ctx)
        for m in ("prostate", "pz", "tz"):
            _require(masks, m, ctx)
        dwi = [(float(d["b"]), d["path"]) for d in raw.get("dwi", [])]
        if not dwi and not (raw.get("adc") and raw.get("hbv")):
            raise ManifestError(
                f"{ctx}: needs a dwi series or precomputed adc+hbv paths"
            )
        gt = raw.get("gt")
        gt_labels = None
        gt_lesions = []
        if gt is not None:
            gt_labels = _require(gt, "labels", ctx)
            gt_lesions = [
                LesionInfo(int(l["label"]), int(l["gg"]),
                           int(l["pirads"]) if l.get("pirads") is not None else None)
                for l in _require(gt, "lesions", ctx)
            ]
            if len({l.label for l in gt_lesions}) != len(gt_lesions):
                raise ManifestError(f"{ctx}: duplicate lesion labels")
        paths = [raw["t2w"], *masks.values(), *(p for _, p in dwi)]
        paths += [p for p in (raw.get("adc"), raw.get("hbv"), gt_labels,
                              raw.get("pz_likelihood")) if p]
        if len(paths) != len(set(paths)):
            raise ManifestError(f"{ctx}: duplicate file paths within the case")
        pirads_patient = raw.get("pirads_patient")
        if pirads_patient is not None and not 1 <= int(pirads_patient) <= 5:
            raise ManifestError(f"{ctx}: pirads_patient must be 1..5")
        entries.append(ManifestEntry(
            case_id=cid,
            t2w=raw["t2w"],
            masks=dict(masks),
            split=split,
            dwi=dwi,
            adc=raw.get("adc"),
            hbv=raw.get("hbv"),
            pz_likelihood=raw.get("pz_likelihood"),
            ref_masks=raw.get("ref_masks"),
            gt_labels=gt_labels,
            gt_lesions=gt_lesions,
            pirads_patient=int(pirads_patient) if pirads_patient is not None else None,
        ))
    return DatasetManifest(path=path, entries=entries)


@dataclass
class CaseRecord:
    """One fully loaded, grid-harmonized patient."""

    case_id: str
    t2w: Volume3D
    prostate_mask: Mask3D
    pz_mask: Mask3D
    tz_mask: Mask3D
    dwi_series: list  # [(b, Volume3D)] on the T2W grid
    adc: Volume3D | None = None
    hbv: Volume3D | None = None
    pz_likelihood: Volume3D | None = None
    ref_low_mask: Mask3D | None = None
    ref_high_mask: Mask3D | None = None
    gt_labels: np.ndarray | None = None  # uint16, T2W dims
    gt_lesions: list = field(default_factory=list)  # [LesionInfo]
    pirads_patient: int | None = None

    def has_cspca(self) -> bool:
        return any(l.grade_group >= 2 for l in self.gt_lesions)


def _frames_compatible(src: Volume3D, ref: Volume3D) -> bool:
    """Sanity check that two co-registered volumes cover overlapping space."""
    for ax in range(3):
        s0 = src.origin[ax]
        s1 = s0 + (src.dims[ax] - 1) * src.spacing[ax]
        r0 = ref.origin[ax]
        r1 = r0 + (ref.dims[ax] - 1) * ref.spacing[ax]
        lo, hi = max(s0, r0), min(s1, r1)
        if hi - lo < 0.5 * (r1 - r0) - FRAME_TOL_MM:
            return False
    return True


def _onto_grid(vol, ref: Volume3D, mode: str, what: str, cid: str):
    if vol.same_grid(ref, tol=FRAME_TOL_MM):
        return vol
    if not _frames_compatible(vol if isinstance(vol, Volume3D) else vol.as_volume(),
                              ref):
        raise FrameMismatchError(
            f"{cid}: {what} frame barely overlaps the T2W frame; "
            "inputs must be co-registered"
        )
    return resample_to_grid(vol, ref, mode)


def load_case(entry: ManifestEntry, base_dir) -> CaseRecord:
    """Read all volumes of a case and harmonize them onto the T2W grid."""
    base = Path(base_dir)

    def p(rel):
        return base / rel

    t2w = read_nifti(p(entry.t2w))

    def mask_of(rel, what):
        vol = read_nifti(p(rel))
        vals = vol.values
        uniq = np.unique(vals)
        if not np.all(np.isin(uniq, (0.0, 1.0))):
            raise ManifestError(
                f"{entry.case_id}: {what} mask is not binary (values {uniq[:5]})"
            )
        m = Mask3D(vals.astype(np.uint8), vol.spacing, vol.origin)
        return _onto_grid(m, t2w, "nearest", what, entry.case_id)

    prostate = mask_of(entry.masks["prostate"], "prostate")
    pz = mask_of(entry.masks["pz"], "pz")
    tz = mask_of(entry.masks["tz"], "tz")

    dwi = [(b, _onto_grid(read_nifti(p(path)), t2w, "linear", f"dwi b={b}",
                          entry.case_id))
           for b, path in entry.dwi]
    adc = (_onto_grid(read_nifti(p(entry.adc)), t2w, "linear", "adc", entry.case_id)
           if entry.adc else None)
    hbv = (_onto_grid(read_nifti(p(entry.hbv)), t2w, "linear", "hbv", entry.case_id)
           if entry.hbv else None)
    pzl = (_onto_grid(read_nifti(p(entry.pz_likelihood)), t2w, "linear",
                      "pz_likelihood", entry.case_id)
           if entry.pz_likelihood else None)

    ref_low = ref_high = None
    if entry.ref_masks:
        ref_low = mask_of(entry.ref_masks["low"], "ref_low")
        ref_high = mask_of(entry.ref_masks["high"], "ref_high")

    gt_labels = None
    if entry.gt_labels:
        lv = read_nifti(p(entry.gt_labels))
        lv = _onto_grid(lv, t2w, "nearest", "gt_labels", entry.case_id)
        gt_labels = np.asfortranarray(np.rint(lv.values).astype(np.uint16))
        present = {int(v) for v in np.unique(gt_labels) if v != 0}
        declared = {l.label for l in entry.gt_lesions}
        if present != declared:
            raise LabelMismatchError(
                f"{entry.case_id}: labels in volume {sorted(present)} != "
                f"declared lesions {sorted(declared)}"
            )

    return CaseRecord(
        case_id=entry.case_id,
        t2w=t2w,
        prostate_mask=prostate,
        pz_mask=pz,
        tz_mask=tz,
        dwi_series=dwi,
        adc=adc,
        hbv=hbv,
        pz_likelihood=pzl,
        ref_low_mask=ref_low,
        ref_high_mask=ref_high,
        gt_labels=gt_labels,
        gt_lesions=list(entry.gt_lesions),
        pirads_patient=entry.pirads_patient,
    )
