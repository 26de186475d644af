"""Whole-case feature extraction: one 137-wide row per in-prostate voxel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from ..volume import Mask3D, Volume3D
from . import engine
from .anatomical import anatomical_maps
from .spec import FeatureMatrix, FeatureSpec

__all__ = ["PreprocessedCase", "extract_case", "mask_voxel_coords"]


@dataclass
class PreprocessedCase:
    """Input contract of the extractor: normalized channels on one grid.

    ``gt_labels`` is an integer lesion-id volume (0 background) and
    ``gt_lesions`` maps each id to its grade group; both may be None for
    unlabeled (prediction-only) cases.
    """

    case_id: str
    t2w: Volume3D
    adc: Volume3D
    hbv: Volume3D
    prostate_mask: Mask3D
    pz_mask: Mask3D
    pz_likelihood: Volume3D | None = None
    gt_labels: np.ndarray | None = None  # int array, case dims
    gt_lesions: list[tuple[int, int]] | None = None  # (label_id, grade_group)

    def __post_init__(self):
        grid = self.t2w.grid()
        for name in ("adc", "hbv"):
            if getattr(self, name).grid() != grid:
                raise InvalidArgumentError(f"{name} is not on the T2W grid")
        for name in ("prostate_mask", "pz_mask"):
            if getattr(self, name).grid() != grid:
                raise InvalidArgumentError(f"{name} is not on the T2W grid")
        if self.pz_likelihood is not None and self.pz_likelihood.grid() != grid:
            raise InvalidArgumentError("pz_likelihood is not on the T2W grid")
        if self.gt_labels is not None and tuple(self.gt_labels.shape) != self.t2w.dims:
            raise InvalidArgumentError("gt_labels dims differ from case grid")


def mask_voxel_coords(mask: Mask3D) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(x, y, z, linear) coordinates of set voxels in canonical x-fastest order."""
    nx, ny, _ = mask.dims
    lin = np.flatnonzero(mask.ravel()).astype(np.int64)
    x = lin % nx
    y = (lin // nx) % ny
    z = lin // (nx * ny)
    return x, y, z, lin


def voxel_labels(lin: np.ndarray, gt_labels: np.ndarray | None,
                 gt_lesions: list[tuple[int, int]] | None) -> np.ndarray:
    """csPCa row labels: grade group >= 2 -> 1, else 0; -1 without ground truth."""
    if gt_labels is None:
        return np.full(lin.shape, -1, dtype=np.int8)
    gg = {int(lid): int(g) for lid, g in (gt_lesions or [])}
    flat = np.asarray(gt_labels).ravel(order="F")[lin]
    out = np.zeros(lin.shape, dtype=np.int8)
    for lid, g in gg.items():
        if g >= 2:
            out[flat == lid] = 1
    return out


def extract_case(pre: PreprocessedCase, spec: FeatureSpec) -> FeatureMatrix:
    """Extract the 137-feature matrix over the prostate mask.

    Deterministic: rows follow the canonical linear-index order and the
    result is identical regardless of thread count.
    """
    if pre.prostate_mask.is_empty():
        raise InvalidArgumentError("prostate mask is empty")
    rdb, xpos, ypos, zpos, pzl = anatomical_maps(
        pre.prostate_mask, pre.pz_mask, pre.pz_likelihood
    )
    xs, ys, zs, lin = mask_voxel_coords(pre.prostate_mask)
    out = np.empty((len(lin), len(spec.names)), dtype=np.float64)
    engine.extract_batch(
        pre.t2w.values, pre.adc.values, pre.hbv.values,
        rdb.values, xpos.values, ypos.values, zpos.values, pzl.values,
        xs, ys, zs,
        spec.kernel_radius,
        spec.channel_bin_width("t2w"),
        spec.channel_bin_width("adc"),
        spec.channel_bin_width("hbv"),
        pre.t2w.voxel_volume_mm3(),
        out,
    )
    labels = voxel_labels(lin, pre.gt_labels, pre.gt_lesions)
    return FeatureMatrix(
        case_id=pre.case_id, values=out, voxel_index=lin, labels=labels
    )
