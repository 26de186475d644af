"""Anatomical feature maps derived from the gland segmentation."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..errors import EmptyMaskError
from ..volume import Mask3D, Volume3D, distance_to_boundary, mask_bbox

__all__ = ["anatomical_maps"]


def anatomical_maps(prostate: Mask3D, pz_mask: Mask3D,
                    pz_likelihood: Volume3D | None = None
                    ) -> tuple[Volume3D, Volume3D, Volume3D, Volume3D, Volume3D]:
    """Build the five anatomical maps (rdb, xpos, ypos, zpos, pzl).

    * rdb: boundary distance normalized by the deepest in-mask distance.
    * xpos/ypos/zpos: voxel position relative to the prostate bounding box
      (0 when the box is a single voxel thick along that axis).
    * pzl: the supplied peripheral-zone likelihood, or the binary PZ mask
      smoothed with a 3 mm Gaussian, clamped to [0, 1].
    """
    if prostate.is_empty():
        raise EmptyMaskError("anatomical_maps requires a non-empty prostate mask")

    dist = distance_to_boundary(prostate)
    dmax = float(dist.values.max())
    rdb = dist.with_values(dist.values / dmax)

    lo, hi = mask_bbox(prostate)
    nx, ny, nz = prostate.dims
    pos = []
    for axis, (n, l, h) in enumerate(zip((nx, ny, nz), lo, hi)):
        idx = np.arange(n, dtype=np.float64)
        rel = (idx - l) / (h - l) if h > l else np.zeros(n)
        rel = np.clip(rel, 0.0, 1.0)
        shape = [1, 1, 1]
        shape[axis] = n
        pos.append(Volume3D(
            np.broadcast_to(rel.reshape(shape), (nx, ny, nz)).copy(),
            prostate.spacing, prostate.origin,
        ))

    if pz_likelihood is not None:
        pzl = pz_likelihood.with_values(np.clip(pz_likelihood.values, 0.0, 1.0))
    else:
        sigma = [3.0 / s for s in pz_mask.spacing]
        smooth = ndimage.gaussian_filter(pz_mask.values.astype(np.float64), sigma)
        pzl = Volume3D(np.clip(smooth, 0.0, 1.0), pz_mask.spacing, pz_mask.origin)

    return rdb, pos[0], pos[1], pos[2], pzl
