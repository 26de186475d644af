"""Axis-aligned 3D volumes and the grid operations shared by the whole pipeline.

Conventions
-----------
* A volume lives on a regular axis-aligned grid: world position of voxel
  ``(x, y, z)`` is ``origin + (x*sx, y*sy, z*sz)`` (voxel centers).
* ``values`` has shape ``(nx, ny, nz)`` and is stored Fortran-ordered, so the
  canonical *linear voxel index* ``x + nx*(y + ny*z)`` (x fastest) is also the
  memory order. All "linear index" fields in this package use that order.
* Volumes are immutable after construction; every operation returns a new one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import EmptyMaskError, InvalidArgumentError

__all__ = [
    "Volume3D",
    "Mask3D",
    "resample_inplane",
    "resample_to_grid",
    "distance_to_boundary",
    "mask_bbox",
]


def _as_grid_tuple(v, name: str) -> tuple[float, float, float]:
    t = tuple(float(x) for x in v)
    if len(t) != 3:
        raise InvalidArgumentError(f"{name} must have 3 components, got {len(t)}")
    return t


@dataclass(frozen=True)
class Volume3D:
    """A scalar field on a regular grid.

    Parameters
    ----------
    values : array, shape (nx, ny, nz)
        Voxel values; converted to float64 and made read-only.
    spacing : (sx, sy, sz)
        Voxel size in mm, all > 0.
    origin : (ox, oy, oz)
        World position in mm of voxel (0, 0, 0).
    """

    values: np.ndarray
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        vals = np.asfortranarray(self.values, dtype=np.float64)
        if vals.ndim != 3:
            raise InvalidArgumentError(f"values must be 3D, got ndim={vals.ndim}")
        if min(vals.shape) < 1:
            raise InvalidArgumentError("all dims must be >= 1")
        if not np.all(np.isfinite(vals)):
            raise InvalidArgumentError("values contain NaN or Inf")
        spacing = _as_grid_tuple(self.spacing, "spacing")
        if min(spacing) <= 0:
            raise InvalidArgumentError(f"spacing must be positive, got {spacing}")
        origin = _as_grid_tuple(self.origin, "origin")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape

    @property
    def num_voxels(self) -> int:
        return int(self.values.size)

    def grid(self) -> tuple:
        """Hashable grid signature (dims, spacing, origin)."""
        return (self.dims, self.spacing, self.origin)

    def same_grid(self, other: "Volume3D | Mask3D", tol: float = 0.0) -> bool:
        if self.dims != other.dims:
            return False
        ds = max(abs(a - b) for a, b in zip(self.spacing, other.spacing))
        do = max(abs(a - b) for a, b in zip(self.origin, other.origin))
        return ds <= tol and do <= tol

    def with_values(self, values: np.ndarray) -> "Volume3D":
        return Volume3D(values, self.spacing, self.origin)

    def ravel(self) -> np.ndarray:
        """Values flattened in canonical (x-fastest) order."""
        return self.values.ravel(order="F")

    def voxel_volume_mm3(self) -> float:
        sx, sy, sz = self.spacing
        return sx * sy * sz


@dataclass(frozen=True)
class Mask3D:
    """A binary field on a regular grid; values are uint8 in {0, 1}."""

    values: np.ndarray
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        vals = np.asfortranarray(self.values)
        if vals.ndim != 3:
            raise InvalidArgumentError(f"mask must be 3D, got ndim={vals.ndim}")
        if vals.dtype != np.uint8:
            uniq = np.unique(vals)
            if not np.all(np.isin(uniq, (0, 1))):
                raise InvalidArgumentError(f"mask values must be 0/1, got {uniq[:8]}")
            vals = np.asfortranarray(vals.astype(np.uint8))
        elif vals.max(initial=0) > 1:
            raise InvalidArgumentError("mask values must be 0/1")
        spacing = _as_grid_tuple(self.spacing, "spacing")
        if min(spacing) <= 0:
            raise InvalidArgumentError(f"spacing must be positive, got {spacing}")
        origin = _as_grid_tuple(self.origin, "origin")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    dims = Volume3D.dims
    grid = Volume3D.grid
    same_grid = Volume3D.same_grid

    @property
    def num_set(self) -> int:
        return int(np.count_nonzero(self.values))

    def is_empty(self) -> bool:
        return self.num_set == 0

    def as_volume(self) -> Volume3D:
        return Volume3D(self.values.astype(np.float64), self.spacing, self.origin)

    def ravel(self) -> np.ndarray:
        return self.values.ravel(order="F")


# ---------------------------------------------------------------------------
# interpolation helpers

def _axis_sample(u: np.ndarray, n_src: int, mode: str):
    """Clamp-to-edge sampling coordinates along one axis.

    Returns (i0, i1, frac) for linear mode or (idx, None, None) for nearest.
    ``u`` is in source voxel units.
    """
    if mode == "nearest":
        idx = np.floor(u + 0.5).astype(np.intp)  # ties round up
        np.clip(idx, 0, n_src - 1, out=idx)
        return idx, None, None
    u = np.clip(u, 0.0, float(n_src - 1))
    i0 = np.floor(u).astype(np.intp)
    np.clip(i0, 0, max(n_src - 2, 0), out=i0)
    frac = u - i0
    i1 = np.minimum(i0 + 1, n_src - 1)
    return i0, i1, frac


def _interp_axis(arr: np.ndarray, axis: int, u: np.ndarray, mode: str) -> np.ndarray:
    """Resample ``arr`` along ``axis`` at fractional coordinates ``u``."""
    n = arr.shape[axis]
    i0, i1, f = _axis_sample(u, n, mode)
    if mode == "nearest":
        return np.take(arr, i0, axis=axis)
    a = np.take(arr, i0, axis=axis)
    b = np.take(arr, i1, axis=axis)
    shape = [1, 1, 1]
    shape[axis] = len(u)
    f = f.reshape(shape)
    return a + f * (b - a)  # exact at f=0 and for constant fields


def _check_mode(mode: str) -> str:
    if mode not in ("linear", "nearest"):
        raise InvalidArgumentError(f"mode must be 'linear' or 'nearest', got {mode!r}")
    return mode


def resample_inplane(vol: Volume3D | Mask3D, target: tuple[float, float],
                     mode: str = "linear") -> Volume3D | Mask3D:
    """Resample the in-plane (x, y) grid to a new spacing; z is untouched.

    Output keeps the input origin; output dims are chosen so the physical
    extent is preserved within one voxel. Linear mode interpolates bilinearly
    per slice with clamp-to-edge; nearest keeps masks binary.
    """
    _check_mode(mode)
    tx, ty = float(target[0]), float(target[1])
    if tx <= 0 or ty <= 0:
        raise InvalidArgumentError(f"target spacing must be positive, got {target}")
    is_mask = isinstance(vol, Mask3D)
    if is_mask and mode != "nearest":
        raise InvalidArgumentError("masks must be resampled with mode='nearest'")
    sx, sy, sz = vol.spacing
    nx, ny, nz = vol.dims
    if tx == sx and ty == sy:
        return vol  # identity, bitwise

    nx_out = max(1, int(np.floor(nx * sx / tx + 0.5)))
    ny_out = max(1, int(np.floor(ny * sy / ty + 0.5)))
    ux = np.arange(nx_out) * (tx / sx)
    uy = np.arange(ny_out) * (ty / sy)

    src = vol.values if not is_mask else vol.values.astype(np.float64)
    out = _interp_axis(src, 0, ux, mode)
    out = _interp_axis(out, 1, uy, mode)
    spacing = (tx, ty, sz)
    if is_mask:
        return Mask3D(out.astype(np.uint8), spacing, vol.origin)
    return Volume3D(out, spacing, vol.origin)


def resample_to_grid(src: Volume3D | Mask3D, ref: Volume3D | Mask3D,
                     mode: str = "linear") -> Volume3D | Mask3D:
    """Sample ``src`` at the voxel centers of ``ref``'s grid (shared world frame).

    Trilinear (or nearest) with clamp-to-edge; output carries ref's grid
    metadata. If the grids are identical the input values are returned as-is.
    """
    _check_mode(mode)
    is_mask = isinstance(src, Mask3D)
    if is_mask and mode != "nearest":
        raise InvalidArgumentError("masks must be resampled with mode='nearest'")
    if src.grid() == ref.grid():
        return src

    u = []
    for ax in range(3):
        world = ref.origin[ax] + np.arange(ref.dims[ax]) * ref.spacing[ax]
        u.append((world - src.origin[ax]) / src.spacing[ax])

    vals = src.values if not is_mask else src.values.astype(np.float64)
    out = _interp_axis(vals, 0, u[0], mode)
    out = _interp_axis(out, 1, u[1], mode)
    out = _interp_axis(out, 2, u[2], mode)
    if is_mask:
        return Mask3D(out.astype(np.uint8), ref.spacing, ref.origin)
    return Volume3D(out, ref.spacing, ref.origin)


def distance_to_boundary(mask: Mask3D) -> Volume3D:
    """Exact Euclidean distance (mm) from each in-mask voxel to the nearest
    out-of-mask voxel center; 0 outside the mask.

    The volume is treated as surrounded by background, so a mask touching the
    image border still has finite distances (the virtual exterior voxel one
    step outside counts as background). Anisotropic spacing is respected.
    """
    if mask.is_empty():
        raise EmptyMaskError("distance_to_boundary requires a non-empty mask")
    padded = np.pad(mask.values, 1, mode="constant", constant_values=0)
    dist = ndimage.distance_transform_edt(padded, sampling=mask.spacing)
    dist = dist[1:-1, 1:-1, 1:-1]
    return Volume3D(np.ascontiguousarray(dist), mask.spacing, mask.origin)


def mask_bbox(mask: Mask3D) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
    """Tight inclusive bounding box (lo, hi) of the set voxels."""
    if mask.is_empty():
        raise EmptyMaskError("mask_bbox requires a non-empty mask")
    idx = np.nonzero(mask.values)
    lo = tuple(int(ax.min()) for ax in idx)
    hi = tuple(int(ax.max()) for ax in idx)
    return lo, hi
