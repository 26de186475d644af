"""Per-window feature operations (the testable unit behind the batch engine).

Each function works on a single 2D window and delegates to the same compiled
kernels the batch extractor uses, so window-level results and extracted rows
are identical by construction. GLCM/GLRLM accept an optional ``directions``
list of in-plane (dx, dy) offsets; the default is the four distance-1
directions averaged per feature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from . import engine
from .engine import DIRECTIONS, N_FO, N_GLCM, N_GLDM, N_GLRLM, N_GLSZM, N_NGTDM

__all__ = [
    "QuantizedWindow",
    "quantize",
    "first_order",
    "glcm_features",
    "glrlm_features",
    "glszm_features",
    "ngtdm_features",
    "gldm_features",
    "texture_features",
]


@dataclass(frozen=True)
class QuantizedWindow:
    """Fixed-bin-width quantization of a window: levels are bin indices >= 1."""

    levels: np.ndarray  # int64, same shape as the window
    ng: int  # highest level; empty bins below ng are allowed

    def __post_init__(self):
        if self.levels.size == 0:
            raise InvalidArgumentError("window must be non-empty")
        if int(self.levels.min()) < 1:
            raise InvalidArgumentError("levels must be >= 1")
        if int(self.levels.max()) != self.ng:
            raise InvalidArgumentError("ng must equal max level")


def _as_window2d(values) -> np.ndarray:
    win = np.ascontiguousarray(values, dtype=np.float64)
    if win.ndim == 1:
        win = win[:, None]
    if win.ndim != 2 or win.size == 0:
        raise InvalidArgumentError("window must be a non-empty 1D or 2D array")
    return win


def quantize(values, bin_width: float) -> QuantizedWindow:
    """Min-anchored quantization: level = floor((x - min)/W) + 1."""
    if bin_width <= 0:
        raise InvalidArgumentError(f"bin_width must be > 0, got {bin_width}")
    win = np.asarray(values, dtype=np.float64)
    if win.size == 0:
        raise InvalidArgumentError("window must be non-empty")
    lev = np.floor((win - win.min()) / bin_width).astype(np.int64) + 1
    return QuantizedWindow(levels=lev, ng=int(lev.max()))


def _compact(q: QuantizedWindow):
    """Compact (index-mapped) representation expected by the kernels."""
    lev2d = q.levels if q.levels.ndim == 2 else q.levels[:, None]
    u = np.unique(lev2d).astype(np.float64)
    idx = np.searchsorted(u, lev2d).astype(np.int64)
    return np.ascontiguousarray(idx), u, len(u), float(q.ng)


def _check_q(q) -> QuantizedWindow:
    if not isinstance(q, QuantizedWindow):
        raise InvalidArgumentError("expected a QuantizedWindow")
    return q


def _directions_array(directions) -> np.ndarray:
    if directions is None:
        return DIRECTIONS
    arr = np.asarray(directions, dtype=np.int64).reshape(-1, 2)
    if len(arr) == 0:
        raise InvalidArgumentError("directions must be non-empty")
    return arr


def first_order(values, bin_width: float, voxel_volume: float = 1.0) -> np.ndarray:
    """The 19 first-order features of a window (canonical order)."""
    if bin_width <= 0:
        raise InvalidArgumentError(f"bin_width must be > 0, got {bin_width}")
    flat = np.ascontiguousarray(np.asarray(values, dtype=np.float64).ravel())
    if flat.size == 0:
        raise InvalidArgumentError("window must be non-empty")
    out = np.empty(N_FO)
    engine._first_order19(flat, flat.size, float(bin_width), float(voxel_volume), out, 0)
    return out


def glcm_features(q: QuantizedWindow, directions=None) -> np.ndarray:
    """24 co-occurrence features, averaged per feature over non-empty directions."""
    lev, u, m, ng = _compact(_check_q(q))
    dirs = _directions_array(directions)
    wx, wy = lev.shape
    acc = np.zeros(N_GLCM)
    tmp = np.empty(N_GLCM)
    ndir = 0
    for dx, dy in dirs:
        cnt = engine._glcm24_dir(lev, wx, wy, m, u, ng, int(dx), int(dy), tmp)
        if cnt > 0:
            acc += tmp
            ndir += 1
    return acc / ndir if ndir else acc


def glrlm_features(q: QuantizedWindow, directions=None) -> np.ndarray:
    """16 run-length features, averaged per feature over directions."""
    lev, u, m, _ = _compact(_check_q(q))
    dirs = _directions_array(directions)
    wx, wy = lev.shape
    acc = np.zeros(N_GLRLM)
    tmp = np.empty(N_GLRLM)
    for dx, dy in dirs:
        engine._glrlm16_dir(lev, wx, wy, m, u, int(dx), int(dy), tmp)
        acc += tmp
    return acc / len(dirs)


def glszm_features(q: QuantizedWindow) -> np.ndarray:
    """16 size-zone features (8-connected zones)."""
    lev, u, m, _ = _compact(_check_q(q))
    out = np.empty(N_GLSZM)
    engine._glszm16(lev, lev.shape[0], lev.shape[1], m, u, out, 0)
    return out


def ngtdm_features(q: QuantizedWindow) -> np.ndarray:
    """5 neighborhood gray-tone difference features."""
    lev, u, m, _ = _compact(_check_q(q))
    out = np.empty(N_NGTDM)
    engine._ngtdm5(lev, lev.shape[0], lev.shape[1], m, u, out, 0)
    return out


def gldm_features(q: QuantizedWindow) -> np.ndarray:
    """14 dependence-matrix features (alpha=0, distance 1)."""
    lev, u, m, _ = _compact(_check_q(q))
    out = np.empty(N_GLDM)
    engine._gldm14(lev, lev.shape[0], lev.shape[1], m, u, out, 0)
    return out


def texture_features(values, bin_width: float, voxel_volume: float = 1.0) -> np.ndarray:
    """All 94 window features (first-order + five texture families)."""
    if bin_width <= 0:
        raise InvalidArgumentError(f"bin_width must be > 0, got {bin_width}")
    win = _as_window2d(values)
    out = np.empty(engine.N_T2W)
    engine._texture94(win, win.shape[0], win.shape[1], float(bin_width),
                      float(voxel_volume), out, 0)
    return out
