"""Intensity standardization and diffusion-derived maps.

Covers the four per-case preprocessing steps that feed the feature engine:

* dual-reference linear normalization of T2W intensities,
* per-voxel monoexponential fitting of the diffusion series to an ADC map,
* synthesis of a high-b-value image from the fitted decay model,
* z-score (Gaussian) normalization of ADC/HBV with configurable scope.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMaskError, InsufficientBValuesError, InvalidArgumentError
from .volume import Mask3D, Volume3D

__all__ = [
    "NormalizationStats",
    "AdcFitResult",
    "dual_reference_normalize",
    "fit_adc",
    "synthesize_high_bvalue",
    "gaussian_normalize",
    "compute_stats",
]


@dataclass(frozen=True)
class NormalizationStats:
    """Mean/std used for z-scoring one channel.

    ``scope`` records where the statistic came from: 'global' pools in-mask
    voxels over the whole training cohort, 'patient' uses one case.
    """

    mean: float
    std: float
    scope: str  # 'global' | 'patient'
    source_channel: str  # 't2w' | 'adc' | 'hbv'

    def __post_init__(self):
        if self.std <= 0:
            raise InvalidArgumentError(f"std must be > 0, got {self.std}")
        if self.scope not in ("global", "patient"):
            raise InvalidArgumentError(f"unknown scope {self.scope!r}")


@dataclass(frozen=True)
class AdcFitResult:
    """Per-voxel monoexponential fit: S(b) = s0 * exp(-b * adc).

    ``adc`` is in mm^2/s (clamped at 0), ``valid`` marks voxels where at
    least two positive samples were available for the fit.
    """

    adc: Volume3D
    s0: Volume3D
    valid: Mask3D


def dual_reference_normalize(t2w: Volume3D, ref_low: float, ref_high: float) -> Volume3D:
    """Map intensities linearly so ref_low -> 0 and ref_high -> 1 (no clamping)."""
    if ref_high <= ref_low:
        raise InvalidArgumentError(
            f"ref_high ({ref_high}) must exceed ref_low ({ref_low})"
        )
    scaled = (t2w.values - ref_low) / (ref_high - ref_low)
    return t2w.with_values(scaled)


def fit_adc(dwi_series: list[tuple[float, Volume3D]],
            b_range: tuple[float, float] = (50.0, 800.0)) -> AdcFitResult:
    """Least-squares monoexponential fit over the b-values inside ``b_range``.

    Per voxel the fit uses samples with S > 0; log-domain ordinary least
    squares of ln S on b gives the decay rate (ADC, clamped at 0) and the
    extrapolated zero-b signal s0. Voxels with fewer than two usable samples
    get adc = 0, s0 = 0 and are excluded from ``valid``.
    """
    lo, hi = b_range
    usable = [(float(b), vol) for b, vol in dwi_series if lo <= float(b) <= hi]
    if len(usable) < 2:
        raise InsufficientBValuesError(
            f"need >= 2 series with b in [{lo}, {hi}], got {len(usable)}"
        )
    grid = usable[0][1]
    for _, vol in usable[1:]:
        if vol.grid() != grid.grid():
            raise InvalidArgumentError("DWI series must share one grid")

    bs = np.array([b for b, _ in usable])
    stack = np.stack([vol.values for _, vol in usable], axis=-1)

    pos = stack > 0
    logs = np.where(pos, np.log(np.where(pos, stack, 1.0)), 0.0)
    n = pos.sum(axis=-1)
    sx = (pos * bs).sum(axis=-1)
    sy = logs.sum(axis=-1)
    sxx = (pos * bs**2).sum(axis=-1)
    sxy = (logs * bs).sum(axis=-1)

    denom = n * sxx - sx**2
    ok = (n >= 2) & (denom > 0)
    safe = np.where(ok, denom, 1.0)
    slope = np.where(ok, (n * sxy - sx * sy) / safe, 0.0)
    icept = np.where(ok, (sy - slope * sx) / np.maximum(n, 1), 0.0)

    adc = np.where(ok, np.maximum(-slope, 0.0), 0.0)
    s0 = np.where(ok, np.exp(icept), 0.0)
    return AdcFitResult(
        adc=grid.with_values(adc),
        s0=grid.with_values(s0),
        valid=Mask3D(ok.astype(np.uint8), grid.spacing, grid.origin),
    )


def synthesize_high_bvalue(fit: AdcFitResult, b_target: float) -> Volume3D:
    """Evaluate the fitted decay model at ``b_target``; 0 on invalid voxels."""
    if b_target <= 0:
        raise InvalidArgumentError(f"b_target must be > 0, got {b_target}")
    ok = fit.valid.values > 0
    hb = np.where(ok, fit.s0.values * np.exp(-b_target * fit.adc.values), 0.0)
    return fit.adc.with_values(hb)


def gaussian_normalize(vol: Volume3D, stats: NormalizationStats,
                       mask: Mask3D | None = None) -> Volume3D:
    """z-score every voxel with the supplied stats.

    The mask only documents where the stats were computed; normalization is
    applied to the full volume so windows straddling the gland boundary stay
    well-defined.
    """
    if stats.std <= 0:
        raise InvalidArgumentError("std must be > 0")
    return vol.with_values((vol.values - stats.mean) / stats.std)


def compute_stats(vols: list[Volume3D], masks: list[Mask3D], scope: str,
                  source_channel: str) -> NormalizationStats:
    """Population mean/std of in-mask voxels.

    ``scope='patient'`` expects a single case; ``scope='global'`` pools the
    in-mask voxels of every case (the training cohort).
    """
    if scope not in ("global", "patient"):
        raise InvalidArgumentError(f"unknown scope {scope!r}")
    if scope == "patient" and len(vols) != 1:
        raise InvalidArgumentError("patient scope takes exactly one case")
    if len(vols) != len(masks) or not vols:
        raise InvalidArgumentError("need one mask per volume")

    pooled = []
    for vol, mask in zip(vols, masks):
        if vol.dims != mask.dims:
            raise InvalidArgumentError("volume and mask dims differ")
        sel = vol.values[mask.values > 0]
        if sel.size:
            pooled.append(sel)
    if not pooled:
        raise EmptyMaskError("no in-mask voxels to compute stats from")
    data = np.concatenate(pooled)
    std = float(data.std())  # population
    if std <= 0:
        raise InvalidArgumentError("in-mask intensities are constant; std would be 0")
    return NormalizationStats(
        mean=float(data.mean()), std=std, scope=scope, source_channel=source_channel
    )
