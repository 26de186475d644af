"""Feature-extraction configuration and the per-case feature matrix."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InvalidArgumentError
from .names import FEATURE_NAMES_VERSION, canonical_names

__all__ = ["FeatureSpec", "FeatureMatrix"]

_CHANNELS = ("t2w", "adc", "hbv")


@dataclass(frozen=True)
class FeatureSpec:
    """Extraction settings.

    ``bin_width`` applies to every channel unless overridden per channel in
    ``bin_width_overrides``; ``kernel_radius`` r gives a (2r+1)^2 in-plane
    window. The channel-to-family layout is fixed (94 T2W features,
    19 first-order each for ADC and HBV, 5 anatomical) and versioned through
    the canonical name list.
    """

    bin_width: float = 10.0
    kernel_radius: int = 2
    bin_width_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.bin_width <= 0:
            raise InvalidArgumentError(f"bin_width must be > 0, got {self.bin_width}")
        if self.kernel_radius < 1:
            raise InvalidArgumentError(
                f"kernel_radius must be >= 1, got {self.kernel_radius}"
            )
        for ch, w in self.bin_width_overrides.items():
            if ch not in _CHANNELS:
                raise InvalidArgumentError(f"unknown channel {ch!r}")
            if w <= 0:
                raise InvalidArgumentError(f"bin width for {ch} must be > 0")
        names = canonical_names()
        if len(names) != 137 or len(set(names)) != 137:
            raise InvalidArgumentError("canonical name list must be 137 unique names")
        object.__setattr__(self, "bin_width_overrides",
                           dict(self.bin_width_overrides))

    def channel_bin_width(self, channel: str) -> float:
        return float(self.bin_width_overrides.get(channel, self.bin_width))

    @property
    def names(self) -> list[str]:
        return canonical_names()

    def to_dict(self) -> dict:
        return {
            "names_version": FEATURE_NAMES_VERSION,
            "bin_width": self.bin_width,
            "kernel_radius": self.kernel_radius,
            "bin_width_overrides": dict(sorted(self.bin_width_overrides.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureSpec":
        if d.get("names_version") != FEATURE_NAMES_VERSION:
            raise InvalidArgumentError(
                f"feature name list version {d.get('names_version')} "
                f"!= supported {FEATURE_NAMES_VERSION}"
            )
        return cls(
            bin_width=float(d["bin_width"]),
            kernel_radius=int(d["kernel_radius"]),
            bin_width_overrides=dict(d.get("bin_width_overrides", {})),
        )


@dataclass
class FeatureMatrix:
    """One row of 137 features per extracted voxel of one case.

    ``voxel_index`` is the canonical x-fastest linear index into the case
    grid; ``labels`` are 1 (csPCa voxel), 0 (background / non-significant)
    or -1 (no ground truth available).
    """

    case_id: str
    values: np.ndarray  # (n, 137) float64
    voxel_index: np.ndarray  # (n,) int64
    labels: np.ndarray  # (n,) int8
    names: list[str] = field(default_factory=canonical_names)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.voxel_index = np.asarray(self.voxel_index, dtype=np.int64)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        n = self.values.shape[0]
        if self.values.ndim != 2 or self.values.shape[1] != len(self.names):
            raise InvalidArgumentError(
                f"values must be (n, {len(self.names)}), got {self.values.shape}"
            )
        if self.voxel_index.shape != (n,) or self.labels.shape != (n,):
            raise InvalidArgumentError("row metadata length mismatch")
        if not np.all(np.isfinite(self.values)):
            raise InvalidArgumentError("feature matrix contains NaN/Inf")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    # -- serialization ------------------------------------------------------

    def to_npz(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(
            path,
            case_id=np.array(self.case_id),
            names=np.array(self.names),
            values=self.values,
            voxel_index=self.voxel_index,
            labels=self.labels,
            names_version=np.array(FEATURE_NAMES_VERSION),
        )

    @classmethod
    def from_npz(cls, path) -> "FeatureMatrix":
        with np.load(path, allow_pickle=False) as z:
            if int(z["names_version"]) != FEATURE_NAMES_VERSION:
                raise InvalidArgumentError(
                    f"{path}: feature name list version mismatch"
                )
            names = [str(s) for s in z["names"]]
            if names != canonical_names():
                raise InvalidArgumentError(f"{path}: non-canonical column order")
            return cls(
                case_id=str(z["case_id"]),
                values=z["values"],
                voxel_index=z["voxel_index"],
                labels=z["labels"],
                names=names,
            )

    def to_csv(self, path) -> None:
        """CSV with the 137 canonical columns followed by case_id, voxel_index, label."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(self.names + ["case_id", "voxel_index", "label"])
            for i in range(self.n_rows):
                w.writerow(
                    [repr(v) for v in self.values[i]]
                    + [self.case_id, int(self.voxel_index[i]), int(self.labels[i])]
                )

    @classmethod
    def from_csv(cls, path) -> "FeatureMatrix":
        with open(path, newline="") as f:
            r = csv.reader(f)
            header = next(r)
            names = canonical_names()
            if header != names + ["case_id", "voxel_index", "label"]:
                raise InvalidArgumentError(f"{path}: unexpected CSV header")
            vals, vidx, labs, case_id = [], [], [], None
            for row in r:
                vals.append([float(x) for x in row[: len(names)]])
                case_id = row[len(names)]
                vidx.append(int(row[len(names) + 1]))
                labs.append(int(row[len(names) + 2]))
        return cls(
            case_id=case_id or "",
            values=np.array(vals, dtype=np.float64).reshape(len(vals), len(names)),
            voxel_index=np.array(vidx, dtype=np.int64),
            labels=np.array(labs, dtype=np.int8),
        )
