"""Synthetic bpMRI cohort generator for end-to-end pipeline checks and demos.

Each case is an analytic scene: an ellipsoidal prostate with a posterior
peripheral zone, optional implanted lesions (csPCa lesions are T2W-dark,
ADC-dark and bright on high-b-value images; benign ones have milder
contrast), reference-tissue boxes of muscle- and fat-like intensity, and a
diffusion series following a monoexponential decay with multiplicative
noise. Everything is rendered in world coordinates, so the T2W and DWI
grids see the same anatomy at their own resolutions. Fully deterministic
for a given seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .nifti import write_nifti
from .volume import Mask3D, Volume3D

__all__ = ["generate_cohort"]

T2W_DIMS = (96, 96, 12)
T2W_SPACING = (1.0, 1.0, 3.0)
DWI_DIMS = (48, 48, 12)
DWI_SPACING = (2.0, 2.0, 3.0)
B_VALUES = (0.0, 50.0, 400.0, 800.0)
HBV_B = 1400.0


@dataclass
class _Lesion:
    center: tuple  # mm
    radius: float  # mm
    grade_group: int
    pirads: int
    adc: float
    t2w_drop: float
    s0_gain: float


@dataclass
class _Scene:
    center: tuple
    semi: tuple  # ellipsoid semi-axes, mm
    pz_frac: float
    t2w_tz: float
    t2w_pz: float
    adc_tz: float
    adc_pz: float
    s0_tz: float
    s0_pz: float
    lesions: list


def _world(dims, spacing):
    ax = [np.arange(n) * s for n, s in zip(dims, spacing)]
    return np.meshgrid(*ax, indexing="ij")


def _ellipsoid_norm(xyz, center, semi):
    x, y, z = xyz
    return (((x - center[0]) / semi[0]) ** 2
            + ((y - center[1]) / semi[1]) ** 2
            + ((z - center[2]) / semi[2]) ** 2)


def _make_scene(rng: np.random.Generator, n_cspca: int, n_benign: int) -> _Scene:
    center = (48 + rng.uniform(-3, 3), 48 + rng.uniform(-3, 3),
              16.5 + rng.uniform(-1.5, 1.5))
    semi = (rng.uniform(15, 18), rng.uniform(12, 15), rng.uniform(6.5, 8.5))
    lesions = []
    for kind in ["cspca"] * n_cspca + ["benign"] * n_benign:
        c = (center[0], center[1] + 0.3 * semi[1], center[2])  # fallback spot
        r = 4.5
        for _ in range(100):
            u = rng.uniform(-0.55, 0.55, size=3)
            u[1] = abs(u[1]) * 0.9 + 0.12  # bias into the posterior band (PZ)
            if float(np.sum(u**2)) > 0.5:
                continue
            cand = tuple(center[i] + u[i] * semi[i] for i in range(3))
            rad = rng.uniform(4.5, 6.5) if kind == "cspca" else rng.uniform(4.0, 5.5)
            if any(np.hypot(l.center[0] - cand[0], l.center[1] - cand[1])
                   < rad + l.radius for l in lesions):
                continue
            c, r = cand, rad
            break
        if kind == "cspca":
            gg = int(rng.choice([2, 3, 4, 5], p=[0.35, 0.35, 0.15, 0.15]))
            pirads = int(rng.choice([3, 4, 5], p=[0.2, 0.35, 0.45]))
            lesions.append(_Lesion(c, r, gg, pirads,
                                   adc=rng.uniform(0.55e-3, 0.7e-3),
                                   t2w_drop=rng.uniform(120, 160),
                                   s0_gain=rng.uniform(1.12, 1.2)))
        else:
            gg = 1
            pirads = int(rng.choice([2, 3]))
            lesions.append(_Lesion(c, r, gg, pirads,
                                   adc=rng.uniform(0.95e-3, 1.1e-3),
                                   t2w_drop=rng.uniform(40, 70),
                                   s0_gain=rng.uniform(1.02, 1.06)))
    return _Scene(
        center=center,
        semi=semi,
        pz_frac=0.08,
        t2w_tz=rng.uniform(400, 440),
        t2w_pz=rng.uniform(500, 540),
        adc_tz=rng.uniform(1.2e-3, 1.3e-3),
        adc_pz=rng.uniform(1.35e-3, 1.5e-3),
        s0_tz=rng.uniform(1150, 1250),
        s0_pz=rng.uniform(1250, 1350),
        lesions=lesions,
    )


def _render_masks(scene: _Scene, dims, spacing):
    xyz = _world(dims, spacing)
    inside = _ellipsoid_norm(xyz, scene.center, scene.semi) <= 1.0
    posterior = (xyz[1] - scene.center[1]) / scene.semi[1] >= scene.pz_frac
    pz = inside & posterior
    tz = inside & ~posterior
    labels = np.zeros(dims, dtype=np.uint16)
    for i, les in enumerate(scene.lesions, start=1):
        d2 = ((xyz[0] - les.center[0]) ** 2 + (xyz[1] - les.center[1]) ** 2
              + (xyz[2] - les.center[2]) ** 2)
        labels[(d2 <= les.radius**2) & inside] = i
    return inside, pz, tz, labels, xyz


def _render_fields(scene: _Scene, dims, spacing, rng):
    inside, pz, tz, labels, xyz = _render_masks(scene, dims, spacing)

    smooth = np.zeros(dims)
    for _ in range(3):
        c = (rng.uniform(30, 66), rng.uniform(30, 66), rng.uniform(9, 24))
        s = rng.uniform(8, 15)
        amp = rng.uniform(-35, 35)
        d2 = ((xyz[0] - c[0]) ** 2 + (xyz[1] - c[1]) ** 2 + (xyz[2] - c[2]) ** 2)
        smooth += amp * np.exp(-d2 / (2 * s * s))

    t2w = np.full(dims, 150.0)
    t2w[tz] = scene.t2w_tz
    t2w[pz] = scene.t2w_pz
    adc = np.full(dims, 2.2e-3)
    adc[tz] = scene.adc_tz
    adc[pz] = scene.adc_pz
    s0 = np.full(dims, 420.0)
    s0[tz] = scene.s0_tz
    s0[pz] = scene.s0_pz
    for i, les in enumerate(scene.lesions, start=1):
        sel = labels == i
        t2w[sel] -= les.t2w_drop
        adc[sel] = les.adc
        s0[sel] *= les.s0_gain

    # reference-tissue boxes: muscle-like (low) and fat-like (high)
    x, y = xyz[0], xyz[1]
    muscle = (x >= 4) & (x <= 14) & (y >= 4) & (y <= 14)
    fat = (x >= 82) & (x <= 92) & (y >= 4) & (y <= 14)
    t2w[muscle] = 200.0
    t2w[fat] = 1000.0

    t2w = t2w + smooth * (inside | muscle | fat) * 0.5 + rng.normal(0, 12, dims)
    adc = adc + (smooth / 35) * 0.08e-3 * inside + rng.normal(0, 0.04e-3, dims)
    adc = np.clip(adc, 0.15e-3, 3.2e-3)
    s0 = np.clip(s0 + rng.normal(0, 20, dims), 1.0, None)
    return t2w, adc, s0, inside, pz, tz, labels, muscle, fat


def generate_cohort(out_dir, n_cases: int = 20, seed: int = 20240601,
                    test_fraction: float = 0.0) -> Path:
    """Write a synthetic cohort (NIfTI volumes + manifest.json); returns the
    manifest path. Roughly 60% of cases carry csPCa lesions, 20% carry only
    a benign lesion and 20% are clean."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cases = []
    n_test = int(round(test_fraction * n_cases))
    for c in range(n_cases):
        rng = np.random.default_rng([seed, c])
        cid = f"ph{c:03d}"
        kind = c % 5
        if kind in (0, 1, 2):  # csPCa case
            n_cs = 1 + (c % 2 == 0 and kind == 0)
            scene = _make_scene(rng, n_cspca=int(n_cs), n_benign=int(kind == 2))
        elif kind == 3:  # benign-only
            scene = _make_scene(rng, n_cspca=0, n_benign=1)
        else:  # clean
            scene = _make_scene(rng, n_cspca=0, n_benign=0)

        cdir = out / "cases" / cid
        cdir.mkdir(parents=True, exist_ok=True)

        t2w, _, _, inside, pz, tz, labels, muscle, fat = _render_fields(
            scene, T2W_DIMS, T2W_SPACING, rng)
        write_nifti(Volume3D(t2w, T2W_SPACING), cdir / "t2w.nii.gz")
        write_nifti(Mask3D(inside.astype(np.uint8), T2W_SPACING),
                    cdir / "prostate.nii.gz", dtype="u8")
        write_nifti(Mask3D(pz.astype(np.uint8), T2W_SPACING),
                    cdir / "pz.nii.gz", dtype="u8")
        write_nifti(Mask3D(tz.astype(np.uint8), T2W_SPACING),
                    cdir / "tz.nii.gz", dtype="u8")
        write_nifti(Mask3D(muscle.astype(np.uint8), T2W_SPACING),
                    cdir / "ref_muscle.nii.gz", dtype="u8")
        write_nifti(Mask3D(fat.astype(np.uint8), T2W_SPACING),
                    cdir / "ref_fat.nii.gz", dtype="u8")
        write_nifti(Volume3D(labels.astype(np.float64), T2W_SPACING),
                    cdir / "gt_labels.nii.gz", dtype="u16")

        _, adc_lo, s0_lo, *_ = _render_fields(scene, DWI_DIMS, DWI_SPACING,
                                              np.random.default_rng([seed, c, 1]))
        rng2 = np.random.default_rng([seed, c, 2])
        entry = {
            "case_id": cid,
            "t2w": f"cases/{cid}/t2w.nii.gz",
            "masks": {
                "prostate": f"cases/{cid}/prostate.nii.gz",
                "pz": f"cases/{cid}/pz.nii.gz",
                "tz": f"cases/{cid}/tz.nii.gz",
            },
            "ref_masks": {
                "low": f"cases/{cid}/ref_muscle.nii.gz",
                "high": f"cases/{cid}/ref_fat.nii.gz",
            },
            "split": "test" if c >= n_cases - n_test else "train",
        }

        if c < 5:
            # precomputed ADC/HBV, the on-scanner route
            hbv = s0_lo * np.exp(-HBV_B * adc_lo)
            write_nifti(Volume3D(adc_lo, DWI_SPACING), cdir / "adc.nii.gz",
                        dtype="f64")
            write_nifti(Volume3D(hbv, DWI_SPACING), cdir / "hbv.nii.gz")
            entry["adc"] = f"cases/{cid}/adc.nii.gz"
            entry["hbv"] = f"cases/{cid}/hbv.nii.gz"
        else:
            dwi = []
            for b in B_VALUES:
                sig = s0_lo * np.exp(-b * adc_lo)
                sig = np.clip(sig * (1 + rng2.normal(0, 0.02, DWI_DIMS)), 1e-3, None)
                path = f"cases/{cid}/dwi_b{int(b)}.nii.gz"
                write_nifti(Volume3D(sig, DWI_SPACING), out / path)
                dwi.append({"b": b, "path": path})
            entry["dwi"] = dwi

        if c % 2 == 0:
            from scipy.ndimage import gaussian_filter
            pzl = gaussian_filter(pz.astype(float), sigma=[2.0, 2.0, 0.7])
            pzl = np.clip(pzl + rng2.normal(0, 0.02, T2W_DIMS), 0, 1)
            write_nifti(Volume3D(pzl, T2W_SPACING), cdir / "pzl.nii.gz")
            entry["pz_likelihood"] = f"cases/{cid}/pzl.nii.gz"

        lesions = [
            {"label": i, "gg": l.grade_group, "pirads": l.pirads}
            for i, l in enumerate(scene.lesions, start=1)
        ]
        entry["gt"] = {"labels": f"cases/{cid}/gt_labels.nii.gz",
                       "lesions": lesions}
        if lesions:
            entry["pirads_patient"] = max(l["pirads"] for l in lesions)
        else:
            entry["pirads_patient"] = int(np.random.default_rng([seed, c, 3])
                                          .choice([1, 2]))
        cases.append(entry)

    manifest = out / "manifest.json"
    manifest.write_text(json.dumps({"version": 1, "cases": cases}, indent=1))
    return manifest
