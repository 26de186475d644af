"""Canonical 137-feature column order.

The order is a published format: CSV headers, model bundles and SHAP outputs
all index into it, so any change is a format version bump (bump
``FEATURE_NAMES_VERSION`` and regenerate ``feature_names_v1.txt``).
"""

from __future__ import annotations

FEATURE_NAMES_VERSION = 1

FIRST_ORDER = [
    "energy",
    "total_energy",
    "entropy",
    "minimum",
    "p10",
    "p90",
    "maximum",
    "mean",
    "median",
    "iqr",
    "range",
    "mad",
    "rmad",
    "rms",
    "std",
    "skewness",
    "kurtosis",
    "variance",
    "uniformity",
]

GLCM = [
    "autocorrelation",
    "joint_average",
    "cluster_prominence",
    "cluster_shade",
    "cluster_tendency",
    "contrast",
    "correlation",
    "difference_average",
    "difference_entropy",
    "difference_variance",
    "joint_energy",
    "joint_entropy",
    "imc1",
    "imc2",
    "idm",
    "idmn",
    "id",
    "idn",
    "inverse_variance",
    "maximum_probability",
    "sum_average",
    "sum_entropy",
    "sum_squares",
    "mcc",
]

GLRLM = [
    "short_run_emphasis",
    "long_run_emphasis",
    "gray_level_nonuniformity",
    "gray_level_nonuniformity_normalized",
    "run_length_nonuniformity",
    "run_length_nonuniformity_normalized",
    "run_percentage",
    "gray_level_variance",
    "run_variance",
    "run_entropy",
    "low_gray_level_run_emphasis",
    "high_gray_level_run_emphasis",
    "short_run_low_gray_level_emphasis",
    "short_run_high_gray_level_emphasis",
    "long_run_low_gray_level_emphasis",
    "long_run_high_gray_level_emphasis",
]

GLSZM = [
    "small_area_emphasis",
    "large_area_emphasis",
    "gray_level_nonuniformity",
    "gray_level_nonuniformity_normalized",
    "size_zone_nonuniformity",
    "size_zone_nonuniformity_normalized",
    "zone_percentage",
    "gray_level_variance",
    "zone_variance",
    "zone_entropy",
    "low_gray_level_zone_emphasis",
    "high_gray_level_zone_emphasis",
    "small_area_low_gray_level_emphasis",
    "small_area_high_gray_level_emphasis",
    "large_area_low_gray_level_emphasis",
    "large_area_high_gray_level_emphasis",
]

NGTDM = [
    "coarseness",
    "contrast",
    "busyness",
    "complexity",
    "strength",
]

GLDM = [
    "small_dependence_emphasis",
    "large_dependence_emphasis",
    "gray_level_nonuniformity",
    "dependence_nonuniformity",
    "dependence_nonuniformity_normalized",
    "gray_level_variance",
    "dependence_variance",
    "dependence_entropy",
    "low_gray_level_emphasis",
    "high_gray_level_emphasis",
    "small_dependence_low_gray_level_emphasis",
    "small_dependence_high_gray_level_emphasis",
    "large_dependence_low_gray_level_emphasis",
    "large_dependence_high_gray_level_emphasis",
]

ANATOMICAL = ["rdb", "xpos", "ypos", "zpos", "pzl"]

T2W_FAMILIES = [
    ("fo", FIRST_ORDER),
    ("glcm", GLCM),
    ("glrlm", GLRLM),
    ("glszm", GLSZM),
    ("ngtdm", NGTDM),
    ("gldm", GLDM),
]


def canonical_names() -> list[str]:
    """The 137 feature columns in canonical order."""
    names = []
    for family, feats in T2W_FAMILIES:
        names += [f"t2w_{family}_{f}" for f in feats]
    names += [f"adc_fo_{f}" for f in FIRST_ORDER]
    names += [f"hbv_fo_{f}" for f in FIRST_ORDER]
    names += [f"anat_{f}" for f in ANATOMICAL]
    return names


N_T2W = sum(len(f) for _, f in T2W_FAMILIES)  # 94
N_FEATURES = N_T2W + 2 * len(FIRST_ORDER) + len(ANATOMICAL)  # 137

assert N_T2W == 94 and N_FEATURES == 137
