"""Voxel-wise radiomic feature extraction."""

from .anatomical import anatomical_maps
from .extract import PreprocessedCase, extract_case, mask_voxel_coords
from .names import FEATURE_NAMES_VERSION, N_FEATURES, N_T2W, canonical_names
from .ops import (
    QuantizedWindow,
    first_order,
    gldm_features,
    glcm_features,
    glrlm_features,
    glszm_features,
    ngtdm_features,
    quantize,
    texture_features,
)
from .spec import FeatureMatrix, FeatureSpec

__all__ = [
    "FEATURE_NAMES_VERSION",
    "N_FEATURES",
    "N_T2W",
    "FeatureMatrix",
    "FeatureSpec",
    "PreprocessedCase",
    "QuantizedWindow",
    "anatomical_maps",
    "canonical_names",
    "extract_case",
    "first_order",
    "gldm_features",
    "glcm_features",
    "glrlm_features",
    "glszm_features",
    "mask_voxel_coords",
    "ngtdm_features",
    "quantize",
    "texture_features",
]
