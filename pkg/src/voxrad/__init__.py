"""voxrad: voxel-wise MRI radiomics with boosted-tree lesion detection.

The package turns co-registered biparametric prostate MRI (T2W + diffusion)
plus gland/zone masks into per-voxel cancer-probability maps, scored lesion
detection maps, patient scores, evaluation reports and per-lesion feature
attributions. See README.md for the pipeline walkthrough.
"""

__version__ = "0.1.0"

from . import errors
from .volume import Mask3D, Volume3D

__all__ = ["Mask3D", "Volume3D", "errors", "__version__"]
