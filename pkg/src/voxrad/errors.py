"""Exception hierarchy shared across the package."""


class VoxradError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(VoxradError, ValueError):
    """A caller-supplied argument violates a precondition."""


class EmptyMaskError(VoxradError):
    """An operation that requires a non-empty mask received an empty one."""


class NiftiError(VoxradError):
    """Base class for NIfTI read/write failures."""


class BadMagicError(NiftiError):
    """File is not a single-file NIfTI-1 image."""


class UnsupportedDataTypeError(NiftiError):
    """NIfTI datatype code is outside the supported scalar set."""


class DimensionError(NiftiError):
    """Image is not a 3D scalar volume."""


class TruncatedFileError(NiftiError):
    """File ends before the declared voxel data."""


class ManifestError(VoxradError):
    """Dataset manifest is malformed."""


class FrameMismatchError(VoxradError):
    """Volumes of one case do not share a grid within tolerance."""


class LabelMismatchError(VoxradError):
    """Ground-truth label volume and lesion table disagree."""


class InsufficientBValuesError(VoxradError):
    """Fewer than two diffusion series fall inside the fit range."""


class SingleClassError(VoxradError):
    """Both classes are required but only one is present."""


class ModelSchemaError(VoxradError):
    """Model bundle fails schema or consistency validation."""


class StageError(VoxradError):
    """A pipeline stage cannot run (missing inputs, mixed config hashes)."""
