"""Minimal NIfTI-1 reader/writer for 3D scalar volumes.

Supports single-file ``.nii`` / ``.nii.gz`` with scalar datatypes
(uint8, int16, uint16, float32, float64). Grids must be axis-aligned:
files carrying a rotated sform/qform are rejected at load. Writing always
emits a little-endian file with ``sform_code = 1`` and a diagonal sform,
and produces byte-identical output for identical inputs (gzip mtime is
pinned to 0).
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    DimensionError,
    NiftiError,
    TruncatedFileError,
    UnsupportedDataTypeError,
)
from .volume import Mask3D, Volume3D

__all__ = ["read_nifti", "write_nifti"]

_HDR_FMT = (
    "i 10s 18s i h c c 8h 3f h h h h 8f f f f h c c f f f f i i "
    "80s 24s h h 3f 3f 4f 4f 4f 16s 4s"
)
_HDR_SIZE = 348
_VOX_OFFSET = 352  # header + 4-byte extension flag

_DTYPES = {
    2: np.dtype(np.uint8),
    4: np.dtype(np.int16),
    16: np.dtype(np.float32),
    64: np.dtype(np.float64),
    512: np.dtype(np.uint16),
}
_CODES = {v: k for k, v in _DTYPES.items()}

_WRITE_DTYPES = {
    "u8": np.uint8,
    "i16": np.int16,
    "u16": np.uint16,
    "f32": np.float32,
    "f64": np.float64,
}


def _read_bytes(path) -> bytes:
    with open(path, "rb") as f:
        head = f.read(2)
        f.seek(0)
        if head == b"\x1f\x8b":
            with gzip.open(f) as gz:
                return gz.read()
        return f.read()


def read_nifti(path) -> Volume3D:
    """Read a single-file NIfTI-1 volume as a :class:`Volume3D`.

    Voxel values are converted to float64 with ``scl_slope``/``scl_inter``
    applied (slope 0 means unscaled, per the format).
    """
    raw = _read_bytes(path)
    if len(raw) < _HDR_SIZE:
        raise TruncatedFileError(f"{path}: file shorter than a NIfTI-1 header")
    magic = raw[344:348]
    if magic != b"n+1\x00":
        raise BadMagicError(f"{path}: magic {magic!r} is not a single-file NIfTI-1")

    for endian in ("<", ">"):
        fields = struct.unpack(endian + _HDR_FMT, raw[:_HDR_SIZE])
        if fields[0] == _HDR_SIZE:
            break
    else:
        raise BadMagicError(f"{path}: sizeof_hdr != 348 in either byte order")

    dim = fields[7:15]
    datatype = fields[19]
    pixdim = fields[22:30]
    vox_offset = int(fields[30])
    scl_slope, scl_inter = fields[31], fields[32]
    qform_code = fields[44]
    sform_code = fields[45]
    quatern = fields[46:49]
    qoffset = fields[49:52]
    srow = np.array(fields[52:64], dtype=np.float64).reshape(3, 4)

    if dim[0] != 3:
        raise DimensionError(f"{path}: expected 3D image, dim[0]={dim[0]}")
    nx, ny, nz = int(dim[1]), int(dim[2]), int(dim[3])
    if min(nx, ny, nz) < 1:
        raise DimensionError(f"{path}: non-positive dims {(nx, ny, nz)}")
    if datatype not in _DTYPES:
        raise UnsupportedDataTypeError(f"{path}: datatype code {datatype}")
    dtype = _DTYPES[datatype].newbyteorder(endian)

    spacing = tuple(float(p) for p in pixdim[1:4])
    if min(spacing) <= 0:
        raise NiftiError(f"{path}: non-positive pixdim {spacing}")

    if sform_code > 0:
        off_diag = srow[:, :3] - np.diag(np.diag(srow[:, :3]))
        if np.max(np.abs(off_diag)) > 1e-5:
            raise NiftiError(f"{path}: non-axis-aligned sform is not supported")
        diag = np.diag(srow[:, :3])
        if np.any(diag <= 0) or np.max(np.abs(diag - spacing)) > 1e-3:
            raise NiftiError(f"{path}: sform scales disagree with pixdim")
        origin = tuple(float(v) for v in srow[:, 3])
    elif qform_code > 0:
        if any(abs(q) > 1e-6 for q in quatern) or pixdim[0] < 0:
            raise NiftiError(f"{path}: rotated/flipped qform is not supported")
        origin = tuple(float(v) for v in qoffset)
    else:
        origin = (0.0, 0.0, 0.0)

    nvox = nx * ny * nz
    nbytes = nvox * dtype.itemsize
    if len(raw) < vox_offset + nbytes:
        raise TruncatedFileError(
            f"{path}: need {vox_offset + nbytes} bytes, file has {len(raw)}"
        )
    data = np.frombuffer(raw, dtype=dtype, count=nvox, offset=vox_offset)
    arr = data.reshape((nx, ny, nz), order="F").astype(np.float64)

    slope = float(scl_slope)
    inter = float(scl_inter)
    if slope == 0.0 or not np.isfinite(slope):
        slope = 1.0
    if not np.isfinite(inter):
        inter = 0.0
    if slope != 1.0 or inter != 0.0:
        arr = arr * slope + inter
    return Volume3D(arr, spacing, origin)


def write_nifti(vol: Volume3D | Mask3D, path, dtype: str = "f32",
                descrip: str = "") -> None:
    """Write a volume as single-file NIfTI-1 (gzipped iff path ends in .gz).

    ``dtype`` is one of u8/i16/u16/f32/f64. ``descrip`` lands in the 80-byte
    header comment (used by the pipeline to embed its config hash).
    """
    if dtype not in _WRITE_DTYPES:
        raise UnsupportedDataTypeError(f"unsupported write dtype {dtype!r}")
    np_dtype = np.dtype(_WRITE_DTYPES[dtype]).newbyteorder("<")
    values = np.asarray(vol.values)
    nx, ny, nz = values.shape
    sx, sy, sz = vol.spacing
    ox, oy, oz = vol.origin

    hdr = struct.pack(
        "<" + _HDR_FMT,
        _HDR_SIZE,
        b"", b"", 0, 0, b"r", b"\x00",
        3, nx, ny, nz, 1, 1, 1, 1,
        0.0, 0.0, 0.0,
        0,
        _CODES[np.dtype(_WRITE_DTYPES[dtype])],
        np_dtype.itemsize * 8,
        0,
        1.0, sx, sy, sz, 0.0, 0.0, 0.0, 0.0,
        float(_VOX_OFFSET),
        1.0, 0.0,
        0, b"\x00", b"\x02",  # xyzt_units: mm
        0.0, 0.0, 0.0, 0.0, 0, 0,
        descrip.encode("ascii", "replace")[:79],
        b"",
        0, 1,  # qform_code, sform_code
        0.0, 0.0, 0.0,
        0.0, 0.0, 0.0,
        sx, 0.0, 0.0, ox,
        0.0, sy, 0.0, oy,
        0.0, 0.0, sz, oz,
        b"",
        b"n+1\x00",
    )
    payload = hdr + b"\x00\x00\x00\x00" + np.asfortranarray(
        values.astype(np_dtype, copy=False)
    ).tobytes(order="F")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".gz":
        with open(path, "wb") as f:
            # pinned mtime and no embedded filename keep output byte-stable
            with gzip.GzipFile(filename="", fileobj=f, mode="wb", mtime=0) as gz:
                gz.write(payload)
    else:
        with open(path, "wb") as f:
            f.write(payload)
