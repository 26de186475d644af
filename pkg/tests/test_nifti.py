"""NIfTI-1 codec tests."""

import gzip
import struct

import numpy as np
import pytest

from voxrad.errors import (
    BadMagicError,
    DimensionError,
    TruncatedFileError,
    UnsupportedDataTypeError,
)
from voxrad.nifti import read_nifti, write_nifti
from voxrad.volume import Mask3D, Volume3D

RNG = np.random.default_rng(11)


def test_f32_round_trip(tmp_path):
    vals = np.arange(64, dtype=np.float32).reshape(4, 4, 4).astype(np.float64)
    v = Volume3D(vals, (0.5, 0.5, 3.0), origin=(1.0, -2.0, 3.5))
    p = tmp_path / "ramp.nii"
    write_nifti(v, p)
    back = read_nifti(p)
    assert np.array_equal(back.values, v.values)
    assert back.spacing == v.spacing
    assert back.origin == v.origin


def test_gzip_round_trip_and_determinism(tmp_path):
    v = Volume3D(RNG.normal(size=(5, 6, 7)), (1, 1, 1))
    p1, p2 = tmp_path / "a.nii.gz", tmp_path / "b.nii.gz"
    write_nifti(v, p1)
    write_nifti(v, p2)
    assert p1.read_bytes() == p2.read_bytes()
    back = read_nifti(p1)
    assert np.allclose(back.values, v.values, atol=1e-6)  # f32 quantization


def test_scl_slope_inter(tmp_path):
    vals = np.full((2, 2, 2), 3.0)
    p = tmp_path / "scl.nii"
    write_nifti(Volume3D(vals, (1, 1, 1)), p, dtype="i16")
    raw = bytearray(p.read_bytes())
    raw[112:116] = struct.pack("<f", 2.0)  # scl_slope
    raw[116:120] = struct.pack("<f", 1.0)  # scl_inter
    p.write_bytes(bytes(raw))
    back = read_nifti(p)
    assert np.all(back.values == 7.0)


def test_bad_magic(tmp_path):
    v = Volume3D(np.zeros((2, 2, 2)), (1, 1, 1))
    p = tmp_path / "bad.nii"
    write_nifti(v, p)
    raw = bytearray(p.read_bytes())
    raw[344:348] = b"nix\x00"
    p.write_bytes(bytes(raw))
    with pytest.raises(BadMagicError):
        read_nifti(p)


def test_unsupported_datatype(tmp_path):
    v = Volume3D(np.zeros((2, 2, 2)), (1, 1, 1))
    p = tmp_path / "dt.nii"
    write_nifti(v, p)
    raw = bytearray(p.read_bytes())
    raw[70:72] = struct.pack("<h", 1536)  # complex128
    p.write_bytes(bytes(raw))
    with pytest.raises(UnsupportedDataTypeError):
        read_nifti(p)


def test_wrong_dimensionality(tmp_path):
    v = Volume3D(np.zeros((2, 2, 2)), (1, 1, 1))
    p = tmp_path / "d4.nii"
    write_nifti(v, p)
    raw = bytearray(p.read_bytes())
    raw[40:42] = struct.pack("<h", 4)  # dim[0]
    p.write_bytes(bytes(raw))
    with pytest.raises(DimensionError):
        read_nifti(p)


def test_truncated(tmp_path):
    v = Volume3D(np.zeros((4, 4, 4)), (1, 1, 1))
    p = tmp_path / "t.nii"
    write_nifti(v, p)
    p.write_bytes(p.read_bytes()[:-12])
    with pytest.raises(TruncatedFileError):
        read_nifti(p)
    p.write_bytes(b"\x00" * 100)
    with pytest.raises(TruncatedFileError):
        read_nifti(p)


def test_u8_mask_and_u16_labels(tmp_path):
    m = Mask3D((RNG.random((6, 5, 4)) > 0.5).astype(np.uint8), (1, 1, 1))
    p = tmp_path / "m.nii.gz"
    write_nifti(m, p, dtype="u8")
    back = read_nifti(p)
    assert np.array_equal(back.values, m.values.astype(np.float64))

    labels = Volume3D(RNG.integers(0, 700, size=(4, 4, 4)).astype(float), (1, 1, 1))
    q = tmp_path / "l.nii.gz"
    write_nifti(labels, q, dtype="u16")
    assert np.array_equal(read_nifti(q).values, labels.values)


def test_descrip_survives(tmp_path):
    v = Volume3D(np.zeros((2, 2, 2)), (1, 1, 1))
    p = tmp_path / "d.nii"
    write_nifti(v, p, descrip="cfg=deadbeef")
    assert b"cfg=deadbeef" in p.read_bytes()[:348]
