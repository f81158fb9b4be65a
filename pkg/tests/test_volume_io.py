import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from dichromat.volume_io import (
    MAGIC,
    BadMagicError,
    NonFiniteDataError,
    TruncatedPayloadError,
    UnsupportedFormatError,
    VolumeFormatError,
    read_pgm,
    read_volume,
    write_volume,
)


def dciv_bytes(vol):
    vol = np.asarray(vol, dtype="<f4")
    return struct.pack("<4sIIII", b"DCIV", 1, *vol.shape) + vol.tobytes()


def test_header_layout(tmp_path):
    vol = np.arange(6, dtype=np.float32).reshape(1, 2, 3)
    path = tmp_path / "v.dciv"
    write_volume(path, vol)
    raw = path.read_bytes()
    assert raw[:4] == MAGIC
    assert struct.unpack_from("<IIII", raw, 4) == (1, 1, 2, 3)
    assert raw == dciv_bytes(vol)


@given(arrays(np.float32, st.tuples(st.integers(1, 3), st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(-1e6, 1e6, width=32)))
def test_round_trip_bit_exact(tmp_path_factory, vol):
    path = tmp_path_factory.mktemp("rt") / "v.dciv"
    original = dciv_bytes(vol)
    path.write_bytes(original)
    read = read_volume(path)
    np.testing.assert_array_equal(read, vol.astype(np.float64))
    write_volume(path, read)
    assert path.read_bytes() == original


def test_two_dimensional_input_is_one_slice(tmp_path):
    path = tmp_path / "v.dciv"
    write_volume(path, np.ones((3, 4)))
    assert read_volume(path).shape == (1, 3, 4)


def test_truncated_payload(tmp_path):
    path = tmp_path / "t.dciv"
    path.write_bytes(dciv_bytes(np.ones((2, 3, 3)))[:-5])
    with pytest.raises(TruncatedPayloadError, match="truncated payload"):
        read_volume(path)


def test_truncated_header(tmp_path):
    path = tmp_path / "t.dciv"
    path.write_bytes(b"DCIV\x01\x00")
    with pytest.raises(TruncatedPayloadError):
        read_volume(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "b.dciv"
    path.write_bytes(b"NOPE" + dciv_bytes(np.ones((1, 2, 2)))[4:])
    with pytest.raises(BadMagicError, match="bad magic"):
        read_volume(path)


def test_trailing_bytes_and_version(tmp_path):
    path = tmp_path / "x.dciv"
    path.write_bytes(dciv_bytes(np.ones((1, 2, 2))) + b"\0")
    with pytest.raises(VolumeFormatError, match="trailing"):
        read_volume(path)
    raw = bytearray(dciv_bytes(np.ones((1, 2, 2))))
    raw[4] = 2
    path.write_bytes(bytes(raw))
    with pytest.raises(UnsupportedFormatError, match="version"):
        read_volume(path)


def test_non_finite_payload(tmp_path):
    path = tmp_path / "n.dciv"
    path.write_bytes(dciv_bytes(np.array([[[1.0, np.nan]]])))
    with pytest.raises(NonFiniteDataError):
        read_volume(path)
    with pytest.raises(NonFiniteDataError):
        write_volume(tmp_path / "out.dciv", np.array([[np.inf]]))
    assert not (tmp_path / "out.dciv").exists()


def test_failed_write_leaves_no_file(tmp_path):
    with pytest.raises(ValueError):
        write_volume(tmp_path / "bad.dciv", np.ones((1, 1, 1, 1)))
    assert list(tmp_path.iterdir()) == []


def test_overwrite_is_atomic(tmp_path):
    path = tmp_path / "v.dciv"
    write_volume(path, np.zeros((1, 2, 2)))
    write_volume(path, np.ones((1, 3, 3)))
    assert read_volume(path).shape == (1, 3, 3)
    assert [p.name for p in tmp_path.iterdir()] == ["v.dciv"]


def test_pgm_8bit(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P5\n# comment\n3 2\n255\n" + bytes([0, 51, 255, 102, 204, 255]))
    vol = read_volume(path)
    assert vol.shape == (1, 2, 3)
    assert vol[0, 0, 2] == 1.0
    np.testing.assert_allclose(vol[0], [[0, 0.2, 1], [0.4, 0.8, 1]])


def test_pgm_16bit(tmp_path):
    path = tmp_path / "b.pgm"
    data = np.array([[0, 1000], [65535, 30000]], dtype=">u2")
    path.write_bytes(b"P5 2 2 65535\n" + data.tobytes())
    np.testing.assert_allclose(read_pgm(path)[0], data / 65535.0)


def test_pgm_errors(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P2\n2 2\n255\n0 0 0 0\n")
    with pytest.raises(BadMagicError):
        read_volume(path)  # ASCII PGM is not recognised as PGM at all
    with pytest.raises(UnsupportedFormatError, match="P5"):
        read_pgm(path)
    path.write_bytes(b"P5\n2 2\n255\n\x00\x01")
    with pytest.raises(TruncatedPayloadError):
        read_volume(path)
    path.write_bytes(b"P5\n2 2\n70000\n" + bytes(8))
    with pytest.raises(UnsupportedFormatError):
        read_volume(path)
    path.write_bytes(b"P5\nx 2\n255\n" + bytes(4))
    with pytest.raises(UnsupportedFormatError):
        read_volume(path)
