"""Reading and writing image volumes.

DCIV layout (all little-endian)::

    bytes 0-3    magic b"DCIV"
    uint32       version (1)
    uint32       slices
    uint32       rows
    uint32       cols
    float32[]    slices*rows*cols values, slice-major then row-major

Binary PGM (``P5``) files with 8- or 16-bit samples are accepted as
single-slice input and scaled to ``[0, 1]`` by their declared maxval.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

__all__ = [
    "VolumeFormatError",
    "BadMagicError",
    "TruncatedPayloadError",
    "NonFiniteDataError",
    "UnsupportedFormatError",
    "read_volume",
    "write_volume",
    "read_pgm",
    "MAGIC",
    "VERSION",
]

MAGIC = b"DCIV"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")


class VolumeFormatError(ValueError):
    """Base class for malformed volume files."""


class BadMagicError(VolumeFormatError):
    pass


class TruncatedPayloadError(VolumeFormatError):
    pass


class NonFiniteDataError(VolumeFormatError):
    pass


class UnsupportedFormatError(VolumeFormatError):
    pass


def _parse_dciv(raw: bytes, path) -> np.ndarray:
    if len(raw) < _HEADER.size:
        if not MAGIC.startswith(raw[:4]):
            raise BadMagicError(f"{path}: bad magic {raw[:4]!r}, expected {MAGIC!r}")
        raise TruncatedPayloadError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, slices, rows, cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise UnsupportedFormatError(f"{path}: unsupported DCIV version {version}")
    if min(slices, rows, cols) < 1:
        raise VolumeFormatError(f"{path}: empty volume {slices}x{rows}x{cols}")
    count = slices * rows * cols
    expected = _HEADER.size + 4 * count
    if len(raw) < expected:
        raise TruncatedPayloadError(
            f"{path}: truncated payload ({len(raw) - _HEADER.size} of {4 * count} bytes)"
        )
    if len(raw) > expected:
        raise VolumeFormatError(f"{path}: {len(raw) - expected} trailing bytes after payload")
    data = np.frombuffer(raw, dtype="<f4", count=count, offset=_HEADER.size)
    if not np.all(np.isfinite(data)):
        raise NonFiniteDataError(f"{path}: payload contains NaN or Inf")
    return data.astype(np.float64).reshape(slices, rows, cols)


def _pgm_tokens(raw: bytes, n: int) -> tuple[list[bytes], int]:
    """Read ``n`` whitespace-separated header tokens, skipping comments."""
    tokens, pos = [], 0
    while len(tokens) < n:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise TruncatedPayloadError("truncated PGM header")
        tokens.append(raw[start:pos])
    # exactly one whitespace byte separates the header from the samples
    return tokens, pos + 1


def read_pgm(path) -> np.ndarray:
    """Read a binary PGM as a ``(1, rows, cols)`` volume scaled to ``[0, 1]``."""
    raw = Path(path).read_bytes()
    return _parse_pgm(raw, path)


def _parse_pgm(raw: bytes, path) -> np.ndarray:
    if raw[:2] != b"P5":
        raise UnsupportedFormatError(f"{path}: only binary PGM (P5) is supported, got {raw[:2]!r}")
    try:
        (_, w, h, maxval), start = _pgm_tokens(raw, 4)
        cols, rows, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        if isinstance(exc, VolumeFormatError):
            raise
        raise UnsupportedFormatError(f"{path}: malformed PGM header") from exc
    if not 0 < maxval < 65536 or rows < 1 or cols < 1:
        raise UnsupportedFormatError(f"{path}: unsupported PGM maxval {maxval} or size {cols}x{rows}")
    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    count = rows * cols
    if len(raw) - start < count * dtype.itemsize:
        raise TruncatedPayloadError(f"{path}: truncated payload")
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=start)
    return (data.astype(np.float64) / maxval).reshape(1, rows, cols)


def read_volume(path) -> np.ndarray:
    """Read a DCIV volume (or a P5 PGM image) as a float64 ``(S, R, C)`` array."""
    raw = Path(path).read_bytes()
    if raw[:2] == b"P5":
        return _parse_pgm(raw, path)
    return _parse_dciv(raw, path)


def write_volume(path, volume) -> None:
    """Write ``volume`` as DCIV, atomically.

    The data go to a temporary file in the destination directory that is
    renamed over ``path`` only once fully written, so a failure never leaves
    a partial file behind. Values are stored as float32.
    """
    vol = np.asarray(volume, dtype=np.float64)
    if vol.ndim == 2:
        vol = vol[np.newaxis]
    if vol.ndim != 3 or min(vol.shape) < 1:
        raise ValueError(f"volume must have shape (slices, rows, cols), got {vol.shape}")
    data = vol.astype("<f4")
    if not np.all(np.isfinite(data)):
        raise NonFiniteDataError("volume contains NaN or Inf (or values beyond float32 range)")
    path = Path(path)
    header = _HEADER.pack(MAGIC, VERSION, *vol.shape)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(data.tobytes(order="C"))
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
