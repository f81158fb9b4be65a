"""Classical interpolators: nearest neighbour, bilinear and sinc (zero-fill).

Both grids use centre-aligned pixel coordinates: pixel ``i`` of an ``n``-pixel
axis sits at ``(i + 0.5) / n`` of the field of view. Bilinear interpolation
replicates the edge value outside the outermost pixel centres.
"""

from __future__ import annotations

import enum

import numpy as np

from .core import as_image

__all__ = ["ResampleMethod", "resample", "weight_map"]


class ResampleMethod(str, enum.Enum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"
    SINC_ZEROFILL = "sinc_zerofill"


def _check_shape(out_shape) -> tuple[int, int]:
    out_shape = tuple(int(n) for n in out_shape)
    if len(out_shape) != 2 or min(out_shape) < 1:
        raise ValueError(f"output shape must be two positive integers, got {out_shape}")
    return out_shape


def _nearest_index(n_in: int, n_out: int) -> np.ndarray:
    idx = np.floor((np.arange(n_out) + 0.5) * n_in / n_out).astype(int)
    return np.clip(idx, 0, n_in - 1)


def _lerp_axis(arr: np.ndarray, n_out: int, axis: int) -> np.ndarray:
    n_in = arr.shape[axis]
    if n_in == n_out:
        return arr
    pos = (np.arange(n_out) + 0.5) * n_in / n_out - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, n_in - 1)
    shape = [1, 1]
    shape[axis] = n_out
    frac = (pos - lo).reshape(shape)
    a = np.take(arr, lo, axis=axis)
    b = np.take(arr, hi, axis=axis)
    return a + frac * (b - a)


def _resize_spectrum(spec: np.ndarray, m: int, axis: int) -> np.ndarray:
    """Zero-pad or crop an unshifted DFT along ``axis`` to length ``m``.

    An even-length Nyquist bin is split evenly between the two bins it maps
    to when padding, and the two bins folding onto it are summed when
    cropping.
    """
    n = spec.shape[axis]
    if m == n:
        return spec
    spec = np.moveaxis(spec, axis, 0)
    out = np.zeros((m,) + spec.shape[1:], dtype=complex)
    small = min(n, m)
    # frequencies strictly inside the smaller band pass through unchanged
    keep = (small - 1) // 2
    out[: keep + 1] = spec[: keep + 1]
    if keep:
        out[-keep:] = spec[-keep:]
    if small % 2 == 0:
        half = small // 2
        if m > n:
            out[half] += 0.5 * spec[half]
            out[m - half] += 0.5 * spec[half]
        else:
            out[half] = spec[half] + spec[n - half]
    return np.moveaxis(out, 0, axis)


def _sinc_zerofill(img: np.ndarray, out_shape: tuple[int, int]) -> np.ndarray:
    spec = np.fft.fft2(img)
    spec = _resize_spectrum(spec, out_shape[0], 0)
    spec = _resize_spectrum(spec, out_shape[1], 1)
    scale = (out_shape[0] * out_shape[1]) / img.size
    return np.real(np.fft.ifft2(spec)) * scale


def resample(img, out_shape, method="bilinear") -> np.ndarray:
    """Resample ``img`` onto an ``out_shape`` grid.

    Parameters
    ----------
    img : array_like
        2-D image.
    out_shape : (int, int)
        Target ``(rows, cols)``; may be larger or smaller than the input.
    method : ResampleMethod or str
        ``"nearest"``, ``"bilinear"`` or ``"sinc_zerofill"``. The sinc result
        is not clipped, so ringing may produce values outside the input range.
    """
    img = as_image(img)
    out_shape = _check_shape(out_shape)
    method = ResampleMethod(method)
    if method is ResampleMethod.NEAREST:
        ri = _nearest_index(img.shape[0], out_shape[0])
        ci = _nearest_index(img.shape[1], out_shape[1])
        return img[np.ix_(ri, ci)]
    if method is ResampleMethod.BILINEAR:
        out = _lerp_axis(_lerp_axis(img, out_shape[0], 0), out_shape[1], 1)
        # guards against last-bit overshoot of the convex combinations
        return np.clip(out, img.min(), img.max())
    if out_shape == img.shape:
        return np.real(np.fft.ifft2(np.fft.fft2(img)))
    return _sinc_zerofill(img, out_shape)


def weight_map(metabolic, anatomical_shape) -> np.ndarray:
    """Per-pixel gradient-matching weights on the anatomical grid.

    Bilinear upsampling of the (normalized) metabolic image, clipped below at
    zero so it is usable as a weight.
    """
    return np.maximum(resample(metabolic, anatomical_shape, ResampleMethod.BILINEAR), 0.0)
