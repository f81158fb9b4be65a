"""Image containers, finite-difference operators and norms.

Images are plain 2-D ``float64`` numpy arrays, gradient fields are arrays of
shape ``(rows, cols, 2)`` holding the horizontal component in ``[..., 0]``
and the vertical component in ``[..., 1]``, and volumes are 3-D arrays of
shape ``(slices, rows, cols)``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_image",
    "as_volume",
    "normalize",
    "gradient",
    "gradient_adjoint",
    "weighted_l2_norm",
    "frobenius_norm",
]


def as_image(img, name: str = "image") -> np.ndarray:
    """Validate ``img`` as a finite 2-D float array and return it as float64."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def as_volume(vol, name: str = "volume") -> np.ndarray:
    """Validate ``vol`` as a finite stack of equally sized slices.

    A single 2-D image is promoted to a one-slice volume.
    """
    arr = np.asarray(vol, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[np.newaxis]
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise ValueError(f"{name} must have shape (slices, rows, cols), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def normalize(img) -> tuple[np.ndarray, float]:
    """Scale an image so that its maximum is one.

    Returns
    -------
    scaled : ndarray
        ``img / max(img)``. When the maximum is not positive there is no
        signal to scale and the image is returned unchanged.
    peak : float
        ``max(img)``.
    """
    arr = as_image(img)
    peak = float(arr.max())
    if peak > 0:
        return arr / peak, peak
    return arr.copy(), peak


def gradient(img) -> np.ndarray:
    """Forward-difference gradient with a zero difference at the trailing edge."""
    arr = np.asarray(img, dtype=np.float64)
    g = np.zeros(arr.shape + (2,))
    g[:, :-1, 0] = arr[:, 1:] - arr[:, :-1]
    g[:-1, :, 1] = arr[1:, :] - arr[:-1, :]
    return g


def gradient_adjoint(field) -> np.ndarray:
    """Adjoint of :func:`gradient` (a negative divergence)."""
    g = np.asarray(field, dtype=np.float64)
    if g.ndim != 3 or g.shape[2] != 2:
        raise ValueError(f"gradient field must have shape (rows, cols, 2), got {g.shape}")
    gx = g[..., 0]
    gy = g[..., 1]
    out = np.zeros(g.shape[:2])
    # only entries that gradient() can populate take part in the transpose
    out[:, :-1] -= gx[:, :-1]
    out[:, 1:] += gx[:, :-1]
    out[:-1, :] -= gy[:-1, :]
    out[1:, :] += gy[:-1, :]
    return out


def weighted_l2_norm(x, w) -> float:
    """Return ``sqrt(sum(w * x**2))``.

    ``w`` may have one dimension fewer than ``x``; it is then shared by every
    component along the last axis of ``x`` (e.g. both gradient components of
    a pixel get the same weight).
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    if w.shape == x.shape:
        pass
    elif w.ndim == x.ndim - 1 and w.shape == x.shape[:-1]:
        w = w[..., np.newaxis]
    else:
        raise ValueError(f"weight shape {w.shape} does not match data shape {x.shape}")
    return float(np.sqrt(np.sum(w * x * x)))


def frobenius_norm(img) -> float:
    """Square root of the sum of squared entries."""
    arr = np.asarray(img, dtype=np.float64)
    return float(np.sqrt(np.sum(arr * arr)))
