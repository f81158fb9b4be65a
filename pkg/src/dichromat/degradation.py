"""Area-average degradation operator (blur followed by decimation).

The forward model maps a high-resolution image onto a coarser grid where each
coarse pixel is the mean intensity of the fine image over its footprint.
Footprints may cover fractional fine pixels, so arbitrary (non-integer)
resolution ratios are handled exactly. For integer ratios this is plain
block averaging.

The blur and the decimation are fused into one separable operator: along
each axis a ``(lo, hi)`` matrix of overlap fractions is stored, and the 2-D
operator is ``rows @ image @ cols.T``. Measurement noise is not part of the
operator; see :mod:`dichromat.phantom` for noise injection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["DegradationOperator", "make_operator", "area_weights"]


def area_weights(n_hi: int, n_lo: int) -> np.ndarray:
    """Return the ``(n_lo, n_hi)`` matrix of 1-D footprint overlap fractions.

    Coarse pixel ``i`` covers ``[i * n_hi / n_lo, (i + 1) * n_hi / n_lo)`` in
    units of fine pixels. Entry ``(i, j)`` is the length of its overlap with
    fine pixel ``[j, j + 1)`` divided by the footprint length, so every row
    sums to one.
    """
    if n_lo < 1 or n_hi < n_lo:
        raise ValueError(f"need 1 <= n_lo <= n_hi, got n_lo={n_lo}, n_hi={n_hi}")
    weights = np.zeros((n_lo, n_hi))
    if n_hi % n_lo == 0:
        f = n_hi // n_lo
        for i in range(n_lo):
            weights[i, i * f:(i + 1) * f] = 1.0 / f
        return weights
    # work in units of 1/n_lo fine pixels so the breakpoints are integers
    for i in range(n_lo):
        start, stop = i * n_hi, (i + 1) * n_hi
        for j in range(start // n_lo, min(n_hi, -(-stop // n_lo))):
            overlap = min(stop, (j + 1) * n_lo) - max(start, j * n_lo)
            if overlap > 0:
                weights[i, j] = overlap / n_hi
    return weights


@dataclass(frozen=True)
class DegradationOperator:
    """Linear map from a ``hi_shape`` grid to a ``lo_shape`` grid.

    Use :func:`make_operator` to build one.
    """

    hi_shape: tuple[int, int]
    lo_shape: tuple[int, int]
    row_weights: np.ndarray = field(repr=False)
    col_weights: np.ndarray = field(repr=False)

    @property
    def is_identity(self) -> bool:
        return self.hi_shape == self.lo_shape

    def apply(self, hi) -> np.ndarray:
        hi = np.asarray(hi, dtype=np.float64)
        if hi.shape != self.hi_shape:
            raise ValueError(f"expected input of shape {self.hi_shape}, got {hi.shape}")
        if self.is_identity:
            return hi.copy()
        return self.row_weights @ hi @ self.col_weights.T

    def adjoint(self, lo) -> np.ndarray:
        lo = np.asarray(lo, dtype=np.float64)
        if lo.shape != self.lo_shape:
            raise ValueError(f"expected input of shape {self.lo_shape}, got {lo.shape}")
        if self.is_identity:
            return lo.copy()
        return self.row_weights.T @ lo @ self.col_weights

    def normal_eig(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Eigen-decompositions of ``R.T @ R`` and ``C.T @ C``.

        ``adjoint(apply(x))`` equals ``Qr @ (lam_r[:, None] * lam_c[None, :] *
        (Qr.T @ x @ Qc)) @ Qc.T``; this is what makes the normal equations of
        the operator solvable in closed form.
        """
        lam_r, q_r = np.linalg.eigh(self.row_weights.T @ self.row_weights)
        lam_c, q_c = np.linalg.eigh(self.col_weights.T @ self.col_weights)
        return np.clip(lam_r, 0, None), q_r, np.clip(lam_c, 0, None), q_c


def make_operator(hi_shape, lo_shape) -> DegradationOperator:
    """Build the area-average operator taking ``hi_shape`` images to ``lo_shape``.

    Raises
    ------
    ValueError
        If a dimension is non-positive or the target grid is finer than the
        source grid along either axis.
    """
    hi_shape = tuple(int(n) for n in hi_shape)
    lo_shape = tuple(int(n) for n in lo_shape)
    if len(hi_shape) != 2 or len(lo_shape) != 2:
        raise ValueError("shapes must be (rows, cols)")
    if min(hi_shape + lo_shape) < 1:
        raise ValueError("shapes must be positive")
    if lo_shape[0] > hi_shape[0] or lo_shape[1] > hi_shape[1]:
        raise ValueError(f"low-resolution shape {lo_shape} exceeds high-resolution shape {hi_shape}")
    return DegradationOperator(
        hi_shape=hi_shape,
        lo_shape=lo_shape,
        row_weights=area_weights(hi_shape[0], lo_shape[0]),
        col_weights=area_weights(hi_shape[1], lo_shape[1]),
    )
