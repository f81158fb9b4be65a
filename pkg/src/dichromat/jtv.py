"""Joint total variation (JTV) interpolation baseline, solved with PDHG.

Jointly estimates a denoised anatomical image ``I_A`` and an interpolated
metabolic image ``I_M`` (both on the anatomical grid) from

    1/(2 N_A) ||I_A - A||^2 + 1/(2 N_M) ||op(I_M) - M||^2
        + lam / N_A * sum_pixels |(grad I_A, grad I_M)|

where the last sum runs over the Euclidean lengths of the per-pixel
4-vectors obtained by concatenating both gradients.

Internally the objective is multiplied by ``N_A``; this leaves the minimizer
unchanged but keeps the problem well scaled for the default step sizes
``tau = sigma = 1/sqrt(8)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import as_image, gradient, gradient_adjoint
from .degradation import DegradationOperator, make_operator
from .resample import resample

__all__ = ["JtvProblem", "JtvResult", "jtv_norm", "jtv_objective", "jtv_solve", "GRADIENT_NORM_SQ"]

# squared operator norm bound of the forward-difference gradient in 2-D
GRADIENT_NORM_SQ = 8.0


@dataclass(frozen=True)
class JtvProblem:
    anatomical: np.ndarray
    metabolic: np.ndarray
    op: DegradationOperator
    lam: float

    def __post_init__(self):
        A = as_image(self.anatomical, "anatomical")
        M = as_image(self.metabolic, "metabolic")
        if self.op.hi_shape != A.shape or self.op.lo_shape != M.shape:
            raise ValueError(
                f"operator maps {self.op.hi_shape} -> {self.op.lo_shape}, "
                f"problem needs {A.shape} -> {M.shape}"
            )
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lam must be a non-negative number, got {self.lam}")
        object.__setattr__(self, "anatomical", A)
        object.__setattr__(self, "metabolic", M)

    @classmethod
    def build(cls, anatomical, metabolic, lam: float) -> "JtvProblem":
        A = as_image(anatomical, "anatomical")
        M = as_image(metabolic, "metabolic")
        return cls(A, M, make_operator(A.shape, M.shape), float(lam))

    @property
    def n_anatomical(self) -> int:
        return self.anatomical.size

    @property
    def n_metabolic(self) -> int:
        return self.metabolic.size


@dataclass
class JtvResult:
    anatomical_denoised: np.ndarray
    metabolic_interp: np.ndarray
    dual: np.ndarray = field(repr=False)
    residual_trace: list[float] = field(default_factory=list)
    iterations_used: int = 0


def jtv_norm(field4) -> float:
    """Sum over pixels of the length of the 4-component gradient vector.

    ``field4`` has shape ``(rows, cols, 4)``.
    """
    g = np.asarray(field4, dtype=np.float64)
    return float(np.sum(np.sqrt(np.sum(g * g, axis=-1))))


def _stacked_gradient(ia: np.ndarray, im: np.ndarray) -> np.ndarray:
    return np.concatenate([gradient(ia), gradient(im)], axis=-1)


def jtv_objective(p: JtvProblem, anatomical_est, metabolic_est) -> float:
    """Value of the JTV objective (in its original scaling)."""
    ia = np.asarray(anatomical_est, dtype=np.float64)
    im = np.asarray(metabolic_est, dtype=np.float64)
    ra = ia - p.anatomical
    rm = p.op.apply(im) - p.metabolic
    return (
        float(np.sum(ra * ra)) / (2 * p.n_anatomical)
        + float(np.sum(rm * rm)) / (2 * p.n_metabolic)
        + p.lam / p.n_anatomical * jtv_norm(_stacked_gradient(ia, im))
    )


def _project_balls(y: np.ndarray, radius: float) -> np.ndarray:
    mag = np.sqrt(np.sum(y * y, axis=-1, keepdims=True))
    return y / np.maximum(1.0, mag / radius) if radius > 0 else np.zeros_like(y)


class _MetabolicProx:
    """Solves ``(I + c op^T op) u = rhs``.

    For integer reduction factors ``op^T op`` is ``P / (fr fc)`` with ``P``
    the projection onto block-constant images, so the inverse only rescales
    the block means. Other factors use the eigenbasis of the separable
    operator.
    """

    def __init__(self, op: DegradationOperator, c: float):
        (hr, hc), (lr, lc) = op.hi_shape, op.lo_shape
        self.blocks = None
        if hr % lr == 0 and hc % lc == 0:
            fr, fc = hr // lr, hc // lc
            self.blocks = (lr, fr, lc, fc)
            self.shrink = (c / (fr * fc)) / (1.0 + c / (fr * fc))
        else:
            lam_r, self.q_r, lam_c, self.q_c = op.normal_eig()
            self.denom = 1.0 + c * lam_r[:, None] * lam_c[None, :]

    def __call__(self, rhs: np.ndarray) -> np.ndarray:
        if self.blocks is not None:
            lr, fr, lc, fc = self.blocks
            means = rhs.reshape(lr, fr, lc, fc).mean(axis=(1, 3), keepdims=True)
            return (rhs.reshape(lr, fr, lc, fc) - self.shrink * means).reshape(rhs.shape)
        coeff = self.q_r.T @ rhs @ self.q_c
        return self.q_r @ (coeff / self.denom) @ self.q_c.T


def jtv_solve(
    p: JtvProblem,
    iters: int = 1000,
    tau: float = 1 / math.sqrt(GRADIENT_NORM_SQ),
    sigma: float = 1 / math.sqrt(GRADIENT_NORM_SQ),
    tol: float = 0.0,
    callback: Optional[Callable[[int, np.ndarray, np.ndarray, np.ndarray], None]] = None,
) -> JtvResult:
    """Approximate the JTV minimizer with plain (non-relaxed) PDHG.

    Parameters
    ----------
    p : JtvProblem
    iters : int
        Number of primal-dual iterations.
    tau, sigma : float
        Primal and dual steps; ``tau * sigma * 8 <= 1`` is required.
    tol : float
        Optional early exit once the RMS primal-dual residual drops below it.
    callback : callable, optional
        ``callback(k, I_A, I_M, dual)`` after each iteration; ``dual`` is in
        the original scaling, so its per-pixel length is at most
        ``lam / N_A``.

    Returns
    -------
    JtvResult
        Estimates are not clipped to any range.
    """
    if not (tau > 0 and sigma > 0):
        raise ValueError("tau and sigma must be positive")
    if tau * sigma * GRADIENT_NORM_SQ > 1.0 + 1e-12:
        raise ValueError(f"step sizes violate tau*sigma*||K||^2 <= 1 (tau={tau}, sigma={sigma})")
    if iters < 1:
        raise ValueError("iters must be positive")

    A, M, op, lam = p.anatomical, p.metabolic, p.op, p.lam
    n_a = p.n_anatomical
    c = n_a / p.n_metabolic
    prox_m = _MetabolicProx(op, tau * c)
    op_t_m = tau * c * op.adjoint(M)

    ia = A.copy()
    im = resample(M, A.shape, "bilinear")
    ia_bar, im_bar = ia, im
    y = np.zeros(A.shape + (4,))
    result = JtvResult(ia, im, y / n_a)

    for k in range(1, iters + 1):
        y_prev = y
        y = _project_balls(y + sigma * _stacked_gradient(ia_bar, im_bar), lam)

        ia_prev, im_prev = ia, im
        va = ia - tau * gradient_adjoint(y[..., :2])
        vm = im - tau * gradient_adjoint(y[..., 2:])
        ia = (va + tau * A) / (1.0 + tau)
        im = prox_m(vm + op_t_m)
        if not (np.all(np.isfinite(ia)) and np.all(np.isfinite(im))):
            raise FloatingPointError(f"non-finite PDHG iterate at iteration {k}")

        # saddle-point optimality residuals of the dual-then-primal update order
        res_p = (np.sum((ia_prev - ia) ** 2) + np.sum((im_prev - im) ** 2)) / tau ** 2
        res_d = (y_prev - y) / sigma + _stacked_gradient(ia_bar - ia, im_bar - im)
        residual = math.sqrt((res_p + np.sum(res_d ** 2)) / n_a)

        ia_bar = 2.0 * ia - ia_prev
        im_bar = 2.0 * im - im_prev
        result.residual_trace.append(residual)
        result.iterations_used = k
        if callback is not None:
            callback(k, ia, im, y / n_a)
        if tol > 0 and residual <= tol:
            break

    result.anatomical_denoised = ia
    result.metabolic_interp = im
    result.dual = y / n_a
    return result
