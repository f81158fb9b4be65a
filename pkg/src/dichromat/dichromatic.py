"""Anatomy-guided (di-chromatic) interpolation.

A low-resolution metabolic image ``M`` is interpolated onto the grid of a
co-registered anatomical image ``A`` by solving

    minimize    1/(2 N_M) ||op(I) - M||_F^2 + lam/(2 N_A) ||grad I - grad A||_{w,2}^2
    subject to  0 <= I <= 1

where ``op`` is the area-average degradation operator, ``w`` is the metabolic
image bilinearly upsampled to the anatomical grid, and ``N_A``/``N_M`` are the
pixel counts of the two grids. The weighted gradient term only pulls ``I``
towards the anatomical edges where the metabolite is actually present.

Because anatomical contrast may be inverted relative to the metabolite, a
volume is interpolated twice, once against ``A`` and once against ``1 - A``,
and the result whose contrast is closer to the upsampled input is kept.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import as_image, as_volume, gradient, gradient_adjoint, normalize, weighted_l2_norm
from .degradation import DegradationOperator, make_operator
from .fista import SolveResult, SolverConfig, box_indicator, fista_solve, prox_box
from .resample import resample, weight_map

__all__ = [
    "DichromaticProblem",
    "PolarityChoice",
    "objective",
    "objective_gradient",
    "data_term",
    "gradient_mismatch",
    "warm_start",
    "solve_problem",
    "solve_slice",
    "polarity_score",
    "select_polarity",
    "interpolate_volume",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DichromaticProblem:
    """One slice of the interpolation problem.

    ``anatomical`` and ``weights`` live on the fine grid, ``metabolic`` on the
    coarse grid, and ``op`` maps the former onto the latter.
    """

    anatomical: np.ndarray
    metabolic: np.ndarray
    weights: np.ndarray
    op: DegradationOperator
    lam: float
    anatomical_gradient: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = as_image(self.anatomical, "anatomical")
        M = as_image(self.metabolic, "metabolic")
        w = as_image(self.weights, "weights")
        if w.shape != A.shape:
            raise ValueError(f"weights shape {w.shape} differs from anatomical shape {A.shape}")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if self.op.hi_shape != A.shape or self.op.lo_shape != M.shape:
            raise ValueError(
                f"operator maps {self.op.hi_shape} -> {self.op.lo_shape}, "
                f"problem needs {A.shape} -> {M.shape}"
            )
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lam must be a non-negative number, got {self.lam}")
        object.__setattr__(self, "anatomical", A)
        object.__setattr__(self, "metabolic", M)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "anatomical_gradient", gradient(A))

    @classmethod
    def build(cls, anatomical, metabolic, lam: float, weights=None) -> "DichromaticProblem":
        """Assemble a problem from normalized images, deriving the operator
        and (unless given) the weight map."""
        A = as_image(anatomical, "anatomical")
        M = as_image(metabolic, "metabolic")
        if weights is None:
            weights = weight_map(M, A.shape)
        return cls(A, M, weights, make_operator(A.shape, M.shape), float(lam))

    @property
    def n_anatomical(self) -> int:
        return self.anatomical.size

    @property
    def n_metabolic(self) -> int:
        return self.metabolic.size

    @property
    def shape(self) -> tuple[int, int]:
        return self.anatomical.shape

    def _check(self, image) -> np.ndarray:
        image = np.asarray(image, dtype=np.float64)
        if image.shape != self.shape:
            raise ValueError(f"expected image of shape {self.shape}, got {image.shape}")
        return image


def data_term(p: DichromaticProblem, image) -> float:
    """``||op(I) - M||_F^2 / (2 N_M)``."""
    r = p.op.apply(p._check(image)) - p.metabolic
    return float(np.sum(r * r)) / (2.0 * p.n_metabolic)


def gradient_mismatch(p: DichromaticProblem, image) -> float:
    """Squared weighted norm ``||grad I - grad A||_{w,2}^2`` (no ``lam`` or ``N_A``)."""
    diff = gradient(p._check(image)) - p.anatomical_gradient
    return weighted_l2_norm(diff, p.weights) ** 2


def objective(p: DichromaticProblem, image) -> float:
    """Smooth part of the objective; the box constraint is not included."""
    image = p._check(image)
    return data_term(p, image) + p.lam / (2.0 * p.n_anatomical) * gradient_mismatch(p, image)


def objective_gradient(p: DichromaticProblem, image) -> np.ndarray:
    image = p._check(image)
    residual = p.op.apply(image) - p.metabolic
    g = p.op.adjoint(residual) / p.n_metabolic
    if p.lam:
        diff = gradient(image) - p.anatomical_gradient
        g += (p.lam / p.n_anatomical) * gradient_adjoint(p.weights[..., None] * diff)
    return g


def warm_start(metabolic, out_shape) -> np.ndarray:
    """Bilinear upsample of the metabolic image, clipped into the feasible box."""
    return prox_box(resample(metabolic, out_shape, "bilinear"))


def solve_problem(
    p: DichromaticProblem,
    cfg: Optional[SolverConfig] = None,
    x0=None,
    callback: Optional[Callable] = None,
) -> SolveResult:
    """Run FISTA on ``p`` and return the full :class:`SolveResult`."""
    if x0 is None:
        x0 = warm_start(p.metabolic, p.shape)
    x0 = p._check(x0)
    return fista_solve(
        grad_F=lambda x: objective_gradient(p, x),
        eval_F=lambda x: objective(p, x),
        prox_G=prox_box,
        eval_G=box_indicator,
        x0=x0,
        cfg=cfg,
        callback=callback,
    )


def solve_slice(A_norm, M_norm, w, lam: float, cfg: Optional[SolverConfig] = None, x0=None,
                callback: Optional[Callable] = None) -> np.ndarray:
    """Interpolate one normalized slice; the result lies in ``[0, 1]``."""
    p = DichromaticProblem.build(A_norm, M_norm, lam, weights=w)
    return solve_problem(p, cfg, x0, callback).minimizer


@dataclass(frozen=True)
class PolarityChoice:
    """Outcome of the contrast-polarity test.

    A score is ``inf`` when its branch was not computed (forced polarity).
    """

    tag: str
    score_positive: float
    score_negative: float


def polarity_score(weights_volume, candidate) -> float:
    """Weighted distance between the rescaled weight volume and a candidate,
    using the weight volume itself as the weights."""
    Vw = np.asarray(weights_volume, dtype=np.float64)
    return weighted_l2_norm(Vw - candidate, Vw)


def select_polarity(weights_volume, positive_volume, negative_volume) -> PolarityChoice:
    """Keep the candidate closest to the weight volume; ties go to positive."""
    sp = polarity_score(weights_volume, positive_volume)
    sn = polarity_score(weights_volume, negative_volume)
    return PolarityChoice("positive" if sp <= sn else "negative", sp, sn)


def _interpolate_slice(A_hat, M_hat, lam, cfg, branches, callback):
    A, _ = normalize(A_hat)
    M, peak = normalize(M_hat)
    zeros = np.zeros(A.shape)
    if peak <= 0:
        # no metabolite signal anywhere in this slice
        return {b: zeros for b in branches}, zeros
    w = weight_map(M, A.shape)
    op = make_operator(A.shape, M.shape)
    x0 = warm_start(M, A.shape)
    out = {}
    for branch in branches:
        ref = A if branch == "positive" else 1.0 - A
        p = DichromaticProblem(ref, M, w, op, lam)
        res = solve_problem(p, cfg, x0, callback)
        out[branch] = res.minimizer * peak
    return out, w * peak


def interpolate_volume(
    V_A,
    V_M,
    lam: float,
    cfg: Optional[SolverConfig] = None,
    polarity: str = "auto",
    workers: int = 1,
    callback: Optional[Callable] = None,
) -> tuple[np.ndarray, PolarityChoice, np.ndarray]:
    """Interpolate every slice of ``V_M`` onto the grid of ``V_A``.

    Parameters
    ----------
    V_A, V_M : array_like
        Anatomical ``(S, rows_A, cols_A)`` and metabolic ``(S, rows_M,
        cols_M)`` volumes in their original intensity units. A 2-D input is
        treated as a single slice. Each slice is normalized independently.
    lam : float
        Regularization weight, shared by all slices.
    cfg : SolverConfig, optional
    polarity : {"auto", "positive", "negative"}
        ``"auto"`` solves both branches and selects one; otherwise only the
        requested branch is solved.
    workers : int
        Number of slices solved concurrently.
    callback : callable, optional
        Forwarded to :func:`~dichromat.fista.fista_solve` for every solve.

    Returns
    -------
    V_I : ndarray
        Interpolated volume in the metabolic intensity units.
    choice : PolarityChoice
    V_w : ndarray
        Weight maps rescaled to the metabolic intensity units.
    """
    V_A = as_volume(V_A, "anatomical volume")
    V_M = as_volume(V_M, "metabolic volume")
    if V_A.shape[0] != V_M.shape[0]:
        raise ValueError(f"slice count mismatch: {V_A.shape[0]} anatomical vs {V_M.shape[0]} metabolic")
    if V_M.shape[1] > V_A.shape[1] or V_M.shape[2] > V_A.shape[2]:
        raise ValueError(f"metabolic slices {V_M.shape[1:]} are larger than anatomical slices {V_A.shape[1:]}")
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if polarity not in ("auto", "positive", "negative"):
        raise ValueError(f"unknown polarity {polarity!r}")
    branches = ("positive", "negative") if polarity == "auto" else (polarity,)

    def work(i):
        return _interpolate_slice(V_A[i], V_M[i], lam, cfg, branches, callback)

    if workers > 1 and V_A.shape[0] > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, range(V_A.shape[0])))
    else:
        results = [work(i) for i in range(V_A.shape[0])]

    V_w = np.stack([r[1] for r in results])
    candidates = {b: np.stack([r[0][b] for r in results]) for b in branches}
    if polarity == "auto":
        choice = select_polarity(V_w, candidates["positive"], candidates["negative"])
    elif polarity == "positive":
        choice = PolarityChoice("positive", polarity_score(V_w, candidates["positive"]), math.inf)
    else:
        choice = PolarityChoice("negative", math.inf, polarity_score(V_w, candidates["negative"]))
    log.info("polarity %s selected (scores: positive=%.6g, negative=%.6g)",
             choice.tag, choice.score_positive, choice.score_negative)
    return candidates[choice.tag], choice, V_w
