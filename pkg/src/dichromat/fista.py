"""FISTA with backtracking line search and step-size growth.

Minimizes ``F(x) + G(x)`` where ``F`` is smooth and ``G`` has a cheap
proximal operator. Each outer iteration first grows the previous step by
``s``; the inner loop then shrinks it by ``r`` until the local quadratic
upper bound on ``F`` holds. The momentum weight ``theta`` is recomputed for
every trial step because it depends on the step ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "SolverConfig",
    "SolveResult",
    "SolverError",
    "fista_solve",
    "next_theta",
    "prox_box",
    "box_indicator",
    "MAX_BACKTRACKS",
]

# hard cap on consecutive step shrinks inside one iteration
MAX_BACKTRACKS = 100


class SolverError(RuntimeError):
    """Raised when the iteration cannot continue (non-finite values, or a
    line search that never accepts, which signals an inconsistent
    gradient/objective pair)."""


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of :func:`fista_solve`.

    Attributes
    ----------
    max_iters : int
        Maximum number of outer iterations ``K``.
    t0 : float
        Initial step size.
    r : float
        Backtracking shrink factor in (0, 1).
    s : float
        Per-iteration step growth factor, > 1.
    tol : float
        Stop once ``|obj_k - obj_{k-1}| <= tol * |obj_k|``. The test is
        purely relative because the normalized objectives are typically far
        below one. Zero disables it and runs all ``max_iters`` iterations.
    """

    max_iters: int = 250
    t0: float = 1.0
    r: float = 0.9
    s: float = 1.25
    tol: float = 1e-8

    def __post_init__(self):
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters}")
        if not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")
        if not 0 < self.r < 1:
            raise ValueError(f"r must lie in (0, 1), got {self.r}")
        if not self.s > 1:
            raise ValueError(f"s must exceed 1, got {self.s}")
        if not self.tol >= 0:
            raise ValueError(f"tol must be non-negative, got {self.tol}")


@dataclass
class SolveResult:
    """Output of :func:`fista_solve`.

    ``minimizer`` is the lowest-objective point seen (the starting point
    included when it is feasible); ``last`` is the final iterate. The traces
    hold one entry per completed iteration.
    """

    minimizer: np.ndarray
    last: np.ndarray
    objective_trace: list[float] = field(default_factory=list)
    step_trace: list[float] = field(default_factory=list)
    iterations_used: int = 0
    backtracks: int = 0
    converged: bool = False


def next_theta(theta_prev: float, t_prev: float, t: float) -> float:
    """Positive root of ``t_prev * th**2 = t * theta_prev**2 * (1 - th)``.

    Evaluated as ``2c / (b + sqrt(b**2 + 4 a c))`` with ``a = t_prev`` and
    ``b = c = t * theta_prev**2``, which equals the textbook
    ``(-b + sqrt(b**2 + 4 a c)) / (2 a)`` but does not cancel when ``b``
    dominates.
    """
    b = t * theta_prev * theta_prev
    return 2.0 * b / (b + math.sqrt(b * b + 4.0 * t_prev * b))


def prox_box(x, t: float = 1.0, lower: float = 0.0, upper: float = 1.0) -> np.ndarray:
    """Euclidean projection onto ``[lower, upper]``; ``t`` has no effect."""
    return np.minimum(np.maximum(x, lower), upper)


def box_indicator(x, lower: float = 0.0, upper: float = 1.0) -> float:
    x = np.asarray(x)
    return 0.0 if np.all((x >= lower) & (x <= upper)) else math.inf


def _inner(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.vdot(a, b).real)


def fista_solve(
    grad_F: Callable[[np.ndarray], np.ndarray],
    eval_F: Callable[[np.ndarray], float],
    prox_G: Callable[[np.ndarray, float], np.ndarray],
    eval_G: Callable[[np.ndarray], float],
    x0,
    cfg: Optional[SolverConfig] = None,
    callback: Optional[Callable[[int, np.ndarray, np.ndarray, float], None]] = None,
) -> SolveResult:
    """Minimize ``F + G`` by FISTA with line search.

    Parameters
    ----------
    grad_F, eval_F : callable
        Gradient and value of the smooth term.
    prox_G, eval_G : callable
        ``prox_G(v, t)`` returns ``argmin_x G(x) + ||x - v||^2 / (2 t)``;
        ``eval_G`` returns the value of ``G`` (``inf`` outside its domain).
    x0 : array_like
        Starting point; any shape.
    cfg : SolverConfig, optional
    callback : callable, optional
        Called as ``callback(k, x, y, t)`` after every accepted step, with
        the new iterate ``x``, the extrapolated point ``y`` it was computed
        from, and the accepted step ``t``.

    Returns
    -------
    SolveResult

    Raises
    ------
    SolverError
        On non-finite gradients or objective values, or when the line search
        does not accept within ``MAX_BACKTRACKS`` shrinks.
    """
    cfg = cfg or SolverConfig()
    x_prev = np.array(x0, dtype=np.float64)
    if not np.all(np.isfinite(x_prev)):
        raise SolverError("starting point is not finite")
    v = x_prev.copy()
    t_prev = cfg.t0
    theta_prev = 1.0

    best_x = x_prev.copy()
    best_obj = eval_F(x_prev) + eval_G(x_prev)
    if not math.isfinite(best_obj):
        best_obj = math.inf

    result = SolveResult(minimizer=best_x, last=x_prev)
    prev_obj = None
    for k in range(1, cfg.max_iters + 1):
        t = cfg.s * t_prev
        for _ in range(MAX_BACKTRACKS + 1):
            theta = 1.0 if k == 1 else next_theta(theta_prev, t_prev, t)
            y = (1.0 - theta) * x_prev + theta * v
            gy = grad_F(y)
            Fy = eval_F(y)
            if not (math.isfinite(Fy) and np.all(np.isfinite(gy))):
                raise SolverError(f"non-finite objective or gradient at iteration {k}")
            x = prox_G(y - t * gy, t)
            Fx = eval_F(x)
            if not math.isfinite(Fx):
                raise SolverError(f"non-finite objective at iteration {k}")
            d = x - y
            if Fx <= Fy + _inner(gy, d) + _inner(d, d) / (2.0 * t):
                break
            t *= cfg.r
            result.backtracks += 1
        else:
            raise SolverError(
                f"line search did not accept a step after {MAX_BACKTRACKS} shrinks at "
                f"iteration {k}; grad_F is probably inconsistent with eval_F"
            )

        v = x_prev + (x - x_prev) / theta
        obj = Fx + eval_G(x)
        if callback is not None:
            callback(k, x, y, t)
        result.objective_trace.append(obj)
        result.step_trace.append(t)
        result.iterations_used = k
        if obj < best_obj:
            best_obj = obj
            best_x = x
        x_prev, t_prev, theta_prev = x, t, theta

        if prev_obj is not None and cfg.tol > 0:
            if abs(obj - prev_obj) <= cfg.tol * abs(obj):
                result.converged = True
                break
        prev_obj = obj

    result.minimizer = best_x
    result.last = x_prev
    return result
