"""Anatomy-guided interpolation of low-resolution metabolic images.

The main entry point is :func:`interpolate_volume`, which upsamples each
slice of a metabolic volume onto the grid of a co-registered anatomical
volume. Classical interpolators, a joint total variation baseline and a
Shepp-Logan phantom benchmark are provided for comparison.
"""

from .core import frobenius_norm, gradient, gradient_adjoint, normalize, weighted_l2_norm
from .degradation import DegradationOperator, area_weights, make_operator
from .dichromatic import (
    DichromaticProblem,
    PolarityChoice,
    interpolate_volume,
    objective,
    objective_gradient,
    select_polarity,
    solve_slice,
)
from .fista import SolveResult, SolverConfig, SolverError, fista_solve, prox_box
from .jtv import JtvProblem, JtvResult, jtv_objective, jtv_solve
from .phantom import (
    BenchReport,
    PhantomSpec,
    Tumor,
    default_spec,
    make_phantom_pair,
    relative_error,
    run_benchmark,
    shepp_logan,
)
from .resample import ResampleMethod, resample, weight_map
from .volume_io import VolumeFormatError, read_volume, write_volume

__version__ = "0.1.0"

__all__ = [
    "BenchReport",
    "DegradationOperator",
    "DichromaticProblem",
    "JtvProblem",
    "JtvResult",
    "PhantomSpec",
    "PolarityChoice",
    "ResampleMethod",
    "SolveResult",
    "SolverConfig",
    "SolverError",
    "Tumor",
    "VolumeFormatError",
    "area_weights",
    "default_spec",
    "fista_solve",
    "frobenius_norm",
    "gradient",
    "gradient_adjoint",
    "interpolate_volume",
    "jtv_objective",
    "jtv_solve",
    "make_operator",
    "make_phantom_pair",
    "normalize",
    "objective",
    "objective_gradient",
    "prox_box",
    "read_volume",
    "relative_error",
    "resample",
    "run_benchmark",
    "select_polarity",
    "shepp_logan",
    "solve_slice",
    "weight_map",
    "weighted_l2_norm",
    "write_volume",
]
