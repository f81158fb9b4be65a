"""Numerical phantom: Shepp-Logan anatomy with synthetic metabolic tumours.

The anatomy is the modified (high-contrast) Shepp-Logan head phantom. The
metabolic ground truth contains only the tumours, on a zero background; its
low-resolution version is produced with the area-average degradation
operator. Geometry is described in normalized coordinates, ``x`` to the
right and ``y`` up, both in ``[-1, 1]``, so a phantom description renders at
any grid size.

The default four-tumour layout ships as ``data/phantom_v1.json``.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from .core import frobenius_norm
from .degradation import make_operator
from .dichromatic import interpolate_volume
from .fista import SolverConfig
from .jtv import JtvProblem, jtv_solve
from .resample import resample

__all__ = [
    "SHEPP_LOGAN_ELLIPSES",
    "Tumor",
    "PhantomSpec",
    "BenchReport",
    "shepp_logan",
    "render_tumors",
    "make_phantom_pair",
    "relative_error",
    "run_benchmark",
    "default_spec",
    "BENCH_METHODS",
]

# intensity, semi-axis a (x), semi-axis b (y), centre x, centre y, angle (deg)
SHEPP_LOGAN_ELLIPSES = np.array([
    [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0],
    [-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0],
    [-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0],
    [0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0],
    [0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0],
    [0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0],
    [0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0],
    [0.1, 0.0230, 0.0230, 0.0, -0.605, 0.0],
    [0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0],
])

BENCH_METHODS = ("nearest", "bilinear", "sinc", "jtv", "dichromatic")


def _grid(shape) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = shape
    x = -1.0 + (2.0 * np.arange(cols) + 1.0) / cols
    y = 1.0 - (2.0 * np.arange(rows) + 1.0) / rows
    return np.meshgrid(x, y)


def _inside_ellipse(X, Y, a, b, x0, y0, angle_deg) -> np.ndarray:
    phi = math.radians(angle_deg)
    c, s = math.cos(phi), math.sin(phi)
    dx, dy = X - x0, Y - y0
    u = dx * c + dy * s
    v = -dx * s + dy * c
    return (u / a) ** 2 + (v / b) ** 2 <= 1.0


def shepp_logan(shape, ellipses: Optional[Sequence[int]] = None) -> np.ndarray:
    """Render the modified Shepp-Logan phantom on a ``shape`` grid.

    ``ellipses`` optionally selects a subset of rows of
    :data:`SHEPP_LOGAN_ELLIPSES`. Values are clipped to ``[0, 1]``.
    """
    shape = tuple(int(n) for n in shape)
    if len(shape) != 2 or min(shape) < 32:
        raise ValueError(f"phantom needs at least 32x32 pixels, got {shape}")
    X, Y = _grid(shape)
    img = np.zeros(shape)
    table = SHEPP_LOGAN_ELLIPSES if ellipses is None else SHEPP_LOGAN_ELLIPSES[list(ellipses)]
    for value, a, b, x0, y0, ang in table:
        img[_inside_ellipse(X, Y, a, b, x0, y0, ang)] += value
    return np.clip(img, 0.0, 1.0)


@dataclass(frozen=True)
class Tumor:
    """One synthetic tumour.

    ``shape`` is a dict with ``type`` one of

    * ``"disc"``: ``center``, ``radius``
    * ``"ellipse"``: ``center``, ``axes`` (a, b), ``angle`` in degrees
    * ``"polygon"``: ``vertices`` (list of ``[x, y]``)

    and optional ``clip_to_ellipse`` / ``exclude_ellipse`` indices into the
    Shepp-Logan table that restrict the tumour to the inside / outside of
    that ellipse, so part of its outline follows an anatomical boundary.

    ``pattern`` is ``{"type": "homogeneous", "value": v}`` or
    ``{"type": "heterogeneous", "value": v, "inner": {"center": ...,
    "radius": ..., "value": v2}}``: a two-level tumour whose core has a
    different intensity.
    """

    label: str
    shape: dict
    pattern: dict
    alignment: str = "interior"

    def __post_init__(self):
        if self.shape.get("type") not in ("disc", "ellipse", "polygon"):
            raise ValueError(f"unknown tumour shape {self.shape.get('type')!r}")
        if self.pattern.get("type") not in ("homogeneous", "heterogeneous"):
            raise ValueError(f"unknown intensity pattern {self.pattern.get('type')!r}")
        if self.alignment not in ("edge-aligned", "mismatched", "interior"):
            raise ValueError(f"unknown alignment {self.alignment!r}")

    def mask(self, shape) -> np.ndarray:
        X, Y = _grid(shape)
        sh = self.shape
        if sh["type"] == "disc":
            cx, cy = sh["center"]
            m = (X - cx) ** 2 + (Y - cy) ** 2 <= sh["radius"] ** 2
        elif sh["type"] == "ellipse":
            (cx, cy), (a, b) = sh["center"], sh["axes"]
            m = _inside_ellipse(X, Y, a, b, cx, cy, sh.get("angle", 0.0))
        else:
            m = _inside_polygon(X, Y, np.asarray(sh["vertices"], dtype=float))
        if "clip_to_ellipse" in sh:
            _, a, b, x0, y0, ang = SHEPP_LOGAN_ELLIPSES[sh["clip_to_ellipse"]]
            m &= _inside_ellipse(X, Y, a, b, x0, y0, ang)
        if "exclude_ellipse" in sh:
            _, a, b, x0, y0, ang = SHEPP_LOGAN_ELLIPSES[sh["exclude_ellipse"]]
            m &= ~_inside_ellipse(X, Y, a, b, x0, y0, ang)
        return m

    def render(self, shape) -> np.ndarray:
        m = self.mask(shape)
        img = np.where(m, float(self.pattern["value"]), 0.0)
        if self.pattern["type"] == "heterogeneous":
            inner = self.pattern["inner"]
            X, Y = _grid(shape)
            cx, cy = inner["center"]
            core = m & ((X - cx) ** 2 + (Y - cy) ** 2 <= inner["radius"] ** 2)
            img[core] = float(inner["value"])
        return img


def _inside_polygon(X, Y, verts: np.ndarray) -> np.ndarray:
    # even-odd ray casting
    inside = np.zeros(X.shape, dtype=bool)
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        crosses = (y1 > Y) != (y2 > Y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (Y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (X < xint)
    return inside


@dataclass(frozen=True)
class PhantomSpec:
    """Phantom description.

    ``anatomy_includes_tumors`` adds the tumours onto the anatomical image as
    well (clipped to ``[0, 1]``); by default the anatomy is the bare
    Shepp-Logan phantom and carries no trace of the tumours.
    """

    size: tuple[int, int] = (256, 256)
    tumors: tuple[Tumor, ...] = ()
    noise_sigma: float = 0.0
    seed: int = 0
    anatomy_includes_tumors: bool = False

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        object.__setattr__(self, "size", tuple(int(n) for n in self.size))
        object.__setattr__(self, "tumors", tuple(self.tumors))

    @classmethod
    def from_dict(cls, d: dict) -> "PhantomSpec":
        tumors = tuple(
            Tumor(str(t["label"]), t["shape"], t["pattern"], t.get("alignment", "interior"))
            for t in d.get("tumors", ())
        )
        return cls(
            size=tuple(d.get("size", (256, 256))),
            tumors=tumors,
            noise_sigma=float(d.get("noise_sigma", 0.0)),
            seed=int(d.get("seed", 0)),
            anatomy_includes_tumors=bool(d.get("anatomy_includes_tumors", False)),
        )

    def with_size(self, size) -> "PhantomSpec":
        return PhantomSpec(tuple(size), self.tumors, self.noise_sigma, self.seed,
                           self.anatomy_includes_tumors)


def default_spec(size=None) -> PhantomSpec:
    """The versioned four-tumour phantom (``phantom_v1.json``)."""
    text = resources.files("dichromat").joinpath("data/phantom_v1.json").read_text()
    spec = PhantomSpec.from_dict(json.loads(text))
    return spec.with_size(size) if size is not None else spec


def render_tumors(spec: PhantomSpec) -> np.ndarray:
    img = np.zeros(spec.size)
    for t in spec.tumors:
        tumor = t.render(spec.size)
        img = np.where(tumor != 0, tumor, img)
    return img


def make_phantom_pair(spec: PhantomSpec, factor: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Render the anatomy, the metabolic ground truth and its low-resolution version.

    Returns
    -------
    anatomical : ndarray
        Shepp-Logan anatomy at ``spec.size``.
    metabolic_hi : ndarray
        Tumour-only ground truth at ``spec.size``.
    metabolic_lo : ndarray
        ``metabolic_hi`` block-averaged by ``factor`` along both axes, plus
        Gaussian noise of standard deviation ``spec.noise_sigma``.
    """
    factor = int(factor)
    rows, cols = spec.size
    if factor < 1 or rows % factor or cols % factor:
        raise ValueError(f"factor {factor} does not divide phantom size {spec.size}")
    anatomical = shepp_logan(spec.size)
    truth = render_tumors(spec)
    if spec.anatomy_includes_tumors:
        anatomical = np.clip(anatomical + truth, 0.0, 1.0)
    op = make_operator(spec.size, (rows // factor, cols // factor))
    lo = op.apply(truth)
    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        lo = lo + rng.normal(0.0, spec.noise_sigma, size=lo.shape)
    return anatomical, truth, lo


def relative_error(estimate, truth) -> float:
    """``||estimate - truth||_F / ||truth||_F``."""
    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if estimate.shape != truth.shape:
        raise ValueError(f"shape mismatch: {estimate.shape} vs {truth.shape}")
    denom = frobenius_norm(truth)
    if denom == 0:
        raise ValueError("relative error is undefined for an all-zero reference")
    return frobenius_norm(estimate - truth) / denom


@dataclass
class BenchReport:
    lam: float
    factor: int
    errors: dict = field(default_factory=dict)
    wall_ms: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict, repr=False)
    polarity: Optional[str] = None

    def rows(self) -> list[dict]:
        return [
            {"method": m, "relative_error": self.errors[m], "wall_ms": self.wall_ms[m], "lambda": self.lam}
            for m in self.errors
        ]


def run_benchmark(
    spec: PhantomSpec,
    factor: int,
    lam: float = 10.0,
    cfg: Optional[SolverConfig] = None,
    jtv_iters: int = 1000,
    methods: Sequence[str] = BENCH_METHODS,
    callback=None,
) -> BenchReport:
    """Interpolate the low-resolution phantom with each method and score it.

    ``callback`` is forwarded to the FISTA solves of the di-chromatic method.
    """
    anatomical, truth, lo = make_phantom_pair(spec, factor)
    report = BenchReport(lam=float(lam), factor=int(factor))
    shape = anatomical.shape

    def timed(name, fn):
        t0 = time.perf_counter()
        out = fn()
        report.wall_ms[name] = 1000.0 * (time.perf_counter() - t0)
        report.outputs[name] = out
        report.errors[name] = relative_error(out, truth)

    for name in methods:
        if name == "nearest":
            timed(name, lambda: resample(lo, shape, "nearest"))
        elif name == "bilinear":
            timed(name, lambda: resample(lo, shape, "bilinear"))
        elif name == "sinc":
            timed(name, lambda: resample(lo, shape, "sinc_zerofill"))
        elif name == "jtv":
            def jtv():
                # same normalization as the di-chromatic pipeline
                peak = lo.max()
                a = anatomical / anatomical.max()
                res = jtv_solve(JtvProblem.build(a, lo / peak, lam), iters=jtv_iters)
                return res.metabolic_interp * peak
            timed(name, jtv)
        elif name == "dichromatic":
            def dichromatic():
                vol, choice, _ = interpolate_volume(anatomical, lo, lam, cfg, callback=callback)
                report.polarity = choice.tag
                return vol[0]
            timed(name, dichromatic)
        else:
            raise ValueError(f"unknown method {name!r}")
    return report
