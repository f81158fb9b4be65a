"""Command-line interface.

Subcommands
-----------
interp
    Interpolate a metabolic volume onto the grid of an anatomical volume.
bench
    Score every interpolation method on the phantom and optionally write a
    CSV report.
phantom
    Write the phantom anatomy, ground truth and low-resolution metabolic
    image as DCIV volumes.

Set ``DICHROMAT_THREADS`` to cap the number of slices solved concurrently.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dichromatic import interpolate_volume
from .fista import SolverConfig, SolverError
from .jtv import JtvProblem, jtv_solve
from .phantom import PhantomSpec, default_spec, make_phantom_pair, run_benchmark
from .resample import resample
from .volume_io import VolumeFormatError, read_volume, write_volume

log = logging.getLogger("dichromat")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DIMENSION = 4
EXIT_SOLVER = 5

METHODS = ("dichromatic", "jtv", "nearest", "bilinear", "sinc")
POLARITIES = ("auto", "positive", "negative")

_EXIT_HELP = """\
exit status:
  0  success
  2  invalid arguments
  3  input/output failure (missing, unreadable or malformed file)
  4  dimension mismatch between anatomical and metabolic volumes
  5  solver failure (non-finite values or failed line search)

environment:
  DICHROMAT_THREADS  maximum number of slices solved concurrently (default 1)
"""


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Settings of one ``interp`` invocation."""

    anatomical: str
    metabolic: str
    output: str
    lam: float = 10.0
    max_iters: int = 250
    tol: float = 1e-8
    method: str = "dichromatic"
    polarity: str = "auto"
    report: Optional[str] = None
    jtv_iters: int = 1000

    def __post_init__(self):
        for name in ("anatomical", "metabolic", "output"):
            if not getattr(self, name):
                raise ValueError(f"{name} path must not be empty")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.polarity not in POLARITIES:
            raise ValueError(f"unknown polarity {self.polarity!r}")
        if self.method in ("dichromatic", "jtv") and not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")


def thread_cap() -> int:
    """Worker count from ``DICHROMAT_THREADS`` (1 when unset or invalid)."""
    raw = os.environ.get("DICHROMAT_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        if raw:
            log.warning("ignoring non-integer DICHROMAT_THREADS=%r", raw)
        return 1


def _write_text_atomic(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _csv_text(fieldnames, rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _check_dimensions(V_A: np.ndarray, V_M: np.ndarray) -> None:
    if V_A.shape[0] != V_M.shape[0]:
        raise DimensionMismatch(
            f"anatomical volume has {V_A.shape[0]} slices, metabolic volume has {V_M.shape[0]}"
        )
    if V_M.shape[1] > V_A.shape[1] or V_M.shape[2] > V_A.shape[2]:
        raise DimensionMismatch(
            f"metabolic slices {V_M.shape[1:]} are larger than anatomical slices {V_A.shape[1:]}"
        )


def _jtv_slice(a: np.ndarray, m: np.ndarray, lam: float, iters: int) -> np.ndarray:
    a_peak, m_peak = a.max(), m.max()
    if m_peak <= 0:
        return np.zeros(a.shape)
    a_norm = a / a_peak if a_peak > 0 else a
    res = jtv_solve(JtvProblem.build(a_norm, m / m_peak, lam), iters=iters)
    return res.metabolic_interp * m_peak


def interpolate(config: RunConfig, V_A: np.ndarray, V_M: np.ndarray):
    """Apply ``config.method`` slice by slice; returns ``(volume, polarity_tag)``."""
    _check_dimensions(V_A, V_M)
    out_shape = V_A.shape[1:]
    if config.method == "dichromatic":
        cfg = SolverConfig(max_iters=config.max_iters, tol=config.tol)
        if config.polarity != "auto":
            skipped = "negative" if config.polarity == "positive" else "positive"
            log.info("polarity forced to %s; %s branch not solved", config.polarity, skipped)
        V_I, choice, _ = interpolate_volume(V_A, V_M, config.lam, cfg, config.polarity, thread_cap())
        return V_I, choice.tag
    if config.method == "jtv":
        return np.stack([_jtv_slice(a, m, config.lam, config.jtv_iters) for a, m in zip(V_A, V_M)]), None
    kind = "sinc_zerofill" if config.method == "sinc" else config.method
    return np.stack([resample(m, out_shape, kind) for m in V_M]), None


def run(config: RunConfig) -> int:
    """Execute one ``interp`` job and return the process exit status."""
    try:
        V_A = read_volume(config.anatomical)
        V_M = read_volume(config.metabolic)
    except (OSError, VolumeFormatError) as exc:
        log.error("cannot read input: %s", exc)
        return EXIT_IO
    t0 = time.perf_counter()
    try:
        V_I, tag = interpolate(config, V_A, V_M)
    except DimensionMismatch as exc:
        log.error("dimension mismatch: %s", exc)
        return EXIT_DIMENSION
    except (SolverError, FloatingPointError) as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    wall_ms = 1000.0 * (time.perf_counter() - t0)
    try:
        write_volume(config.output, V_I)
        if config.report:
            row = {"method": config.method, "wall_ms": wall_ms, "lambda": config.lam,
                   "polarity": tag or ""}
            _write_text_atomic(config.report, _csv_text(list(row), [row]))
    except (OSError, VolumeFormatError) as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_IO
    log.info("wrote %s (%d x %d x %d)", config.output, *V_I.shape)
    return EXIT_OK


def _load_spec(path: Optional[str], size: Optional[int]) -> PhantomSpec:
    if path:
        spec = PhantomSpec.from_dict(json.loads(Path(path).read_text()))
    else:
        spec = default_spec()
    return spec.with_size((size, size)) if size else spec


def bench(args) -> int:
    try:
        spec = _load_spec(args.spec, args.size)
    except (OSError, ValueError, KeyError) as exc:
        log.error("cannot load phantom description: %s", exc)
        return EXIT_IO
    cfg = SolverConfig(max_iters=args.max_iters, tol=args.tol)
    try:
        report = run_benchmark(spec, args.factor, args.lam, cfg, jtv_iters=args.jtv_iters)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_DIMENSION
    except (SolverError, FloatingPointError) as exc:
        log.error("solver failure: %s", exc)
        return EXIT_SOLVER
    rows = report.rows()
    print(f"{'method':<12} {'rel. error':>10} {'wall ms':>10}")
    for row in rows:
        print(f"{row['method']:<12} {row['relative_error']:>10.4f} {row['wall_ms']:>10.1f}")
    if args.report:
        try:
            _write_text_atomic(args.report, _csv_text(["method", "relative_error", "wall_ms", "lambda"], rows))
        except OSError as exc:
            log.error("cannot write report: %s", exc)
            return EXIT_IO
    return EXIT_OK


def phantom(args) -> int:
    try:
        spec = _load_spec(args.spec, args.size)
    except (OSError, ValueError, KeyError) as exc:
        log.error("cannot load phantom description: %s", exc)
        return EXIT_IO
    try:
        A, truth, lo = make_phantom_pair(spec, args.factor)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_DIMENSION
    outdir = Path(args.outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        for name, vol in (("anatomical", A), ("truth", truth), ("metabolic", lo)):
            write_volume(outdir / f"{args.prefix}{name}.dciv", vol)
    except OSError as exc:
        log.error("cannot write phantom: %s", exc)
        return EXIT_IO
    log.info("wrote phantom volumes to %s", outdir)
    return EXIT_OK


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dichromat",
        description="Anatomy-guided interpolation of low-resolution metabolic images.",
        epilog=_EXIT_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--lambda", dest="lam", type=_positive_float, default=10.0,
                       help="regularization weight (default 10)")
        p.add_argument("--max-iters", type=_positive_int, default=250, help="FISTA iteration cap")
        p.add_argument("--tol", type=float, default=1e-8, help="relative objective-change tolerance")
        p.add_argument("--jtv-iters", type=_positive_int, default=1000, help="PDHG iterations for jtv")

    p = sub.add_parser("interp", help="interpolate a metabolic volume",
                       epilog=_EXIT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-a", "--anatomical", required=True, help="anatomical volume (DCIV or PGM)")
    p.add_argument("-m", "--metabolic", required=True, help="metabolic volume (DCIV or PGM)")
    p.add_argument("-o", "--output", required=True, help="output DCIV path")
    p.add_argument("--method", choices=METHODS, default="dichromatic")
    p.add_argument("--polarity", choices=POLARITIES, default="auto")
    p.add_argument("--report", help="optional one-row CSV with timing and selected polarity")
    solver_flags(p)

    p = sub.add_parser("bench", help="score all methods on the phantom",
                       epilog=_EXIT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--factor", type=_positive_int, default=4, help="reduction factor per axis")
    p.add_argument("--report", help="CSV output: method,relative_error,wall_ms,lambda")
    p.add_argument("--spec", help="phantom description JSON (default: bundled four-tumor phantom)")
    p.add_argument("--size", type=_positive_int, help="render the phantom at size x size")
    solver_flags(p)

    p = sub.add_parser("phantom", help="write the phantom volumes",
                       epilog=_EXIT_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--factor", type=_positive_int, default=4)
    p.add_argument("--outdir", default=".", help="output directory")
    p.add_argument("--prefix", default="phantom_", help="file name prefix")
    p.add_argument("--spec", help="phantom description JSON")
    p.add_argument("--size", type=_positive_int, help="render the phantom at size x size")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "interp":
        config = RunConfig(args.anatomical, args.metabolic, args.output, args.lam, args.max_iters,
                           args.tol, args.method, args.polarity, args.report, args.jtv_iters)
        return run(config)
    if args.command == "bench":
        return bench(args)
    return phantom(args)


if __name__ == "__main__":
    sys.exit(main())
