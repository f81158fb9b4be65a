"""Command line and file format round trip.

Writes a phantom pair to DCIV files with ``dichromat phantom``, interpolates
it with ``dichromat interp`` and reads the result back.

Run with ``python demos/06_cli_roundtrip.py``.
"""

import tempfile
from pathlib import Path

from dichromat import read_volume
from dichromat.cli import main
from dichromat.phantom import relative_error

with tempfile.TemporaryDirectory() as tmp:
    prefix = str(Path(tmp) / "demo_")
    assert main(["phantom", "--size", "64", "--factor", "4", "--outdir", tmp, "--prefix", "demo_"]) == 0
    for name in ("anatomical", "truth", "metabolic"):
        print(f"{name:<11} {read_volume(prefix + name + '.dciv').shape}")

    out, report = Path(tmp) / "interp.dciv", Path(tmp) / "run.csv"
    code = main(["interp", "-a", prefix + "anatomical.dciv", "-m", prefix + "metabolic.dciv",
                 "-o", str(out), "--lambda", "10", "--report", str(report)])
    print(f"interp exit code {code}")
    print(report.read_text().strip())

    est, truth = read_volume(out), read_volume(prefix + "truth.dciv")
    # At 64x64 the tumours span only a few low-resolution pixels, so the
    # error is much higher than on the 256x256 benchmark.
    print(f"relative error {relative_error(est, truth):.4f}")

    # An unreadable input is an I/O error (exit code 3).
    code = main(["interp", "-a", prefix + "anatomical.dciv", "-m", str(Path(tmp) / "missing.dciv"),
                 "-o", str(out)])
    print(f"missing input -> exit code {code}")
