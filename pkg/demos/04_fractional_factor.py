"""Non-integer resolution ratios.

The degradation operator averages each high-resolution pixel into the
low-resolution pixels it overlaps, weighted by the exact overlap area. That
works for any pair of grid sizes, not just integer factors.

Run with ``python demos/04_fractional_factor.py``.
"""

import numpy as np

from dichromat import interpolate_volume, make_operator, shepp_logan

op = make_operator((5, 5), (2, 2))
print("row weights for 5 -> 2 (each low-res pixel covers 2.5 high-res pixels):")
print(op.row_weights.round(3))

# Adjointness is what the solver relies on; check it numerically.
rng = np.random.default_rng(1)
x, y = rng.standard_normal((5, 5)), rng.standard_normal((2, 2))
print(f"<Kx, y> - <x, K*y> = {np.vdot(op.apply(x), y) - np.vdot(x, op.adjoint(y)):.2e}")

# Interpolate a 60x60 image from 25x25 (factor 2.4).
anatomy = shepp_logan((60, 60))
truth = anatomy.copy()
lo = make_operator(truth.shape, (25, 25)).apply(truth)
est, choice, _ = interpolate_volume(anatomy, lo, lam=1.0)
err = np.linalg.norm(est[0] - truth) / np.linalg.norm(truth)
print(f"60x60 from 25x25: relative error {err:.4f}, polarity {choice.tag}")
