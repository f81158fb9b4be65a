"""Contrast polarity: bright-on-dark or dark-on-bright?

The anatomy may show a structure bright where the metabolite is high, or
dark. The solver runs once with the anatomy and once with its negative,
then keeps whichever result stays closer to a plain bilinear upsampling of
the metabolic data (weighted by that same upsampling).

Run with ``python demos/02_polarity.py``.
"""

import numpy as np

from dichromat import interpolate_volume, make_operator

rng = np.random.default_rng(0)
size, factor = 32, 4

# A bright square on a dim background, with a little texture. Its edges do
# not line up with the 4x4 blocks of the low-resolution grid.
yy, xx = np.mgrid[:size, :size]
blob = np.where((abs(yy - 15.5) < 6) & (abs(xx - 15.5) < 6), 1.0, 0.1)
blob += 0.02 * rng.standard_normal(blob.shape)
metabolic = make_operator(blob.shape, (size // factor, size // factor)).apply(blob)

print(f"{'lambda':>7}  {'same contrast':<14} {'inverted contrast':<17}")
for lam in (0.1, 1.0, 10.0):
    tags = [interpolate_volume(anatomy, metabolic, lam=lam)[1].tag for anatomy in (blob, 1.0 - blob)]
    print(f"{lam:>7g}  {tags[0]:<14} {tags[1]:<17}")

# With a strong edge prior (lambda = 10) the wrong-polarity solve is pulled
# towards the inverted edges and lands far from the bilinear reference, so
# the test picks correctly. With a weak prior both solves stay close to the
# data, the wrong-polarity one simply ignores the anatomy, and that smoother
# image looks closer to the blurry bilinear reference. Use a lambda large
# enough for the anatomy to matter, or force the polarity when it is known.

_, choice, _ = interpolate_volume(blob, metabolic, lam=10.0)
print(f"\nlambda 10 scores: positive {choice.score_positive:.4f}, negative {choice.score_negative:.4f}")

# Forcing a polarity skips the other branch entirely; its score is reported
# as infinity.
_, forced, _ = interpolate_volume(blob, metabolic, lam=1.0, polarity="positive")
print(f"forced positive -> {forced.tag} (negative score {forced.score_negative})")
