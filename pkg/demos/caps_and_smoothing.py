"""Boundary caps, and the smoothed count behind Poisson summation.

First the cap of depth delta around the point with normal xi: on the ball its
area is 2 pi delta, on a supersphere it is much larger near the flat axis
points. Then the mollified count at t = 2 for the ball, placed between the
neighbouring smoothed counts and checked against the frequency-side sum.
Run: python demos/caps_and_smoothing.py
"""

import math

from latlab import corpus
from latlab.caps import cap_extents, cap_measure
from latlab.poisson import sandwich_check

ball, ss4 = corpus.load("ball_d3"), corpus.load("ss4_d3")
print(" delta   ball area   2 pi delta   ss4 area   ss4 extent")
for delta in [0.1, 0.01, 0.001]:
    ext = cap_extents(ss4, [1, 0, 0], delta)[1]
    print(f"{delta:6g} {cap_measure(ball, [1, 0, 0], delta):11.5f} {2 * math.pi * delta:12.5f} {cap_measure(ss4, [1, 0, 0], delta):10.5f} {ext:12.5f}")

v = sandwich_check(ball, 2, poisson_eps=1.0)
print(f"\nt = 2, eps = {v.eps:.3f}: {v.rhs_minus:.3f} <= N = {v.exact} <= {v.rhs_plus:.3f}")
print(f"smoothed count (eps = 1) {v.lhs:.6f}, frequency sum {v.poisson_rhs:.6f}, allowed gap {v.tolerance:.1e}")
