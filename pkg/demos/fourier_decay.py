"""Decay of the Fourier transform of the indicator of D.

Along a coordinate axis the transform oscillates with period 1/2 under an
envelope t^(-1-nu_j). Off the axis the mixed bound takes over. The script
prints both for the KN-type domain {(x1^4)^2 + (x2^4 + x3^4)^2 <= 1}.
Run: python demos/fourier_decay.py
"""

import numpy as np

from latlab import corpus
from latlab.fourier import axis_asymptotics, slice_profile, theorem2_bound

kn = corpus.load("kn_d3")
for j in (0, 1):
    fit = axis_asymptotics(kn, j, np.geomspace(5, 200, 30))
    print(f"axis {j}: envelope exponent {fit.fitted_exponent:.3f} (predicted {fit.predicted_exponent:.3f}), zero spacing {fit.zero_spacing:.4f}")

xi = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
prof = slice_profile(kn, xi)
print("\n      t   |chi_hat|      bound   ratio")
for t in [1, 10, 100, 1000]:
    val = abs(prof.transform([t])[0])
    b = theorem2_bound(kn, 0, xi, t)
    print(f"{t:7d} {val:11.3e} {b:10.3e} {val / b:7.3f}")
