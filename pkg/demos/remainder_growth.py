"""How fast does the lattice point remainder grow?

Counts points of tD exactly for the d=3 corpus, fits the growth exponent of
the running max of |R(t)| and sets it beside the predicted exponent.
Run: python demos/remainder_growth.py
"""

from latlab import corpus
from latlab.domain import predicted_exponents
from latlab.remainder import compare_to_bound, fit_growth_exponent, omega_scan, omega_windows, scale_grid, sweep_remainder

grid = scale_grid(2, 200, 200)
print(f"{'spec':10s} {'fitted':>8s} {'predicted':>10s}  verdict")
for name in ["ball_d3", "ss4_d3", "ss6_d3", "ss8_d3", "kn_d3"]:
    spec = corpus.load(name)
    rows = sweep_remainder(spec, grid)
    rep = predicted_exponents(spec)
    fit = fit_growth_exponent(rows, rep.overall)
    verdict = compare_to_bound(fit, rep)
    print(f"{name:10s} {fit.fitted_exponent:8.3f} {rep.overall:10.3f}  {'PASS' if verdict.passed else 'FAIL'}")

# For omega = 8 >= d + 1 the bound is attained: |R(t)| / t^E stays away from
# zero in every unit window.
ev = omega_scan(corpus.load("ss8_d3"), 0, omega_windows(50, 5))
print("ss8_d3 window sups of |R|/t^E:", ", ".join(f"{s:.2f}" for s in ev.window_sups))
