"""Remainder sweeps, growth-exponent fits, and oscillation evidence."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .counting import as_rational, count_lattice_points, default_threads
from .domain import predicted_exponents, volume

DEFAULT_TOL = 0.15


@dataclass(frozen=True)
class SweepRow:
    t: Fraction
    count: int
    volume_term: float
    remainder: float
    normalized: float


@dataclass(frozen=True)
class FitResult:
    fitted_exponent: float
    intercept: float
    window: tuple
    predicted: float = float("nan")

    @property
    def residual(self):
        return self.fitted_exponent - self.predicted


@dataclass(frozen=True)
class Verdict:
    fitted: float
    predicted: float
    margin: float
    passed: bool

    def to_json(self):
        return {"fitted": self.fitted, "predicted": self.predicted, "margin": self.margin, "pass": self.passed}


@dataclass(frozen=True)
class OmegaEvidence:
    axis: int
    exponent: float
    windows: tuple
    window_sups: tuple
    evidence: float
    conclusive: bool


def rational_grid(t_min, t_max, steps, denominator=20, log=True):
    """Sorted, de-duplicated rationals with a fixed denominator covering [t_min, t_max]."""
    a, b = float(t_min), float(t_max)
    raw = np.geomspace(a, b, steps) if log else np.linspace(a, b, steps)
    out = sorted({Fraction(round(x * denominator), denominator) for x in raw})
    return [t for t in out if t > 0]


def scale_grid(t_min, t_max, steps, log=True):
    """Exactly ``steps`` distinct rationals from ``t_min`` to ``t_max`` (endpoints kept exact).

    Interior points are rounded to multiples of ``1/20``; the denominator
    grows tenfold until no two points collide.
    """
    lo, hi = as_rational(t_min), as_rational(t_max)
    if not 0 < lo < hi:
        raise ValueError("need 0 < t_min < t_max")
    if steps < 2:
        raise ValueError("need at least two scales")
    raw = np.geomspace(float(lo), float(hi), steps) if log else np.linspace(float(lo), float(hi), steps)
    den = 20
    while True:
        inner = [Fraction(round(x * den), den) for x in raw[1:-1]]
        grid = [lo] + inner + [hi]
        if all(b > a for a, b in zip(grid, grid[1:])):
            return grid
        den *= 10


def sweep_remainder(spec, t_grid, exponent=None, threads=None):
    """One :class:`SweepRow` per scale; ``normalized`` is ``R / t**exponent``."""
    ts = [as_rational(t) for t in t_grid]
    if any(t <= 0 for t in ts):
        raise ValueError("scales must be positive")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t grid must be strictly increasing")
    if exponent is None:
        exponent = predicted_exponents(spec).overall
    vol = volume(spec)
    threads = threads or default_threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            counts = list(pool.map(lambda t: count_lattice_points(spec, t, threads=1), ts))
    else:
        counts = [count_lattice_points(spec, t, threads=1) for t in ts]
    rows = []
    for t, c in zip(ts, counts):
        tf = float(t)
        vt = vol * tf**spec.d
        r = c - vt
        rows.append(SweepRow(t=t, count=c, volume_term=vt, remainder=r, normalized=r / tf**exponent))
    return rows


def running_max(values):
    return np.maximum.accumulate(np.abs(np.asarray(values, dtype=float)))


def fit_growth_exponent(rows, predicted=float("nan"), min_rows=20):
    """Least-squares slope of log(running max |R|) against log t."""
    if len(rows) < min_rows:
        raise ValueError(f"need at least {min_rows} rows, got {len(rows)}")
    t = np.array([float(r.t) for r in rows])
    if t[-1] < 10 * t[0] * (1 - 1e-12):
        raise ValueError("t grid must span at least one decade")
    env = running_max([r.remainder for r in rows])
    keep = env > 1e-9
    if not keep.any():
        raise ValueError("degenerate sweep: every |R| is below 1e-9")
    slope, intercept = np.polyfit(np.log(t[keep]), np.log(env[keep]), 1)
    return FitResult(float(slope), float(intercept), (float(t[0]), float(t[-1])), float(predicted))


def compare_to_bound(fit, report, tol=DEFAULT_TOL):
    predicted = report.overall if hasattr(report, "overall") else float(report)
    fitted = fit.fitted_exponent
    return Verdict(fitted=fitted, predicted=predicted, margin=predicted - fitted, passed=bool(fitted <= predicted + tol))


def log_slope(t, y):
    """Slope of the least-squares line through ``(log t, log y)``."""
    slope, _ = np.polyfit(np.log(np.asarray(t, float)), np.log(np.asarray(y, float)), 1)
    return float(slope)


def top_decade_slope(t, y):
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    sel = t >= t.max() / 10 * (1 - 1e-12)
    return log_slope(t[sel], y[sel])


def omega_windows(start, count, gap=1):
    """``count`` unit windows starting at ``start``, separated by ``gap``."""
    return [(start + k * (1 + gap), start + k * (1 + gap) + 1) for k in range(count)]


def omega_scan(spec, axis, windows, step=Fraction(1, 40), remainder_fn=None, threads=None):
    """Per unit window, ``sup |R(t)| / t**E`` with ``E = d - 1 - nu_axis``.

    ``remainder_fn`` (``t -> R(t)``) replaces the lattice count, which is how
    synthetic signals are fed through the same scan.
    """
    step = as_rational(step)
    if step > Fraction(1, 20):
        raise ValueError("window sampling step must be at most 0.05")
    if len(windows) < 1:
        raise ValueError("need at least one window")
    exponent = spec.d - 1 - float(spec.table.nu[axis])
    sups = []
    for lo, hi in windows:
        lo, hi = as_rational(lo), as_rational(hi)
        n = int((hi - lo) / step)
        ts = [lo + k * step for k in range(n + 1)]
        if remainder_fn is None:
            vals = [r.remainder for r in sweep_remainder(spec, ts, exponent=exponent, threads=threads)]
        else:
            vals = [remainder_fn(float(t)) for t in ts]
        tf = np.array([float(t) for t in ts])
        sups.append(float(np.max(np.abs(vals) / tf**exponent)))
    evidence = min(sups)
    return OmegaEvidence(
        axis=axis,
        exponent=exponent,
        windows=tuple((float(a), float(b)) for a, b in windows),
        window_sups=tuple(sups),
        evidence=evidence,
        conclusive=evidence > 1e-12,
    )
