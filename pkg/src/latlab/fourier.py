"""Fourier transform of the indicator of D along rays.

``chi_hat(t xi) = ∫ A(s) exp(-2 pi i t s) ds`` where ``A(s)`` is the area of
the slice ``{x in D : <x, xi> = s}``. The slice profile is sampled once per
direction on a panel mesh graded towards both support ends, after which any
number of frequencies cost one Filon sum each.

Coordinate directions use the block structure directly: the slice is again a
block body and its area reduces to a 1-D Gauss-Jacobi integral. Other
directions integrate the radial function of the slice over a fixed product
rule on the sphere, centred on a point that moves continuously with ``s``.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_jacobi

from .caps import orthonormal_complement, support_value
from .counting import default_threads
from .domain import volume
from .filon import PanelRule, graded_breaks
from .remainder import top_decade_slope
from .slices import section_areas
from .special import gamma
from .sphere import sphere_rule

TREND_TOL = 0.05


@dataclass(frozen=True)
class FTValue:
    xi: np.ndarray
    t: float
    value: complex
    quadrature_error: float


def _axis_of(xi):
    nz = np.flatnonzero(np.asarray(xi) != 0)
    return int(nz[0]) if len(nz) == 1 else None


def _block_constant(omegas):
    alpha = sum(1.0 / w for w in omegas)
    return math.prod(2 * gamma(1 + 1.0 / w) for w in omegas) / gamma(1 + alpha), alpha


def axis_slice_area(spec, j, s, n_jacobi=40):
    """Area of ``{x in D : x_j = s}`` (vectorized in ``s``)."""
    s = np.abs(np.asarray(s, dtype=float))
    q = int(spec.block_of[j])
    a, b = spec.offsets[q], spec.offsets[q + 1]
    w_j = int(spec.omegas[j])
    m_q = spec.ms[q]
    rest = [int(spec.omegas[l]) for l in range(a, b) if l != j]

    # blocks other than q, collapsed by the Dirichlet integral
    v_rest, big_b = 1.0, 0.0
    for p, blk in enumerate(spec.blocks):
        if p == q:
            continue
        c_p, alpha_p = _block_constant(blk)
        v_rest *= c_p * alpha_p / spec.ms[p] * gamma(alpha_p / spec.ms[p])
        big_b += alpha_p / spec.ms[p]
    v_rest /= gamma(1 + big_b)

    inside = s < 1
    out = np.zeros_like(s)
    y0 = s[inside] ** w_j
    if not rest:
        out[inside] = v_rest * np.clip(1 - y0**m_q, 0, None) ** big_b
        return out
    c_r, alpha_r = _block_constant(rest)
    u = 1 - y0
    x, wt = roots_jacobi(n_jacobi, big_b, alpha_r - 1)
    wq = (x + 1) / 2
    wt = wt / 2 ** (alpha_r + big_b)
    y = y0[:, None] + u[:, None] * wq[None, :]
    # 1 - y**m = (1 - y) * (1 + y + ... + y**(m-1))
    poly = sum(y**i for i in range(m_q))
    integral = (poly**big_b) @ wt
    out[inside] = c_r * alpha_r * v_rest * u ** (alpha_r + big_b) * integral
    return out


def _angle_count(d, n_angle=None):
    return n_angle or {3: 64, 4: 16, 5: 8}.get(d, 6)


def _slice_rule(d, n_angle=None):
    k = d - 2
    if k == 0:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    return sphere_rule(k, _angle_count(d, n_angle))


def _generic_areas(spec, n, s, h, top, basis, *rules):
    """Slice areas at offsets ``s`` for unit normal ``n``, one array per sphere rule."""
    s = np.asarray(s, float)
    inside = np.abs(s) < h
    centers = (s[inside] / h)[:, None] * top[None, :]
    outs = []
    for areas in section_areas(spec, centers, basis, rules):
        out = np.zeros(s.shape)
        out[inside] = areas
        outs.append(out)
    return outs if len(rules) > 1 else outs[0]


def slice_area(spec, xi, s, n_angle=None):
    """``(d-1)``-volume of ``D ∩ {x : <x, xi/|xi|> = s}``."""
    xi = np.asarray(xi, float)
    j = _axis_of(xi)
    if j is not None:
        return axis_slice_area(spec, j, np.sign(xi[j]) * np.asarray(s, float))
    n = xi / np.linalg.norm(xi)
    h, top = support_value(spec, n)
    dirs, wdir = _slice_rule(spec.d, n_angle)
    return _generic_areas(spec, n, s, h, top, orthonormal_complement(n), (dirs, wdir))


class SliceProfile:
    """Slice areas of D across one direction, ready for Filon sums.

    ``error`` bounds the Filon error (trailing Legendre coefficients plus the
    two tip panels) and, for non-axis directions, adds ``∫|A_fine - A_coarse|``
    between the angular rule and one of half the size, which is a generous
    estimate of the angular quadrature error.
    """

    def __init__(self, spec, xi, depth=20, order=16, interior=4, n_angle=None):
        xi = np.asarray(xi, float)
        self.spec = spec
        self.xi = xi / np.linalg.norm(xi)
        self.axis = _axis_of(xi)
        if self.axis is not None:
            self.h = 1.0
        else:
            self.h, self._top = support_value(spec, self.xi)
        self.rule = PanelRule(graded_breaks(-self.h, self.h, depth, interior), order)
        nodes = self.rule.nodes.ravel()
        self.angular_error = 0.0
        if self.axis is not None:
            values = axis_slice_area(spec, self.axis, nodes)
        else:
            half = max(2, _angle_count(spec.d, n_angle) // 2)
            basis = orthonormal_complement(self.xi)
            values, rough = _generic_areas(
                spec, self.xi, nodes, self.h, self._top, basis, _slice_rule(spec.d, n_angle), _slice_rule(spec.d, half)
            )
            self.angular_error = float(np.abs(values - rough) @ self.rule.weights.ravel())
        self.values = values.reshape(self.rule.nodes.shape)
        self.coef = self.rule.coefficients(self.values)
        ends = [0, -1]
        tip = float(np.sum(2 * self.rule.halfwidths[ends] * np.abs(self.values[ends]).max(axis=1)))
        self.error = self.rule.error_bound(self.coef) + tip + self.angular_error

    @property
    def s_range(self):
        return (-self.h, self.h)

    @property
    def samples(self):
        """``(s, A(s))`` pairs at the quadrature nodes, endpoints included."""
        s = np.concatenate([[-self.h], self.rule.nodes.ravel(), [self.h]])
        a = np.concatenate([[0.0], self.values.ravel(), [0.0]])
        return list(zip(s.tolist(), a.tolist()))

    def transform(self, t):
        """``chi_hat(t xi)`` for each ``t`` (array), complex."""
        return self.rule.transform(self.coef, 2 * np.pi * np.asarray(t, float))


# cheaper profiles for sums over many directions at moderate frequency
FAST = {"depth": 12, "order": 12, "n_angle": None}


@lru_cache(maxsize=4096)
def _profile_cached(spec, key, depth, order, n_angle):
    return SliceProfile(spec, np.array(key), depth=depth, order=order, n_angle=n_angle)


def slice_profile(spec, xi, depth=20, order=16, n_angle=None):
    """Cached :class:`SliceProfile` (keyed on the rounded unit direction)."""
    xi = np.asarray(xi, float)
    key = tuple(np.round(xi / np.linalg.norm(xi), 15))
    return _profile_cached(spec, key, depth, order, n_angle)


def build_profiles(spec, dirs, threads=None, **kw):
    """Profiles for many directions, in order, built on a thread pool."""
    threads = threads or default_threads()
    if threads == 1 or len(dirs) < 2:
        return [slice_profile(spec, xi, **kw) for xi in dirs]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(lambda xi: slice_profile(spec, xi, **kw), dirs))


def ft_indicator(spec, xi, t, profile=None):
    """Fourier transform of the indicator of D at frequency ``t * xi/|xi|``."""
    if t < 0:
        raise ValueError("frequency magnitude must be nonnegative")
    prof = profile or slice_profile(spec, xi)
    value = complex(prof.transform([t])[0])
    return FTValue(xi=prof.xi, t=float(t), value=value, quadrature_error=prof.error)


def ft_dilate(spec, xi, t, scale):
    """Transform of the indicator of ``scale*D`` at ``t xi``: ``scale**d chi_hat(scale t xi)``."""
    v = ft_indicator(spec, xi, scale * t)
    return FTValue(xi=v.xi, t=float(t), value=scale**spec.d * v.value, quadrature_error=scale**spec.d * v.quadrature_error)


def ball_transform(t):
    """Closed form for the unit ball in R^3 (radial, any direction)."""
    t = np.asarray(t, float)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = (np.sin(2 * np.pi * t) - 2 * np.pi * t * np.cos(2 * np.pi * t)) / (2 * np.pi**2 * t**3)
    return np.where(t == 0, 4 * np.pi / 3, val)


def default_epsilon0(d):
    return (2 * d) ** -0.5


def theorem2_bound(spec, j, xi, t, eps0=None):
    """Decay product ``t^-1 prod_{l != j} min{t^(-1/(m w)), t^(-1/2)|xi_l|^(-(m w-2)/(2(m w-1)))}``."""
    xi = np.asarray(xi, float)
    n = np.abs(xi) / np.linalg.norm(xi)
    eps0 = default_epsilon0(spec.d) if eps0 is None else eps0
    if n[j] < eps0 * (1 - 1e-12):
        raise ValueError(f"|xi_{j}| = {n[j]:.4g} lies outside the cone (needs >= {eps0:.4g})")
    t = np.asarray(t, float)
    mw = (spec.table.m_jl[j] * spec.omegas).astype(float)
    out = 1.0 / t
    for l in range(spec.d):
        if l == j:
            continue
        first = t ** (-1 / mw[l])
        if n[l] == 0:
            # the second branch is infinite unless the exponent vanishes
            second = t**-0.5 if mw[l] == 2 else np.inf
        else:
            second = t**-0.5 * n[l] ** (-(mw[l] - 2) / (2 * (mw[l] - 1)))
        out = out * np.minimum(first, second)
    return out


def cone_directions(spec, j, count=12, seed=0, eps0=None):
    """Deterministic direction grid in the cone ``|xi_j| >= eps0``.

    The axis itself, one direction in each coordinate plane through ``e_j``,
    and seeded generic directions fill the rest.
    """
    d = spec.d
    eps0 = default_epsilon0(d) if eps0 is None else eps0
    rng = np.random.default_rng(seed + 7919 * j)
    out = [np.eye(d)[j]]
    for l in range(d):
        if l != j and len(out) < count:
            v = np.zeros(d)
            v[j], v[l] = 1.0, 0.6
            out.append(v / np.linalg.norm(v))
    while len(out) < count:
        v = np.abs(rng.normal(size=d))
        v /= np.linalg.norm(v)
        if v[j] >= eps0 and v.min() > 0.05:
            out.append(v)
    return out


def _envelope(prof, t, samples=12):
    """Max of ``|chi_hat|`` and of ``|chi_hat|/bound`` over one oscillation period after each ``t``."""
    period = 1.0 / prof.h
    taus = np.asarray(t, float)[:, None] + period * np.linspace(0, 1, samples)[None, :]
    vals = np.abs(prof.transform(taus.ravel())).reshape(taus.shape)
    return taus, vals


def decay_profile(d):
    """Profile settings for decay sweeps: a shallower mesh, and fewer angles in d >= 5."""
    return {"depth": 16, "order": 16, "n_angle": 6 if d >= 5 else None}


def decay_check(spec, j, xi_grid, t_grid, eps0=None, samples=12, tol=TREND_TOL, threads=None, profile=None):
    """Ratios ``|chi_hat(t xi)| / bound`` with a per-period envelope.

    Each row carries the pointwise ratio at ``t`` and the envelope ratio, the
    maximum over ``[t, t + 1/h]`` (one oscillation of the endpoint phase).
    The verdict asks for a top-decade log-slope of the envelope ratio of at
    most 0.05 for every direction.
    """
    t_grid = np.asarray(t_grid, float)
    if np.any(t_grid <= 0):
        raise ValueError("t = 0 has no finite bound; use positive frequencies")
    for xi in xi_grid:
        theorem2_bound(spec, j, xi, 1.0, eps0)  # raises outside the cone
    rows, slopes = [], []
    profs = build_profiles(spec, list(xi_grid), threads=threads, **(profile or decay_profile(spec.d)))
    for xi, prof in zip(xi_grid, profs):
        point = prof.transform(t_grid)
        bound = theorem2_bound(spec, j, xi, t_grid, eps0)
        taus, env = _envelope(prof, t_grid, samples)
        env_ratio = (env / theorem2_bound(spec, j, xi, taus.ravel(), eps0).reshape(taus.shape)).max(axis=1)
        for k, t in enumerate(t_grid):
            rows.append(
                {
                    "xi": tuple(float(v) for v in prof.xi),
                    "t": float(t),
                    "re": float(point[k].real),
                    "im": float(point[k].imag),
                    "err": prof.error,
                    "bound": float(bound[k]),
                    "ratio": float(abs(point[k]) / bound[k]),
                    "envelope_ratio": float(env_ratio[k]),
                }
            )
        slopes.append(top_decade_slope(t_grid, env_ratio))
    worst = max(slopes)
    return {"rows": rows, "slopes": slopes, "max_slope": worst, "max_ratio": max(r["envelope_ratio"] for r in rows), "pass": worst <= tol}


@dataclass(frozen=True)
class AxisFit:
    axis: int
    nu: float
    predicted_exponent: float
    fitted_exponent: float
    amplitude: float
    zero_spacing: float
    phase_offset: float
    error_exponent: float
    window: tuple

    def to_json(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def axis_asymptotics(spec, j, t_grid, samples=16):
    """Envelope power law and zero-crossing phase of ``chi_hat(t e_j)``."""
    t_grid = np.asarray(t_grid, float)
    if t_grid.max() < 10**1.5 * t_grid.min() * (1 - 1e-9):
        raise ValueError("t grid must span at least 1.5 decades")
    prof = slice_profile(spec, np.eye(spec.d)[j])
    nu = float(spec.table.nu[j])
    _, env = _envelope(prof, t_grid, samples)
    env = env.max(axis=1)
    slope, intercept = np.polyfit(np.log(t_grid), np.log(env), 1)

    # zero crossings across a window of whole periods at the top of the grid
    lo = float(t_grid.max()) - 5.0
    fine = np.linspace(lo, lo + 5.0, 401)
    vals = prof.transform(fine).real
    crossings = []
    for k in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        crossings.append(brentq(lambda x: prof.transform([x])[0].real, fine[k], fine[k + 1], xtol=1e-12))
    if len(crossings) < 3:
        raise ValueError("too few oscillations in the window")
    crossings = np.array(crossings)
    spacing = float(np.mean(np.diff(crossings)))
    offsets = np.mod(2 * np.pi * crossings - np.pi * nu / 2, np.pi)
    offsets = np.where(offsets > np.pi / 2, offsets - np.pi, offsets)
    return AxisFit(
        axis=j,
        nu=nu,
        predicted_exponent=-1 - nu,
        fitted_exponent=float(slope),
        amplitude=float(np.exp(intercept)),
        zero_spacing=spacing,
        phase_offset=float(np.mean(offsets)),
        error_exponent=-1 - nu - 1 / spec.table.eta[j],
        window=(float(t_grid.min()), float(t_grid.max())),
    )


def transform_at_zero_matches_volume(spec, xi):
    v = ft_indicator(spec, xi, 0.0)
    return abs(v.value - volume(spec)), v.quadrature_error
