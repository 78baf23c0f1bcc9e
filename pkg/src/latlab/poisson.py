"""Mollified counting and the Poisson summation identity at desk scale.

For a mollifier ``rho_eps`` supported in ``eps D``,

    sum_k (chi_{(t-eps)D} * rho_eps)(k) <= #(tD ∩ Z^d) <= sum_k (chi_{(t+eps)D} * rho_eps)(k),

and each smoothed sum equals ``sum_k chi_hat_{tD}(k) rho_hat(eps k)`` by
Poisson summation. Both sides are computed here independently: the lattice
side by quadrature over the mollifier support, the frequency side from
the slice-profile transforms.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.interpolate import BSpline

from .counting import _Threshold, count_lattice_points
from .domain import eval_F, predicted_exponents, volume
from .fourier import FAST, build_profiles

DEFAULT_ORDER = 8
DEFAULT_K = 8


@lru_cache(maxsize=None)
def _cardinal(order):
    """Cardinal B-spline on ``[0, order]`` and its distribution function."""
    b = BSpline.basis_element(np.arange(order + 1, dtype=float), extrapolate=False)
    return b, b.antiderivative()


@dataclass(frozen=True)
class Mollifier:
    """Product of centred cardinal B-splines, scaled to live in ``[-a, a]^d``.

    ``a = 1/sqrt(d)`` puts the support cube inside the unit ball, hence
    inside every admissible D, which is what the sandwich needs.
    """

    order: int = DEFAULT_ORDER
    d: int = 3

    def __post_init__(self):
        if self.order < 4:
            raise ValueError("mollifier order must be at least 4")

    @property
    def half_width(self):
        return 1.0 / math.sqrt(self.d)

    @property
    def support_radius(self):
        return self.half_width * math.sqrt(self.d)

    @property
    def step(self):
        """Knot spacing ``h`` so that ``order`` pieces span ``[-a, a]``."""
        return 2 * self.half_width / self.order

    def density_1d(self, x, eps=1.0):
        b, _ = _cardinal(self.order)
        h = self.step * eps
        y = np.asarray(x, float) / h + self.order / 2
        return np.nan_to_num(b(y)) / h

    def cdf_1d(self, x, eps=1.0):
        _, big = _cardinal(self.order)
        y = np.asarray(x, float) / (self.step * eps) + self.order / 2
        return np.where(y <= 0, 0.0, np.where(y >= self.order, 1.0, np.nan_to_num(big(np.clip(y, 0, self.order)))))

    def __call__(self, x, eps=1.0):
        x = np.atleast_2d(x)
        return np.prod(self.density_1d(x, eps), axis=-1)

    def transform(self, xi, eps=1.0):
        """``rho_hat(eps xi) = prod_l sinc(h eps xi_l)**order``."""
        xi = np.asarray(xi, float)
        return np.prod(np.sinc(self.step * eps * xi) ** self.order, axis=-1)

    def piece_rule(self, q, eps=1.0):
        """Nodes and weights on ``[-a eps, a eps]``: ``q`` Gauss points per spline piece, weighted by the density."""
        return _piece_rule(self.order, self.step * eps, q)


@lru_cache(maxsize=64)
def _piece_rule(order, h, q):
    x, w = np.polynomial.legendre.leggauss(q)
    b, _ = _cardinal(order)
    pieces = np.arange(order)[:, None] + ((x + 1) / 2)[None, :]
    weights = (w / 2)[None, :] * b(pieces)
    nodes = (pieces - order / 2) * h
    return nodes.ravel(), weights.ravel()


def epsilon_schedule(d, t):
    """``eps = t**(-(d-1)/(d+1))``."""
    if t < 1:
        raise ValueError("the schedule is defined for t >= 1")
    return float(t) ** (-(d - 1) / (d + 1))


def _chord(spec, x_rest, t):
    """Half-length of ``{x_0 : (x_0, x_rest) in tD}``; zero when empty."""
    u = x_rest / t
    w = spec.omegas
    a0, b0 = spec.offsets[0], spec.offsets[1]
    pw = u ** w[1:]
    rest0 = pw[:, : b0 - 1].sum(axis=1)
    outer = np.zeros(len(u))
    for p in range(1, spec.n_blocks):
        lo, hi = spec.offsets[p] - 1, spec.offsets[p + 1] - 1
        outer += pw[:, lo:hi].sum(axis=1) ** spec.ms[p]
    room = 1.0 - outer
    with np.errstate(invalid="ignore"):
        b = np.where(room > 0, np.abs(room) ** (1.0 / spec.ms[0]), -1.0) - rest0
    return np.where(b > 0, t * np.clip(b, 0, None) ** (1.0 / w[0]), 0.0)


def _shell(spec, t, eps):
    """Nonnegative lattice points of ``(t+eps)D`` outside ``(t-eps)D`` (exact inner test)."""
    top = int(math.floor(t + eps))
    axis = np.arange(top + 1)
    grid = np.stack(np.meshgrid(*([axis] * spec.d), indexing="ij"), -1).reshape(-1, spec.d)
    near = eval_F(spec, grid / (t + eps)) <= 1e-9
    grid = grid[near]
    if t - eps > 0:
        thr = _Threshold(spec, Fraction(t - eps))
        inner = np.array([thr.member(k) for k in grid], dtype=bool)
        grid = grid[~inner]
    return grid


TENSOR_NODES = 2**17


def tensor_q(order, d, q):
    """Largest per-piece Gauss count ``<= q`` keeping the ``(d-1)``-fold tensor rule under ``TENSOR_NODES``."""
    while q > 2 and (order * q) ** (d - 1) > TENSOR_NODES:
        q -= 1
    return q


def _shell_sum(spec, t, eps, rho, points, q):
    nodes, weights = rho.piece_rule(q, eps)
    k = spec.d - 1
    ys = np.stack(np.meshgrid(*([nodes] * k), indexing="ij"), -1).reshape(-1, k)
    ws = np.prod(np.stack(np.meshgrid(*([weights] * k), indexing="ij"), -1).reshape(-1, k), axis=1)
    total = []
    for p in points:
        x_rest = p[1:][None, :] - ys
        half = _chord(spec, x_rest, t)
        g = rho.cdf_1d(p[0] + half, eps) - rho.cdf_1d(p[0] - half, eps)
        total.append(2 ** np.count_nonzero(p) * float(ws @ g))
    return math.fsum(total)


@dataclass(frozen=True)
class SmoothedCount:
    value: float
    error: float
    inner_count: int
    shell_points: int


def smoothed_count_detail(spec, t, eps, rho=None, q=32):
    """``sum_k (chi_{tD} * rho_eps)(k)`` with an error estimate (``q`` against ``q/2``)."""
    t = float(t)
    if t <= 0:
        raise ValueError("scale t must be positive")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        c = count_lattice_points(spec, Fraction(t))
        return SmoothedCount(float(c), 0.0, c, 0)
    rho = rho or Mollifier(d=spec.d)
    if rho.d != spec.d:
        raise ValueError("mollifier dimension does not match the domain")
    inner = count_lattice_points(spec, Fraction(t - eps)) if t - eps > 0 else 0
    pts = _shell(spec, t, eps)
    q = tensor_q(rho.order, spec.d, q)
    fine = _shell_sum(spec, t, eps, rho, pts, q)
    rough = _shell_sum(spec, t, eps, rho, pts, q // 2)
    return SmoothedCount(inner + fine, abs(fine - rough), inner, len(pts))


def smoothed_count(spec, t, eps, rho=None):
    return smoothed_count_detail(spec, t, eps, rho).value


def _canonical(spec, k):
    """Direction key for ``k`` up to the symmetries of D, and the gcd scale."""
    a = np.abs(np.asarray(k, dtype=np.int64))
    out = a.copy()
    for p in range(spec.n_blocks):
        lo, hi = spec.offsets[p], spec.offsets[p + 1]
        for w in set(spec.blocks[p]):
            cols = [lo + i for i in range(hi - lo) if spec.omegas[lo + i] == w]
            out[cols] = np.sort(a[cols])
    g = math.gcd(*(int(v) for v in out))
    return tuple(int(v) // g for v in out), g


def _sinc_mass(rho, eps, K, far=20000):
    """``(sum_{|k|<=K} g(k), sum_k g(k))`` for ``g(k) = |sinc(h eps k)|**order`` with a rigorous far tail."""
    k = np.arange(-far, far + 1)
    g = np.abs(np.sinc(rho.step * eps * k)) ** rho.order
    near = float(g[np.abs(k) <= K].sum())
    n = rho.order
    beyond = 2 * (math.pi * rho.step * eps) ** (-n) * far ** (1 - n) / (n - 1)
    return near, float(g.sum()) + beyond


@dataclass(frozen=True)
class PoissonSum:
    value: float
    tail_bound: float
    quadrature_error: float
    terms: int
    directions: int


def boundary_area_bound(spec):
    """``sigma(dD) <= sigma(d[-1, 1]^d) = d 2^d`` (D is convex and inside the cube)."""
    return spec.d * 2.0**spec.d


def poisson_rhs(spec, t, eps, rho=None, K=DEFAULT_K, threads=None, skip=1e-13, profile=None):
    """``sum_{|k|_inf <= K} chi_hat_{tD}(k) rho_hat(eps k)`` and a tail bound.

    ``|chi_hat_{tD}(k)| <= t^(d-1) sigma(dD) / (2 pi |k|)`` bounds every
    omitted term: those beyond ``K`` and those whose bound falls below
    ``skip``.
    """
    if K < 1:
        raise ValueError("frequency cutoff K must be at least 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    rho = rho or Mollifier(d=spec.d)
    t = float(t)
    d = spec.d
    sigma = boundary_area_bound(spec)
    rng = np.arange(-K, K + 1)
    ks = np.stack(np.meshgrid(*([rng] * d), indexing="ij"), -1).reshape(-1, d)
    ks = ks[np.any(ks != 0, axis=1)]
    rh = rho.transform(ks, eps)
    norms = np.linalg.norm(ks, axis=1)
    bound = t ** (d - 1) * sigma / (2 * math.pi * norms) * np.abs(rh)
    keep = bound >= skip
    skipped = math.fsum(bound[~keep])

    groups = {}
    for k, r in zip(ks[keep], rh[keep]):
        key, g = _canonical(spec, k)
        groups.setdefault(key, []).append((g, r))
    keys = sorted(groups)
    profs = build_profiles(spec, [np.array(k, float) for k in keys], threads=threads, **(profile or FAST))
    terms, errs = [], []
    for key, prof in zip(keys, profs):
        unit = np.linalg.norm(key)
        gs = np.array([g for g, _ in groups[key]], float)
        rs = np.array([r for _, r in groups[key]])
        vals = prof.transform(t * gs * unit).real
        terms.extend((t**d * vals * rs).tolist())
        errs.extend((t**d * prof.error * np.abs(rs)).tolist())
    near, total = _sinc_mass(rho, eps, K)
    beyond = t ** (d - 1) * sigma / (2 * math.pi * K) * max(total**d - near**d, 0.0)
    value = volume(spec) * t**d + math.fsum(sorted(terms))
    return PoissonSum(
        value=value,
        tail_bound=beyond + skipped,
        quadrature_error=math.fsum(errs),
        terms=int(keep.sum()) + 1,
        directions=len(keys),
    )


@dataclass(frozen=True)
class SandwichVerdict:
    t: float
    eps: float
    lhs: float
    exact: int
    rhs_minus: float
    rhs_plus: float
    poisson_eps: float
    poisson_rhs: float
    poisson_gap: float
    tail_bound: float
    tolerance: float
    normalized_remainder: float
    ordered: bool
    identity_holds: bool

    @property
    def passed(self):
        return self.ordered and self.identity_holds

    def to_json(self):
        out = dict(self.__dict__)
        out["pass"] = self.passed
        return out


def sandwich_check(spec, t, rho=None, eps=None, K=DEFAULT_K, poisson_eps=None, threads=None):
    """Sandwich ordering at ``t`` plus the Poisson identity for the smoothed count.

    ``rhs_minus`` and ``rhs_plus`` are the smoothed counts at ``t -/+ eps``
    (``eps`` from the schedule unless given); ``lhs`` is the smoothed count at
    ``t`` with ``poisson_eps`` (default ``eps``), compared against the
    frequency sum. The identity holds when the gap is within the tail bound
    plus both quadrature errors.
    """
    t = float(t)
    if t < 2 and eps is None:
        raise ValueError("the sandwich check needs t >= 2")
    eps = epsilon_schedule(spec.d, t) if eps is None else float(eps)
    rho = rho or Mollifier(d=spec.d)
    exact = count_lattice_points(spec, Fraction(t))
    if eps == 0:
        lo = hi = float(exact)
    else:
        lo = smoothed_count(spec, t - eps, eps, rho)
        hi = smoothed_count(spec, t + eps, eps, rho)
    pe = eps if poisson_eps is None else float(poisson_eps)
    if pe == 0:
        lhs, gap, tail, tol, rhs = float(exact), 0.0, 0.0, 0.0, float(exact)
    else:
        sm = smoothed_count_detail(spec, t, pe, rho)
        ps = poisson_rhs(spec, t, pe, rho, K=K, threads=threads)
        lhs, rhs = sm.value, ps.value
        gap = abs(sm.value - ps.value)
        tail = ps.tail_bound
        tol = ps.tail_bound + ps.quadrature_error + sm.error
    theta = predicted_exponents(spec).overall
    return SandwichVerdict(
        t=t,
        eps=eps,
        lhs=lhs,
        exact=exact,
        rhs_minus=lo,
        rhs_plus=hi,
        poisson_eps=pe,
        poisson_rhs=rhs,
        poisson_gap=gap,
        tail_bound=tail,
        tolerance=tol,
        normalized_remainder=abs(exact - volume(spec) * t**spec.d) / t**theta,
        ordered=bool(lo <= exact <= hi),
        identity_holds=bool(gap <= tol),
    )
