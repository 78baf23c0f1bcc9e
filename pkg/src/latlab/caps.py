"""Normal points, boundary caps, and their size.

A cap of depth ``delta`` around ``x(xi)`` is the part of the boundary lying
within ``delta`` of the tangent plane at ``x(xi)``. Its projection onto that
plane is the slice of ``D`` by the parallel plane pushed ``delta`` inwards,
which is how both extents and surface measure are computed here.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .counting import default_threads
from .domain import eval_F, grad_F
from .slices import fit_frames, frame_exits, ray_exit  # noqa: F401 - ray_exit re-exported
from .sphere import sphere_rule


class CapError(ValueError):
    """Cap too deep for the graph parametrization over the tangent plane."""


@dataclass(frozen=True)
class CapStats:
    xi: np.ndarray
    delta: float
    support_point: np.ndarray
    extents: np.ndarray
    measure: float
    bound: float = float("nan")

    @property
    def ratio(self):
        return self.measure / self.bound


def _solve_increasing(f, lo=-60.0, hi=60.0):
    """Root of an increasing function of a log-scale variable."""
    while f(lo) > 0:
        lo -= 20.0
    while f(hi) < 0:
        hi += 20.0
    return brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def support_point(spec, xi):
    """The boundary point whose outward unit normal is ``xi/|xi|``.

    The stationarity conditions decouple block by block: for a block
    multiplier ``mu`` the coordinates are ``(mu |n_l| / omega_l)**(1/(omega_l-1))``.
    Each block multiplier is a monotone function of the global one, which is
    fixed by ``F = 0``; all three solves are bracketed 1-D roots.
    """
    xi = np.asarray(xi, dtype=float)
    norm = np.linalg.norm(xi)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    n = xi / norm
    v = np.abs(n)
    w = spec.omegas.astype(float)
    blocks = [(a, b) for a, b in zip(spec.offsets[:-1], spec.offsets[1:])]

    def coords(a, b, log_mu):
        vv = v[a:b]
        out = np.zeros(b - a)
        pos = vv > 0
        ww = w[a:b][pos]
        out[pos] = np.exp((log_mu + np.log(vv[pos] / ww)) / (ww - 1))
        return out

    def block_sum(a, b, log_mu):
        return float(np.sum(coords(a, b, log_mu) ** w[a:b]))

    def block_mu(p, log_lam):
        a, b = blocks[p]
        m = spec.ms[p]
        if m == 1:
            return log_lam
        # mu * m * S(mu)**(m-1) = lambda, increasing in mu
        return _solve_increasing(lambda lm: lm + math.log(m) + (m - 1) * math.log(block_sum(a, b, lm)) - log_lam)

    active = [p for p, (a, b) in enumerate(blocks) if np.any(v[a:b] > 0)]

    def total(log_lam):
        return sum(block_sum(*blocks[p], block_mu(p, log_lam)) ** spec.ms[p] for p in active) - 1.0

    log_lam = _solve_increasing(total)
    x = np.zeros(spec.d)
    for p in active:
        a, b = blocks[p]
        x[a:b] = coords(a, b, block_mu(p, log_lam))
    x *= np.sign(n)
    return _newton_polish(spec, x, n)


def _newton_polish(spec, x, n, steps=2):
    """A couple of Newton steps on {grad F = lam n, F = 0} restricted to nonzero coordinates."""
    active = np.abs(x) > 1e-300
    for _ in range(steps):
        g = grad_F(spec, x)
        lam = float(g @ n)
        res = np.concatenate([(g - lam * n)[active], [eval_F(spec, x)]])
        if np.max(np.abs(res)) < 1e-15:
            break
        k = int(active.sum())
        h = _hessian(spec, x)[np.ix_(active, active)]
        jac = np.zeros((k + 1, k + 1))
        jac[:k, :k] = h
        jac[:k, k] = -n[active]
        jac[k, :k] = g[active]
        try:
            step = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError:
            break
        trial = x.copy()
        trial[active] += step[:k]
        if np.max(np.abs(step[:k])) > 1e-6 * max(1.0, np.max(np.abs(x))):
            break  # polishing only; never move far from the bracketed solution
        x = trial
    return x


def _hessian(spec, x):
    w = spec.omegas.astype(float)
    d = spec.d
    h = np.zeros((d, d))
    for p, (a, b) in enumerate(zip(spec.offsets[:-1], spec.offsets[1:])):
        m = spec.ms[p]
        xb = x[a:b]
        s = float(np.sum(xb ** w[a:b]))
        dsdx = w[a:b] * xb ** (w[a:b] - 1)
        blk = m * s ** (m - 1) * np.diag(w[a:b] * (w[a:b] - 1) * xb ** (w[a:b] - 2))
        if m > 1:
            blk += m * (m - 1) * s ** (m - 2) * np.outer(dsdx, dsdx)
        h[a:b, a:b] = blk
    return h


def support_value(spec, xi):
    """Support function ``max_{x in D} <x, xi/|xi|>`` and its maximizer."""
    xi = np.asarray(xi, dtype=float)
    x = support_point(spec, xi)
    return float(x @ xi / np.linalg.norm(xi)), x


def kkt_residuals(spec, x, xi):
    """``(|F(x)|, angle between grad F(x) and xi)``."""
    g = grad_F(spec, x)
    n = np.asarray(xi, float) / np.linalg.norm(xi)
    cosang = float(g @ n / np.linalg.norm(g))
    sinang = float(np.linalg.norm(g / np.linalg.norm(g) - cosang * n))
    return abs(float(eval_F(spec, x))), math.atan2(sinang, cosang)


def orthonormal_complement(n):
    """``(d, d-1)`` matrix whose columns span the plane orthogonal to ``n``."""
    n = np.asarray(n, float) / np.linalg.norm(n)
    q, _ = np.linalg.qr(np.column_stack([n, np.eye(len(n))]))
    basis = q[:, 1 : len(n)]
    return basis


def _angular_resolution(d):
    return {3: 128, 4: 20, 5: 10}.get(d, 8)


class _Cap:
    """Geometry of the lid slice for one (direction, depth) pair."""

    def __init__(self, spec, xi, delta, n_angle=None, n_radial=24):
        if not 0 < delta <= 1:
            raise ValueError("cap depth must lie in (0, 1]")
        self.spec = spec
        xi = np.asarray(xi, float)
        self.xi = xi
        self.n = xi / np.linalg.norm(xi)
        self.h, self.a = support_value(spec, xi)
        self.delta = delta
        level = self.h - delta
        if level <= 0:
            raise CapError(f"depth {delta} reaches past the centre (support value {self.h:.6g})")
        self.center = self.a * (level / self.h)
        self.basis = orthonormal_complement(self.n)
        k = spec.d - 2
        n_angle = n_angle or _angular_resolution(spec.d)
        if k == 0:
            self.dirs = np.array([[1.0], [-1.0]])
            self.wdir = np.array([1.0, 1.0])
        else:
            self.dirs, self.wdir = sphere_rule(k, n_angle // 2 if k == 1 else n_angle)
        c, T = fit_frames(spec, self.center[None, :], self.basis)
        self.center, self.frame = c[0], self.basis @ T[0]
        self.rim = frame_exits(spec, c, T, self.basis, self.dirs)[0]
        self.jac = abs(np.linalg.det(T[0]))
        self.n_radial = n_radial

    def lift(self, q):
        """Height ``tau in [0, delta]`` with ``q + tau n`` on the boundary."""
        lo = np.zeros(len(q))
        hi = np.full(len(q), self.delta)
        n = self.n
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            inside = eval_F(self.spec, q + mid[:, None] * n) <= 0
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        tau = hi
        for _ in range(3):
            p = q + tau[:, None] * n
            f = eval_F(self.spec, p)
            df = grad_F(self.spec, p) @ n
            tau = np.where(df > 0, tau - f / np.where(df > 0, df, 1.0), tau)
        return tau

    def measure(self):
        d = self.spec.d
        x, w = np.polynomial.legendre.leggauss(self.n_radial)
        x = 0.5 * (x + 1)
        w = 0.5 * w
        r = self.rim[:, None] * x[None, :]  # (dirs, radial)
        offs = (self.dirs @ self.frame.T)[:, None, :] * r[..., None]
        q = (self.center + offs).reshape(-1, d)
        tau = self.lift(q)
        y = q + tau[:, None] * self.n
        g = grad_F(self.spec, y)
        normal = g @ self.n
        if np.any(normal <= 0):
            raise CapError("cap reaches the equator of the tangent direction")
        jac = (np.linalg.norm(g, axis=1) / normal).reshape(r.shape)
        radial = np.sum(jac * r ** (d - 2) * w[None, :], axis=1) * self.rim
        return float(self.jac * np.sum(self.wdir * radial))

    def _rim(self, dirs):
        v = dirs @ self.frame.T
        rho = ray_exit(self.spec, np.broadcast_to(self.center, v.shape), v)
        return self.center + rho[:, None] * v

    def extents(self, polish=True, rounds=8, n_local=7):
        """Per-coordinate ``max |y_l - a_l|`` over the cap.

        A linear function on the cap peaks either on the rim (depth exactly
        ``delta``) or at a point of ``D`` extreme in a coordinate direction, so
        both candidate sets are searched. Rim maxima start from the angular
        grid and are refined by shrinking local grids on the sphere.
        """
        spec = self.spec
        d = spec.d
        diff = self.center + self.rim[:, None] * (self.dirs @ self.frame.T) - self.a
        out = np.abs(diff).max(axis=0)
        k = d - 2
        if polish and k >= 1:
            starts = [(l, sgn, self.dirs[int(np.argmax(sgn * diff[:, l]))]) for l in range(d) for sgn in (1.0, -1.0)]
            best = np.array([s[2] for s in starts])
            coord = np.array([s[0] for s in starts])
            sign = np.array([s[1] for s in starts])
            spread = 2 * np.pi / len(self.dirs) ** (1 / k)
            grid = np.stack(np.meshgrid(*([np.linspace(-1, 1, n_local)] * k), indexing="ij"), -1).reshape(-1, k)
            for _ in range(rounds):
                cand = []
                for u in best:
                    tang = orthonormal_complement(u)
                    c = u + spread * grid @ tang.T
                    cand.append(c / np.linalg.norm(c, axis=1, keepdims=True))
                cand = np.array(cand)  # (starts, grid, d-1)
                pts = self._rim(cand.reshape(-1, d - 1)).reshape(len(best), len(grid), d)
                score = sign[:, None] * (pts[np.arange(len(best)), :, coord] - self.a[coord][:, None])
                pick = np.argmax(score, axis=1)
                best = cand[np.arange(len(best)), pick]
                for s_idx, val in enumerate(score[np.arange(len(best)), pick]):
                    out[coord[s_idx]] = max(out[coord[s_idx]], val)
                spread /= (n_local - 1) / 2
        for l in range(d):
            for sgn in (1.0, -1.0):
                e = np.zeros(d)
                e[l] = sgn
                if self.h - e @ self.n < self.delta:
                    out[l] = max(out[l], abs(sgn - self.a[l]))
        return out


def cap_extents(spec, xi, delta, polish=True, **kw):
    return _Cap(spec, xi, delta, **kw).extents(polish=polish)


def cap_measure(spec, xi, delta, **kw):
    """Surface measure of the cap of depth ``delta`` around ``x(xi)``."""
    return _Cap(spec, xi, delta, **kw).measure()


def cap_stats(spec, xi, delta, polish=True, **kw):
    cap = _Cap(spec, xi, delta, **kw)
    return CapStats(
        xi=np.asarray(xi, float),
        delta=delta,
        support_point=cap.a,
        extents=cap.extents(polish=polish),
        measure=cap.measure(),
    )


def extent_bound(spec, j, xi, t):
    """Per-coordinate bound ``min{t^(-1/(m w)), t^(-1/2) |n_l|^(-(m w - 2)/(2(m w - 1)))}``."""
    n = np.abs(np.asarray(xi, float)) / np.linalg.norm(xi)
    mw = (spec.table.m_jl[j] * spec.omegas).astype(float)
    first = t ** (-1.0 / mw)
    with np.errstate(divide="ignore"):
        second = t**-0.5 * n ** (-(mw - 2) / (2 * (mw - 1)))
    return np.minimum(first, second)


def lemma1_bound(spec, j, xi, t):
    b = extent_bound(spec, j, xi, t)
    return float(np.prod(np.delete(b, j)))


def lemma1_check(spec, j, xi_grid, t_grid, eps0=None, polish=True, threads=None, tol=0.05):
    """Cap measures and extents at ``delta = 1/t`` against the product bound.

    Rows carry the measure ratio ``sigma(cap) / prod_{l != j} b_l`` and the
    extent ratios ``max|X_l| / b_l``. The verdict asks for a top-decade
    log-slope of at most 0.05 for the measure ratio and for every extent
    ratio, in every direction.
    """
    from .fourier import default_epsilon0  # late import keeps module order simple
    from .remainder import top_decade_slope

    d = spec.d
    eps0 = default_epsilon0(d) if eps0 is None else eps0
    t_grid = np.asarray(t_grid, float)
    for xi in xi_grid:
        n = np.abs(np.asarray(xi, float)) / np.linalg.norm(xi)
        if n[j] < eps0 * (1 - 1e-12):
            raise ValueError(f"direction {tuple(np.round(xi, 4))} lies outside the cone of axis {j}")

    def one(job):
        xi, t = job
        st = cap_stats(spec, xi, 1.0 / t, polish=polish)
        b = extent_bound(spec, j, xi, t)
        bound = float(np.prod(np.delete(b, j)))
        return st, b, bound

    jobs = [(np.asarray(xi, float), t) for xi in xi_grid for t in t_grid]
    threads = threads or default_threads()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(job) for job in jobs]

    rows, slopes = [], []
    others = [l for l in range(d) if l != j]
    for i, xi in enumerate(xi_grid):
        chunk = results[i * len(t_grid) : (i + 1) * len(t_grid)]
        meas = np.array([c[0].measure / c[2] for c in chunk])
        ext = np.array([c[0].extents[others] / c[1][others] for c in chunk])
        slopes.append(top_decade_slope(t_grid, meas))
        for col in range(len(others)):
            slopes.append(top_decade_slope(t_grid, ext[:, col]))
        for (st, b, bound), t in zip(chunk, t_grid):
            rows.append(
                {
                    "xi": tuple(float(v) for v in st.xi / np.linalg.norm(st.xi)),
                    "t": float(t),
                    "delta": 1.0 / float(t),
                    "extents": tuple(float(v) for v in st.extents),
                    "measure": st.measure,
                    "bound": bound,
                    "ratio": st.measure / bound,
                    "extent_ratios": tuple(float(st.extents[l] / b[l]) for l in others),
                }
            )
    worst = max(slopes)
    return {"rows": rows, "slopes": slopes, "max_slope": worst, "pass": worst <= tol}
