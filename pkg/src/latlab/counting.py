"""Exact lattice point counts in dilates ``tD``.

Membership of an integer point is decided in exact integer arithmetic after
clearing the rational scale ``t = num/den`` from the defining inequality.
Floating point only brackets the innermost coordinate range; any value that
lands within a relative 1e-9 of an integer is re-decided exactly.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

import numpy as np

from .domain import volume

_TIE = 1e-9
BRUTE_FORCE_CAP = 20


@dataclass(frozen=True)
class CountResult:
    t: Fraction
    count: int
    volume_term: float
    remainder: float


def as_rational(t):
    """Exact rational for ``t``; strings such as ``"2.5"`` become ``5/2``."""
    if isinstance(t, Fraction):
        return t
    if isinstance(t, str):
        return Fraction(Decimal(t.strip()))
    if isinstance(t, (int, np.integer)):
        return Fraction(int(t))
    return Fraction(float(t))


def default_threads():
    try:
        return max(1, int(os.environ.get("LATLAB_THREADS", "1")))
    except ValueError:
        return 1


class _Threshold:
    """Integer form of ``F(k/t) <= 0`` for a fixed rational ``t``."""

    def __init__(self, spec, t):
        self.spec = spec
        self.num, self.den = t.numerator, t.denominator
        self.wmax = [max(blk) for blk in spec.blocks]
        self.top = max(w * m for w, m in zip(self.wmax, spec.ms))
        self.rhs = self.num**self.top

    def lhs(self, k):
        total = 0
        for p, (a, b) in enumerate(zip(self.spec.offsets[:-1], self.spec.offsets[1:])):
            wp = self.wmax[p]
            inner = 0
            for l in range(a, b):
                w = int(self.spec.omegas[l])
                inner += (int(k[l]) * self.den) ** w * self.num ** (wp - w)
            m = self.spec.ms[p]
            total += inner**m * self.num ** (self.top - wp * m)
        return total

    def member(self, k):
        return self.lhs(k) <= self.rhs


def is_member(spec, k, t):
    """Exact test ``k in tD`` for an integer vector ``k``."""
    t = as_rational(t)
    if t <= 0:
        raise ValueError("scale t must be positive")
    return _Threshold(spec, t).member(k)


def _exact_max(thr, prefix, i, guess):
    """Largest ``x >= 0`` with ``(0,..,0,x,prefix)`` inside, or -1."""
    k = [0] * thr.spec.d
    k[i + 1 :] = [int(v) for v in prefix]
    x = max(int(guess), 0)
    k[i] = x
    if thr.member(k):
        while True:
            k[i] = x + 1
            if not thr.member(k):
                return x
            x += 1
    while x > 0:
        x -= 1
        k[i] = x
        if thr.member(k):
            return x
    return -1


def _float_bound(spec, tf, prefix, i):
    """Float upper limit for coordinate ``i`` given coordinates ``i+1..`` in ``prefix``.

    ``prefix`` has shape ``(N, d-1-i)``; lower coordinates are taken as zero.
    Returns ``(b, v)`` with ``b`` the scaled budget left for ``x_i**omega_i``
    (negative when infeasible) and ``v = t * b**(1/omega_i)``.
    """
    d = spec.d
    q = int(spec.block_of[i])
    a, end = spec.offsets[q], spec.offsets[q + 1]
    n = prefix.shape[0]
    u = prefix / tf
    w = spec.omegas
    # u[:, c] holds coordinate i+1+c
    pw = u ** w[i + 1 :] if d - 1 - i else np.zeros((n, 0))
    rest_q = pw[:, : end - i - 1].sum(axis=1)
    outer = np.zeros(n)
    for p in range(q + 1, spec.n_blocks):
        lo, hi = spec.offsets[p] - i - 1, spec.offsets[p + 1] - i - 1
        outer += pw[:, lo:hi].sum(axis=1) ** spec.ms[p]
    room = 1.0 - outer
    with np.errstate(invalid="ignore"):
        b = np.where(room >= 0, np.abs(room) ** (1.0 / spec.ms[q]), -1.0) - rest_q
    v = tf * np.clip(b, 0.0, None) ** (1.0 / w[i])
    return b, v


def coordinate_range(spec, fixed, t):
    """Integer range of coordinate ``i = d-1-len(fixed)`` given ``fixed`` for ``i+1..d-1``.

    Lower coordinates are set to zero, so the range is where membership can
    still hold. Returns an empty range for an infeasible prefix.
    """
    t = as_rational(t)
    fixed = [abs(int(v)) for v in fixed]
    i = spec.d - 1 - len(fixed)
    if i < 0:
        raise ValueError("too many fixed coordinates")
    thr = _Threshold(spec, t)
    _, v = _float_bound(spec, float(t), np.array([fixed], dtype=float), i)
    m = _exact_max(thr, fixed, i, int(np.floor(v[0])))
    return range(-m, m + 1) if m >= 0 else range(0)


def _prefixes(spec, tf, outer_values):
    """Nonnegative prefixes for coordinates 1..d-1 with outer coordinate in ``outer_values``."""
    d = spec.d
    pref = np.asarray(outer_values, dtype=float).reshape(-1, 1)
    for i in range(d - 2, 0, -1):
        _, v = _float_bound(spec, tf, pref, i)
        top = np.where(np.isfinite(v), np.floor(v * (1 + _TIE) + _TIE), 0).astype(np.int64)
        keep = top >= 0
        pref, top = pref[keep], top[keep]
        reps = top + 1
        idx = np.repeat(np.arange(pref.shape[0]), reps)
        starts = np.cumsum(reps) - reps
        vals = np.arange(reps.sum()) - np.repeat(starts, reps)
        pref = np.column_stack([vals.astype(float), pref[idx]])
    return pref


def _innermost(spec, t, tf, pref, thr):
    """Maximum of coordinate 0 for each prefix (-1 when infeasible)."""
    b, v = _float_bound(spec, tf, pref, 0)
    m = np.floor(v).astype(np.int64)
    m[b < 0] = -1
    near = np.abs(v - np.rint(v)) <= _TIE * np.maximum(1.0, v)
    suspect = np.flatnonzero((np.abs(b) <= 1e-10) | near)
    for r in suspect:
        m[r] = _exact_max(thr, pref[r].astype(np.int64), 0, max(int(m[r]), 0))
    return m


def _count_chunk(spec, t, outer_values):
    tf = float(t)
    thr = _Threshold(spec, t)
    if spec.d == 1:
        raise ValueError("dimension must be at least 2")
    pref = _prefixes(spec, tf, outer_values)
    if pref.shape[0] == 0:
        return 0
    m = _innermost(spec, t, tf, pref, thr)
    ok = m >= 0
    weights = 2 ** np.count_nonzero(pref[ok] > 0, axis=1)
    return int(np.sum(weights * (2 * m[ok] + 1), dtype=np.int64))


def count_lattice_points(spec, t, threads=None):
    """Exact ``#(tD ∩ Z^d)`` using sign folding and analytic innermost ranges."""
    t = as_rational(t)
    if t <= 0:
        raise ValueError("scale t must be positive")
    top = int(np.floor(t))  # every coordinate of D lies in [-1, 1]
    outer = np.arange(top + 1)
    threads = threads or default_threads()
    n_chunks = max(1, min(len(outer), 4 * threads))
    chunks = [c for c in np.array_split(outer, n_chunks) if len(c)]
    if threads == 1 or len(chunks) == 1:
        parts = [_count_chunk(spec, t, c) for c in chunks]
    else:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda c: _count_chunk(spec, t, c), chunks))
    return sum(parts)


def brute_force_count(spec, t, cap=BRUTE_FORCE_CAP):
    """Full scan of ``[-⌊t⌋, ⌊t⌋]^d`` with exact membership (test oracle)."""
    t = as_rational(t)
    if t <= 0:
        raise ValueError("scale t must be positive")
    if t > cap:
        raise ValueError(f"brute force is capped at t <= {cap}")
    top = int(np.floor(t))
    thr = _Threshold(spec, t)
    axis = np.arange(-top, top + 1)
    grids = np.meshgrid(*([axis] * spec.d), indexing="ij")
    total = np.zeros(grids[0].shape, dtype=object)
    for p, (a, b) in enumerate(zip(spec.offsets[:-1], spec.offsets[1:])):
        wp = thr.wmax[p]
        inner = np.zeros(grids[0].shape, dtype=object)
        for l in range(a, b):
            w = int(spec.omegas[l])
            table = np.array([(int(k) * thr.den) ** w * thr.num ** (wp - w) for k in axis], dtype=object)
            inner = inner + table[grids[l] + top]
        m = spec.ms[p]
        total = total + inner**m * thr.num ** (thr.top - wp * m)
    return int(np.count_nonzero(total <= thr.rhs))


def remainder(spec, t, threads=None):
    t = as_rational(t)
    count = count_lattice_points(spec, t, threads=threads)
    vol_term = volume(spec) * float(t) ** spec.d
    return CountResult(t=t, count=count, volume_term=vol_term, remainder=count - vol_term)
