"""Block-structured domains of finite type.

A domain is described by ``d`` coordinates split into consecutive blocks.
Block ``p`` carries even exponents ``omega_l`` for its coordinates and an
outer exponent ``m_p``; the body is

    { x : sum_p ( sum_{l in block p} x_l ** omega_l ) ** m_p <= 1 }.

Coordinates and blocks are indexed from zero throughout the library.
"""

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .special import gamma


class SpecError(ValueError):
    """Invalid domain parameters.

    ``field`` names the offending entry (``"omegas"``, ``"ms"``, ``"d"`` ...)
    and ``index`` locates it, e.g. ``(block, position)`` for an exponent.
    """

    def __init__(self, message, field=None, index=None):
        super().__init__(message)
        self.field = field
        self.index = index


@dataclass(frozen=True)
class ExponentTable:
    p_of: tuple
    m_jl: np.ndarray
    nu: tuple
    eta: tuple


@dataclass(frozen=True)
class ExponentTerm:
    axis: int
    subset: tuple
    exponent: float


@dataclass(frozen=True)
class ExponentReport:
    axis_terms: tuple
    subset_terms: tuple
    omega_max: int
    simplified: float
    overall: float

    def terms(self):
        return self.axis_terms + self.subset_terms


@dataclass(frozen=True)
class DomainSpec:
    d: int
    blocks: tuple
    ms: tuple
    name: str = field(default="", compare=False)

    @property
    def n_blocks(self):
        return len(self.blocks)

    @cached_property
    def omegas(self):
        return np.array([w for blk in self.blocks for w in blk], dtype=np.int64)

    @cached_property
    def distinct_omegas(self):
        return tuple(int(w) for w in np.unique(self.omegas))

    @cached_property
    def offsets(self):
        """Block boundaries d_0 = 0 < d_1 < ... < d_n = d."""
        out = [0]
        for blk in self.blocks:
            out.append(out[-1] + len(blk))
        return tuple(out)

    @cached_property
    def block_of(self):
        return np.array([p for p, blk in enumerate(self.blocks) for _ in blk], dtype=np.int64)

    @cached_property
    def m_of(self):
        """Outer exponent of the block holding each coordinate."""
        return np.array([self.ms[p] for p in self.block_of], dtype=np.int64)

    @cached_property
    def table(self):
        p_of = tuple(int(p) for p in self.block_of)
        m_jl = np.ones((self.d, self.d), dtype=np.int64)
        for j in range(self.d):
            for l in range(self.d):
                if p_of[j] != p_of[l]:
                    m_jl[j, l] = self.ms[p_of[l]]
        m_jl.flags.writeable = False
        nu, eta = [], []
        for j in range(self.d):
            others = [int(m_jl[j, l] * self.omegas[l]) for l in range(self.d) if l != j]
            nu.append(sum(Fraction(1, k) for k in others))
            eta.append(reduce(math.lcm, others, 1))
        return ExponentTable(p_of=p_of, m_jl=m_jl, nu=tuple(nu), eta=tuple(eta))

    def to_json(self):
        return {
            "d": self.d,
            "blocks": [{"omegas": list(blk)} for blk in self.blocks],
            "ms": list(self.ms),
        }


def validate_spec(raw):
    """Check raw parameters and return a :class:`DomainSpec`.

    ``raw`` is a mapping with keys ``d``, ``blocks`` and ``ms``; each block is
    either a list of exponents or a mapping ``{"omegas": [...]}``.
    """
    try:
        d = raw["d"]
        blocks_raw = raw["blocks"]
        ms_raw = raw["ms"]
    except (KeyError, TypeError) as exc:
        raise SpecError(f"missing field {exc}", field=str(exc)) from None

    if not isinstance(d, int) or isinstance(d, bool) or d < 2:
        raise SpecError(f"dimension must be an integer >= 2, got {d!r}", field="d")
    if not blocks_raw:
        raise SpecError("at least one block is required", field="blocks")

    blocks = []
    for p, blk in enumerate(blocks_raw):
        omegas = blk["omegas"] if isinstance(blk, dict) else blk
        if not omegas:
            raise SpecError(f"block {p} is empty", field="blocks", index=p)
        for i, w in enumerate(omegas):
            if not isinstance(w, int) or isinstance(w, bool):
                raise SpecError(f"omega[{p}][{i}] = {w!r} is not an integer", field="omegas", index=(p, i))
            if w < 2:
                raise SpecError(f"omega[{p}][{i}] = {w} is below 2", field="omegas", index=(p, i))
            if w % 2:
                raise SpecError(f"omega[{p}][{i}] = {w} is odd", field="omegas", index=(p, i))
        blocks.append(tuple(omegas))

    if len(ms_raw) != len(blocks):
        raise SpecError(f"{len(ms_raw)} outer exponents for {len(blocks)} blocks", field="ms")
    for p, m in enumerate(ms_raw):
        if not isinstance(m, int) or isinstance(m, bool) or m < 1:
            raise SpecError(f"ms[{p}] = {m!r} must be an integer >= 1", field="ms", index=p)

    total = sum(len(b) for b in blocks)
    if total != d:
        raise SpecError(f"blocks hold {total} coordinates but d = {d}", field="d")
    if d == 2:
        warnings.warn("d = 2 is accepted for testing; the remainder theory assumes d >= 3", stacklevel=2)

    spec = DomainSpec(d=d, blocks=tuple(blocks), ms=tuple(ms_raw), name=str(raw.get("name", "")))
    spec.table  # noqa: B018 - computed once, cached on the instance
    return spec


def load_spec(path):
    path = Path(path)
    with path.open() as fh:
        raw = json.load(fh)
    raw.setdefault("name", path.stem)
    return validate_spec(raw)


def supersphere(d, omega):
    return validate_spec({"d": d, "blocks": [[omega] * d], "ms": [1], "name": f"ss{omega}_d{d}"})


def int_power(x, n):
    """``x**n`` for a nonnegative integer ``n`` by repeated squaring (much faster than float pow)."""
    out = None
    base = x
    while n:
        if n & 1:
            out = base if out is None else out * base
        n >>= 1
        if n:
            base = base * base
    return np.ones_like(x) if out is None else out


def coordinate_powers(spec, x):
    """``x_l**omega_l`` for every coordinate (last axis)."""
    x = np.asarray(x, dtype=float)
    if len(spec.distinct_omegas) == 1:
        return int_power(x, int(spec.omegas[0]))
    out = np.empty_like(x)
    for w in spec.distinct_omegas:
        cols = np.flatnonzero(spec.omegas == w)
        out[..., cols] = int_power(x[..., cols], int(w))
    return out


def block_sums(spec, x):
    """Inner sums ``sum_{l in block p} x_l**omega_l``, shape ``x.shape[:-1] + (n,)``."""
    powers = coordinate_powers(spec, x)
    return np.stack(
        [powers[..., a:b].sum(axis=-1) for a, b in zip(spec.offsets[:-1], spec.offsets[1:])],
        axis=-1,
    )


def eval_F(spec, x):
    """Defining function; negative inside, zero on the boundary."""
    s = block_sums(spec, x)
    total = 0.0
    for p, m in enumerate(spec.ms):
        total = total + int_power(s[..., p], m)
    return total - 1.0


def grad_F(spec, x):
    x = np.asarray(x, dtype=float)
    s = block_sums(spec, x)
    outer = np.stack([m * int_power(s[..., p], m - 1) for p, m in enumerate(spec.ms)], axis=-1)
    odd = np.empty_like(x)
    for w in np.unique(spec.omegas):
        cols = np.flatnonzero(spec.omegas == w)
        odd[..., cols] = int_power(x[..., cols], int(w) - 1)
    return outer[..., spec.block_of] * spec.omegas * odd


def cone_axes(spec):
    """One axis per class of coordinates exchanged by a symmetry of D (same block, same exponent)."""
    seen, out = set(), []
    for j in range(spec.d):
        key = (int(spec.block_of[j]), int(spec.omegas[j]))
        if key not in seen:
            seen.add(key)
            out.append(j)
    return out


def m_exponent(spec, j, l):
    if not (0 <= j < spec.d and 0 <= l < spec.d):
        raise IndexError(f"coordinate pair ({j}, {l}) outside 0..{spec.d - 1}")
    return int(spec.table.m_jl[j, l])


def predicted_exponents(spec):
    """Enumerate every term of the remainder bound and its maximum."""
    d = spec.d
    if d < 3:
        warnings.warn("remainder exponents are only claimed for d >= 3", stacklevel=2)
    mw = spec.table.m_jl * spec.omegas[None, :]
    axis_terms, subset_terms = [], []
    for j in range(d):
        inv = [Fraction(1, int(mw[j, l])) for l in range(d)]
        axis_terms.append(ExponentTerm(j, (j,), float(d - 1 - sum(inv[l] for l in range(d) if l != j))))
        others = [l for l in range(d) if l != j]
        for i in range(2, d + 1):
            for rest in itertools.combinations(others, i - 1):
                subset = tuple(sorted((j,) + rest))
                outside = sum(inv[l] for l in range(d) if l not in subset)
                e = d - 1 - Fraction(i - 1, d + 1) - Fraction(2 * d, d + 1) * outside
                subset_terms.append(ExponentTerm(j, subset, float(e)))
    omega = int(mw.max())
    simplified = max((d - 1) * (1 - 1 / omega), d - 2 + 2 / (d + 1))
    overall = max(t.exponent for t in axis_terms + subset_terms)
    return ExponentReport(
        axis_terms=tuple(axis_terms),
        subset_terms=tuple(subset_terms),
        omega_max=omega,
        simplified=simplified,
        overall=overall,
    )


def volume(spec):
    """Closed-form volume from the block-wise Dirichlet integral."""
    num = 1.0
    total = 0.0
    for blk, m in zip(spec.blocks, spec.ms):
        alpha = sum(1.0 / w for w in blk)
        c = math.prod(2.0 * gamma(1.0 + 1.0 / w) for w in blk) / gamma(1.0 + alpha)
        num *= c * alpha / m * gamma(alpha / m)
        total += alpha / m
    return num / gamma(1.0 + total)


def radial_boundary(spec, u):
    """Distance from the origin to the boundary along ``u``."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    ms = np.asarray(spec.ms)
    coef = np.abs(u) ** spec.omegas

    def f(r):
        s = np.array([(coef[a:b] * r ** spec.omegas[a:b]).sum() for a, b in zip(spec.offsets[:-1], spec.offsets[1:])])
        return float((s**ms).sum() - 1.0)

    # every coordinate of D is bounded by 1
    hi = 1.0 / np.abs(u).max()
    if f(hi) <= 0.0:
        return hi
    r = brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return r
