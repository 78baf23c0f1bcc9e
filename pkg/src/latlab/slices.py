"""Integration over flat convex sections of D.

A section ``{c + B y : y in K}`` (``B`` an orthonormal ``(d, d-1)`` frame)
is handled in polar form around an interior point. Near the support ends the
sections of degenerate boundary points become needles, with axis ratios of
several hundred, where a fixed angular rule sees almost nothing. Each section
therefore gets its own affine frame: the centre moves to the centroid and the
directions are stretched by the square root of the second moment matrix, a
few times over, until the section looks round in the new coordinates.
"""

import numpy as np

from .domain import eval_F, grad_F
from .sphere import sphere_rule


def ray_exit(spec, c, v, bisect=30, newton=5):
    """Distance ``rho >= 0`` with ``F(c + rho v) = 0`` for interior ``c`` (vectorized)."""
    c = np.atleast_2d(c)
    v = np.atleast_2d(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        to_face = np.where(v > 0, (1 - c) / v, np.where(v < 0, (-1 - c) / v, np.inf))
    hi = to_face.min(axis=1)
    lo = np.zeros_like(hi)
    for _ in range(bisect):
        mid = 0.5 * (lo + hi)
        inside = eval_F(spec, c + mid[:, None] * v) <= 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    rho = hi
    for _ in range(newton):
        p = c + rho[:, None] * v
        f = eval_F(spec, p)
        df = np.sum(grad_F(spec, p) * v, axis=1)
        step = np.where(df > 0, f / np.where(df > 0, df, 1.0), 0.0)
        rho = np.clip(rho - step, lo, None)
    return rho


def _sqrt_psd(m):
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)[..., None, :]) @ np.swapaxes(vecs, -1, -2)


def coarse_rule(k):
    """Small sphere rule (on ``S^k``) used while fitting frames."""
    return sphere_rule(k, {1: 16, 2: 8}.get(k, 4))


def fit_frames(spec, centers, basis, iters=4):
    """Adapted polar frames for a batch of sections.

    ``centers`` has shape ``(S, d)``; all sections share the plane directions
    ``basis``. Returns new centres ``(S, d)`` and stretch matrices
    ``(S, d-1, d-1)`` with unit determinant.
    """
    centers = np.atleast_2d(np.asarray(centers, float))
    n_sec, d = centers.shape
    k = d - 1
    c = centers.copy()
    T = np.broadcast_to(np.eye(k), (n_sec, k, k)).copy()
    dirs, wdir = coarse_rule(k - 1) if k > 1 else (np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]))
    for _ in range(iters):
        rho = frame_exits(spec, c, T, basis, dirs)
        vol = (rho**k @ wdir) / k
        cen = np.einsum("sn,n,nj->sj", rho ** (k + 1), wdir, dirs) / (k + 1) / vol[:, None]
        mom = np.einsum("sn,n,ni,nj->sij", rho ** (k + 2), wdir, dirs, dirs) / (k + 2) / vol[:, None, None]
        mom = mom - cen[:, :, None] * cen[:, None, :]
        scale = _sqrt_psd(mom)
        det = np.abs(np.linalg.det(scale)) ** (1.0 / k)
        ok = det > 0
        c = c + np.einsum("sij,sj->si", T, cen) @ basis.T
        T[ok] = T[ok] @ (scale[ok] / det[ok, None, None])
    return c, T


def frame_exits(spec, c, T, basis, dirs):
    """Exit parameters ``(S, N)`` of the rays ``c + rho * basis @ T @ theta``."""
    n_sec, d = c.shape
    v = np.einsum("sij,nj->sni", T, dirs) @ basis.T
    return ray_exit(spec, np.repeat(c, len(dirs), axis=0), v.reshape(-1, d)).reshape(n_sec, len(dirs))


def section_areas(spec, centers, basis, rules, iters=4):
    """``(d-1)``-volumes of the sections through ``centers`` spanned by ``basis``.

    ``rules`` is a list of ``(dirs, weights)`` sphere rules; one area array is
    returned per rule, all sharing the same fitted frames.
    """
    c, T = fit_frames(spec, centers, basis, iters)
    k = basis.shape[1]
    jac = np.abs(np.linalg.det(T))
    return [jac * (frame_exits(spec, c, T, basis, dirs) ** k @ w) / k for dirs, w in rules]
