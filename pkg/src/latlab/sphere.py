"""Product quadrature rules on the unit sphere S^k embedded in R^(k+1)."""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@lru_cache(maxsize=None)
def sphere_rule(k, n):
    """Nodes ``(N, k+1)`` and weights ``(N,)`` integrating over S^k.

    ``n`` is the number of points in each polar coordinate; the last circle
    uses ``2n`` equally spaced angles, which is spectrally accurate for smooth
    periodic integrands.
    """
    if k < 1:
        raise ValueError("sphere dimension must be >= 1")
    m = 2 * n
    ang = 2 * np.pi * np.arange(m) / m
    nodes = np.column_stack([np.cos(ang), np.sin(ang)])
    weights = np.full(m, 2 * np.pi / m)
    for j in range(2, k + 1):
        # S^j = {(x, sqrt(1-x^2) y) : y in S^(j-1)} with measure (1-x^2)^((j-2)/2) dx dS^(j-1)
        a = (j - 2) / 2
        x, wx = roots_jacobi(n, a, a)
        r = np.sqrt(1 - x**2)
        nodes = np.concatenate(
            [np.column_stack([np.full(len(nodes), xi), ri * nodes]) for xi, ri in zip(x, r)]
        )
        weights = np.concatenate([wi * weights for wi in wx])
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights
