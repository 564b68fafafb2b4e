"""Gauss-Legendre helpers shared by the projection and Green-function code."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def gauss_unit(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def composite_nodes(lo: float, hi: float, panels: int, nodes: int):
    """Nodes (panels, nodes) and matching weights of a composite rule on [lo, hi]."""
    xi, wi = gauss_unit(nodes)
    h = (hi - lo) / panels
    starts = lo + h * np.arange(panels)
    return starts[:, None] + h * xi[None, :], np.broadcast_to(h * wi, (panels, nodes))


def as_values(f, x: np.ndarray) -> np.ndarray:
    """Evaluate a vectorized callable (or constant) on x and broadcast to x.shape."""
    if f is None:
        return np.zeros_like(x, dtype=float)
    if callable(f):
        val = f(x)
    else:
        val = f
    return np.broadcast_to(np.asarray(val, dtype=float), x.shape)
