"""Composite Gauss-Legendre rules used by the covariance assembly."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def panels(edges, order: int = 16):
    """Nodes and weights of a Gauss-Legendre rule on each panel ``[edges[i], edges[i+1]]``."""
    edges = np.asarray(edges, dtype=float)
    t, w = _leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (half * t + 0.5 * (a + b)).ravel(), (half * w).ravel()


def uniform_edges(a: float, b: float, width: float):
    n = max(1, int(np.ceil((b - a) / width)))
    return np.linspace(a, b, n + 1)


def graded_edges(a: float, b: float, toward: str, ratio: float = 0.15, smallest: float = 1e-15):
    """Panel edges on ``[a, b]`` refined geometrically toward one endpoint.

    Used for integrable endpoint singularities (``log|u|``): the panels shrink
    by ``ratio`` until their width is below ``smallest * (b - a)``.
    """
    length = b - a
    offsets = [1.0]
    while offsets[-1] > smallest:
        offsets.append(offsets[-1] * ratio)
    offsets.append(0.0)
    offsets = np.array(offsets) * length
    if toward == "a":
        return np.sort(a + offsets)
    return np.sort(b - offsets)
