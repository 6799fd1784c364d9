"""Closed-form reference laws for entropies, negativities and cross-ratios."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Tuple

import numpy as np
from scipy import optimize

#: Reference value of the additive constant in the negativity law.
REFERENCE_NEGATIVITY_CONSTANT = 0.1615
#: Reference effective-cutoff coefficient for touching unit intervals.
REFERENCE_CUTOFF_A = 1.176


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: float


@dataclass
class FitResult:
    """Least-squares fit: named constants, RMS residual and sample count."""

    params: dict
    rms: float
    n_samples: int
    extra: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.params[key]


def cross_ratio_flat(x1: float, x2: float, x3: float, x4: float) -> float:
    """``(x2-x1)(x4-x3) / ((x3-x1)(x4-x2))`` for ``x1 < x2 <= x3 < x4``."""
    if not (x1 < x2 <= x3 < x4):
        raise ValueError("cross ratio needs x1 < x2 <= x3 < x4")
    return (x2 - x1) * (x4 - x3) / ((x3 - x1) * (x4 - x2))


def interval(u: SpacetimePoint, v: SpacetimePoint) -> float:
    """Proper length ``sqrt(dx^2 - dt^2)`` of a spacelike separation."""
    dt, dx = v.t - u.t, v.x - u.x
    s2 = dx * dx - dt * dt
    if not s2 > 0:
        raise ValueError("interval not spacelike")
    return math.sqrt(s2)


def cross_ratio_general(u1: SpacetimePoint, u2: SpacetimePoint,
                        u3: SpacetimePoint, u4: SpacetimePoint) -> float:
    """Cross-ratio built from Minkowski proper lengths between region endpoints."""
    return interval(u1, u2) * interval(u3, u4) / (interval(u2, u4) * interval(u1, u3))


def milne_point(z: float, tau: float) -> SpacetimePoint:
    return SpacetimePoint(tau * math.cosh(z), tau * math.sinh(z))


def cross_ratio_milne(z1, z2, z3, z4) -> float:
    """Cross-ratio of four points on one Milne slice; independent of ``tau``.

    Infinite outer endpoints are allowed: ``z1 = -inf, z4 = inf`` gives ``exp(-(z3 - z2))``.
    """
    def half(a, b):
        return math.log(math.sinh((b - a) / 2)) if math.isfinite(b - a) else (b - a) / 2 - math.log(2)

    if not (z1 < z2 <= z3 < z4):
        raise ValueError("cross ratio needs z1 < z2 <= z3 < z4")
    log_y = half(z1, z2) + half(z3, z4) - half(z2, z4) - half(z1, z3)
    if math.isnan(log_y):
        # both outer endpoints infinite: the divergent halves cancel pairwise
        log_y = -(z3 - z2)
    return math.exp(log_y)


def ellipk(m):
    """Complete elliptic integral of the first kind ``K(m)`` in the parameter convention.

    Arithmetic-geometric mean, ``K(m) = pi / (2 AGM(1, sqrt(1 - m)))``.
    """
    m = np.asarray(m, dtype=float)
    if np.any(m >= 1) or np.any(m < 0):
        raise ValueError("ellipk needs 0 <= m < 1")
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    for _ in range(60):
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        if np.all(np.abs(a - b) <= 1e-16 * a):
            break
    out = np.pi / (2 * a)
    return float(out) if out.ndim == 0 else out


def negativity_law(y, C: float = REFERENCE_NEGATIVITY_CONSTANT, convention: str = "parameter"):
    """``-1/4 log(1 - y) - 1/2 log K(y) + C``.

    By default ``y`` is the parameter ``m`` of ``K``. ``convention="modulus"``
    reads ``y`` as the modulus ``k`` instead, i.e. evaluates ``K(m = y**2)``.
    """
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0) or np.any(y >= 1):
        raise ValueError("negativity law needs 0 < y < 1")
    m = y if convention == "parameter" else y ** 2
    out = -0.25 * np.log1p(-y) - 0.5 * np.log(ellipk(m)) + C
    return float(out) if out.ndim == 0 else out


def effective_cutoff_y(N: int, a: float = REFERENCE_CUTOFF_A) -> float:
    """Cross-ratio of touching unit intervals at effective separation ``a / (2 pi N)``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return (1.0 + a / (2 * np.pi * N)) ** -2


def milne_entropy_law(Delta: float, N: int, tau: float, kappa: float, c: float = 0.0) -> float:
    """``1/3 log(2 tau sinh(Delta N / 2) / (tau kappa)) + c``; ``tau`` cancels."""
    if not Delta * N > 0 or not kappa > 0:
        raise ValueError("need Delta*N > 0 and kappa > 0")
    return math.log(2 * tau * math.sinh(0.5 * Delta * N) / (tau * kappa)) / 3 + c


def _check_points(points):
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("fit needs at least 3 points")
    return pts[:, 0], pts[:, 1]


def fit_linear(x, y) -> FitResult:
    x, y = np.asarray(x, float), np.asarray(y, float)
    slope, offset = np.polyfit(x, y, 1)
    resid = y - (slope * x + offset)
    return FitResult({"slope": float(slope), "offset": float(offset)},
                     float(np.sqrt(np.mean(resid ** 2))), len(x))


def fit_linear_log(points: Iterable[Tuple[float, float]]) -> FitResult:
    """Least-squares ``S = slope * log N + offset`` over ``(N, S)`` pairs."""
    N, S = _check_points(list(points))
    if np.any(np.diff(N) <= 0):
        raise ValueError("N must be strictly increasing")
    return fit_linear(np.log(N), S)


def fit_negativity_constant(y: Sequence[float], en: Sequence[float],
                            convention: str = "parameter") -> FitResult:
    """Best additive constant ``C`` of the negativity law (closed form: mean residual)."""
    y, en = np.asarray(y, float), np.asarray(en, float)
    if len(y) < 3:
        raise ValueError("fit needs at least 3 points")
    base = negativity_law(y, 0.0, convention)
    C = float(np.mean(en - base))
    resid = en - base - C
    return FitResult({"C": C}, float(np.sqrt(np.mean(resid ** 2))), len(y),
                     {"convention": convention})


def fit_cutoff_a(N: Sequence[int], en: Sequence[float], C: float = REFERENCE_NEGATIVITY_CONSTANT,
                 bounds=(1e-3, 20.0)) -> FitResult:
    """Fit ``a`` in ``negativity_law(effective_cutoff_y(N, a), C)`` to touching-interval data."""
    N, en = np.asarray(N, float), np.asarray(en, float)
    if len(N) < 3:
        raise ValueError("fit needs at least 3 points")

    def sse(a):
        pred = negativity_law((1.0 + a / (2 * np.pi * N)) ** -2, C)
        return float(np.sum((en - pred) ** 2))

    res = optimize.minimize_scalar(sse, bounds=bounds, method="bounded",
                                   options={"xatol": 1e-10})
    a = float(res.x)
    return FitResult({"a": a, "C": C}, math.sqrt(sse(a) / len(N)), len(N))
