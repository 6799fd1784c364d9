"""Sine-mode basis of a discretizer confined to an interval."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[x1, x2]`` of surface coordinates."""

    x1: float
    x2: float

    def __post_init__(self):
        if not self.x2 > self.x1:
            raise ValueError(f"interval needs x2 > x1, got ({self.x1}, {self.x2})")

    @property
    def length(self) -> float:
        return self.x2 - self.x1

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.x1 + self.x2)


@dataclass(frozen=True)
class ModeBasis:
    """First ``n_modes`` Dirichlet sine modes on ``interval``.

    With ``mass`` set the basis is frequency weighted: the smeared field of mode
    ``n`` carries ``sqrt(omega_n)`` and the smeared momentum ``1/sqrt(omega_n)``,
    ``omega_n = sqrt(k_n^2 + mass^2)``. With ``mass=None`` both weights are one.
    """

    interval: Interval
    n_modes: int
    mass: Optional[float] = None

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")

    @property
    def weighted(self) -> bool:
        return self.mass is not None

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1, self.n_modes + 1)

    def wavenumbers(self) -> np.ndarray:
        return np.pi * self.indices / self.interval.length

    def frequencies(self) -> np.ndarray:
        if not self.weighted:
            raise ValueError("unweighted basis has no frequencies")
        return np.sqrt(self.wavenumbers() ** 2 + self.mass ** 2)

    def weights(self):
        """Arrays ``(field_weight, momentum_weight)`` for all modes."""
        if not self.weighted:
            ones = np.ones(self.n_modes)
            return ones, ones.copy()
        w = np.sqrt(self.frequencies())
        return w, 1.0 / w

    def shapes(self, x) -> np.ndarray:
        """Unit-normalized shapes ``h_n(x)``, shape ``(n_modes, len(x))``."""
        x = np.asarray(x, dtype=float)
        R = self.interval.length
        out = math.sqrt(2.0 / R) * np.sin(np.outer(self.wavenumbers(), x - self.interval.x1))
        # exact zeros at the walls rather than sin(n pi) round-off
        out[:, (x == self.interval.x1) | (x == self.interval.x2)] = 0.0
        return out

    def project(self, func, n_quad: int = 400) -> np.ndarray:
        """Coefficients ``c_n = int h_n(x) func(x) dx`` by Gauss-Legendre quadrature."""
        t, w = np.polynomial.legendre.leggauss(n_quad)
        a, b = self.interval.x1, self.interval.x2
        x = 0.5 * (b - a) * t + 0.5 * (a + b)
        return self.shapes(x) @ (0.5 * (b - a) * w * func(x))

    def reconstruct(self, coeffs, x) -> np.ndarray:
        return np.asarray(coeffs) @ self.shapes(x)


def _check_index(basis: ModeBasis, n: int):
    if not 1 <= n <= basis.n_modes:
        raise IndexError(f"mode index {n} outside 1..{basis.n_modes}")


def mode_function(basis: ModeBasis, n: int, x):
    """``sqrt(2/R) sin(k_n (x - x1))``, exactly zero at both endpoints."""
    _check_index(basis, n)
    xa = np.asarray(x, dtype=float)
    iv = basis.interval
    if np.any(xa < iv.x1) or np.any(xa > iv.x2):
        raise ValueError("x outside interval")
    out = basis.shapes(np.atleast_1d(xa))[n - 1]
    return float(out[0]) if xa.ndim == 0 else out


def smearing_weights(basis: ModeBasis, n: int):
    """``(field_weight, momentum_weight)`` of mode ``n``; their product is one."""
    _check_index(basis, n)
    if not basis.weighted:
        return 1.0, 1.0
    k = math.pi * n / basis.interval.length
    w = math.sqrt(math.sqrt(k * k + basis.mass ** 2))
    return w, 1.0 / w
