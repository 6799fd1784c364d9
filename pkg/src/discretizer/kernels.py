"""Equal-surface vacuum two-point functions of a free scalar in 1+1 dimensions.

Two families of constant-time surfaces are supported: flat ``t = const`` slices
and Milne ``eta = const`` hyperbolae ``t**2 - x**2 = tau**2``. On Milne slices
the surface coordinate is the rapidity ``z`` and the conjugate momentum is the
normal derivative ``d/d eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

EULER_GAMMA = 0.5772156649015329

#: Mass regulator used for massless runs, in units of the inverse region size.
DEFAULT_IR_REGULATOR = 1e-14

#: Milne small-mass expansions are only used while ``mass * tau`` stays below this.
MILNE_SMALL_MASS_LIMIT = 0.1


class SingularKernelError(ValueError):
    """Raised when a kernel is evaluated on its coincident-point singularity."""


class SmallMassError(ValueError):
    """Raised when a small-mass closed form is used outside its validity range."""


@dataclass(frozen=True)
class Flat:
    """Constant-``t`` slice of Minkowski space; coordinates are lengths."""

    name = "flat"


@dataclass(frozen=True)
class Milne:
    """Constant-``eta`` slice of the Milne wedge.

    ``tau = exp(eta)`` sets the proper size of the slice; ``a_scale`` is the
    acceleration parameter of the coordinates and is fixed to one.
    """

    tau: float = 1.0
    a_scale: float = 1.0
    name = "milne"

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"Milne tau must be positive, got {self.tau}")
        if self.a_scale != 1.0:
            raise ValueError("only a_scale = 1 is supported")

    @property
    def eta(self) -> float:
        return math.log(self.tau)

    def embed(self, z):
        """Minkowski ``(t, x)`` of the surface point(s) at rapidity ``z``."""
        z = np.asarray(z, dtype=float)
        return self.tau * np.cosh(z), self.tau * np.sinh(z)

    def rapidity(self, x):
        """Inverse of the ``x`` embedding: the rapidity at spatial position ``x``."""
        return np.arcsinh(np.asarray(x, dtype=float) / self.tau)


Geometry = Union[Flat, Milne]


@dataclass(frozen=True)
class FieldParams:
    """Field mass (inverse length) and the regulator substituted when it is zero."""

    mass: float = 0.0
    ir_regulator_mass: float = DEFAULT_IR_REGULATOR

    def __post_init__(self):
        if self.mass < 0:
            raise ValueError("mass must be non-negative")
        if not self.ir_regulator_mass > 0:
            raise ValueError("ir_regulator_mass must be positive")

    @property
    def effective_mass(self) -> float:
        return self.mass if self.mass > 0 else self.ir_regulator_mass


def phi_phi_flat(dx, params: FieldParams):
    """Equal-time ``<phi(x) phi(x')>`` on a flat slice, ``K0(M|dx|) / 2pi``.

    Raises
    ------
    SingularKernelError
        If any separation is exactly zero (log singularity; smear instead).
    """
    dx = np.abs(np.asarray(dx, dtype=float))
    if np.any(dx == 0):
        raise SingularKernelError("on-diagonal singularity; use smeared element path")
    out = special.k0(params.effective_mass * dx) / (2 * np.pi)
    return float(out) if out.ndim == 0 else out


def _check_milne_mass(geometry: Milne, params: FieldParams):
    if params.effective_mass * geometry.tau >= MILNE_SMALL_MASS_LIMIT:
        raise SmallMassError(
            f"small-mass approximation invalid (M*tau = {params.effective_mass * geometry.tau:g})")


def milne_phi_phi_constant(geometry: Milne, params: FieldParams) -> float:
    """The ``dz``-independent part of the Milne field correlator.

    The small-argument expansion of ``K0`` fixes the constant so that the
    correlator agrees with the flat one at short distance.
    """
    _check_milne_mass(geometry, params)
    return -(math.log(params.effective_mass * geometry.tau) + EULER_GAMMA) / (2 * np.pi)


def phi_phi_milne(dz, geometry: Milne, params: FieldParams):
    """Small-mass Milne ``<phi(z) phi(z')>``.

    ``-(1/2pi) [log(M tau |sinh(dz/2)|) + gamma_E]``, i.e. the equal-``eta``
    restriction of ``K0(M sigma) / 2pi`` with proper distance
    ``sigma = 2 tau |sinh(dz/2)|``.
    """
    dz = np.abs(np.asarray(dz, dtype=float))
    if np.any(dz == 0):
        raise SingularKernelError("on-diagonal singularity")
    out = milne_phi_phi_constant(geometry, params) - np.log(np.sinh(dz / 2)) / (2 * np.pi)
    return float(out) if out.ndim == 0 else out


def pi_pi_milne(dz):
    """Massless Milne ``<pi(z) pi(z')>`` with ``pi = d phi / d eta``: ``-1/(8 pi sinh^2(dz/2))``.

    Independent of ``eta``. The coincident limit is a distribution; smeared
    elements go through the integrated-by-parts form instead.
    """
    dz = np.asarray(dz, dtype=float)
    if np.any(dz == 0):
        raise SingularKernelError(
            "on-diagonal singularity; use integrated-by-parts path")
    out = -1.0 / (8 * np.pi * np.sinh(dz / 2) ** 2)
    return float(out) if out.ndim == 0 else out


def phi_pi_milne_cross(dz=0.0):
    """Symmetrized ``<{phi(z), pi(z')}> / 2`` on a Milne slice (massless limit).

    Differentiating ``-(1/4pi) log(tau^2 + tau'^2 - 2 tau tau' cosh dz)`` with
    respect to ``eta'`` and setting ``tau' = tau`` gives ``-1/(4 pi)`` for every
    ``dz``. Returns ``(value, is_constant)``.
    """
    value = -1.0 / (4 * np.pi)
    dz = np.asarray(dz, dtype=float)
    if dz.ndim:
        value = np.full(dz.shape, value)
    return value, True


def phi_pi_flat_cross(dx=0.0):
    """Equal-time symmetrized ``<{phi, pi}> / 2`` on a flat slice; identically zero."""
    dx = np.asarray(dx, dtype=float)
    return np.zeros(dx.shape) if dx.ndim else 0.0
