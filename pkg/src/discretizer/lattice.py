"""Harmonic-chain ground states, used as an independent check of the continuum results."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .covariance import RegionConfig, assemble
from .kernels import Flat
from .symplectic import CovarianceMatrix, entropy_of, negativity_of

#: Regulator ``a * m`` used when the chain is massless.
CHAIN_IR_REGULATOR = 1e-8


@dataclass(frozen=True)
class ChainConfig:
    """Chain of ``n_sites`` oscillators; regions are half-open site ranges ``(start, stop)``."""

    n_sites: int
    lattice_spacing: float = 1.0
    mass: float = 0.0
    boundary: str = "open"
    region_a: Optional[Tuple[int, int]] = None
    region_b: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be positive")
        if not self.lattice_spacing > 0:
            raise ValueError("lattice_spacing must be positive")
        if self.mass < 0:
            raise ValueError("mass must be non-negative")
        if self.boundary not in ("open", "periodic"):
            raise ValueError("boundary must be 'open' or 'periodic'")
        for r in self.regions:
            if not 0 <= r[0] < r[1] <= self.n_sites:
                raise ValueError(f"region {r} outside [0, {self.n_sites})")
        if len(self.regions) == 2:
            (a0, a1), (b0, b1) = self.regions
            if a1 > b0 and b1 > a0:
                raise ValueError("regions overlap")

    @property
    def regions(self):
        return tuple(r for r in (self.region_a, self.region_b) if r is not None)

    @property
    def effective_mass(self) -> float:
        return self.mass if self.mass > 0 else CHAIN_IR_REGULATOR / self.lattice_spacing

    def coupling_matrix(self, with_mass: bool = True) -> np.ndarray:
        """``K`` with diagonal ``2/a^2 + m^2`` and nearest-neighbour ``-1/a^2``."""
        n, a = self.n_sites, self.lattice_spacing
        K = np.diag(np.full(n, 2.0 / a ** 2 + (self.effective_mass ** 2 if with_mass else 0.0)))
        if n > 1:
            off = np.full(n - 1, -1.0 / a ** 2)
            K += np.diag(off, 1) + np.diag(off, -1)
            if self.boundary == "periodic" and n > 2:
                K[0, -1] = K[-1, 0] = -1.0 / a ** 2
        return K


def _root_blocks(laplacian, mass2: float = 0.0):
    """``(K^-1/2, K^1/2)`` for ``K = laplacian + mass2``.

    The mass is added to the eigenvalues rather than the diagonal, so a
    regulator far below round-off of the diagonal still lifts the zero mode.
    """
    evals, evecs = np.linalg.eigh(laplacian)
    # the discrete Laplacian is positive semi-definite; drop round-off below zero
    evals = np.where(np.abs(evals) < 1e-12 * np.abs(evals).max(), 0.0, evals) + mass2
    if evals[0] <= 0:
        raise ValueError("coupling matrix not positive definite; a regulator mass is required")
    root = np.sqrt(evals)
    return (evecs / root) @ evecs.T, (evecs * root) @ evecs.T


def ground_state_cm(config: ChainConfig, sites=None) -> CovarianceMatrix:
    """Ground-state covariance of the chain restricted to ``sites``.

    ``sites`` defaults to the configured regions (one block per region), or the
    whole chain when none are set. Position block ``K^-1/2``, momentum block
    ``K^1/2``, in the convention where the vacuum has unit symplectic values.
    """
    X, P = _root_blocks(config.coupling_matrix(with_mass=False), config.effective_mass ** 2)
    if sites is None:
        groups = [np.arange(*r) for r in config.regions] or [np.arange(config.n_sites)]
    else:
        groups = [np.asarray(sites, dtype=int)]
    n = sum(len(g) for g in groups)
    M = np.zeros((2 * n, 2 * n))
    offsets = np.cumsum([0] + [2 * len(g) for g in groups])
    for r, gr in enumerate(groups):
        for s, gs in enumerate(groups):
            qr = slice(offsets[r], offsets[r] + len(gr))
            pr = slice(offsets[r] + len(gr), offsets[r + 1])
            qs = slice(offsets[s], offsets[s] + len(gs))
            ps = slice(offsets[s] + len(gs), offsets[s + 1])
            M[qr, qs] = X[np.ix_(gr, gs)]
            M[pr, ps] = P[np.ix_(gr, gs)]
    return CovarianceMatrix(M, tuple(len(g) for g in groups))


def chain_entropy(config: ChainConfig, sites) -> float:
    """Entropy of the sites listed in ``sites``."""
    return entropy_of(ground_state_cm(config, sites))


def chain_negativity(config: ChainConfig) -> float:
    if len(config.regions) != 2:
        raise ValueError("negativity needs region_a and region_b")
    return negativity_of(ground_state_cm(config))


def matching_chain(continuum: RegionConfig, sites_per_unit: int, padding: int = 400) -> ChainConfig:
    """Open chain whose regions reproduce the continuum intervals at the given resolution."""
    if not isinstance(continuum.geometry, Flat):
        raise ValueError("lattice comparison needs flat regions")
    a = 1.0 / sites_per_unit
    ends = [round(v * sites_per_unit) for iv in continuum.regions for v in (iv.x1, iv.x2)]
    shift = padding - ends[0]
    ends = [e + shift for e in ends]
    regions = [(ends[0], ends[1])] + ([(ends[2], ends[3])] if len(ends) == 4 else [])
    return ChainConfig(ends[-1] + padding, a, continuum.params.mass, "open", *regions)


def _check_geometry(continuum: RegionConfig, chain: ChainConfig):
    if len(continuum.regions) != 2 or len(chain.regions) != 2:
        raise ValueError("geometry mismatch: need two regions on both sides")
    a = chain.lattice_spacing
    (a0, a1), (b0, b1) = chain.regions
    A, B = continuum.regions
    for want, got in ((A.length, (a1 - a0) * a), (B.length, (b1 - b0) * a),
                      (continuum.separation, (b0 - a1) * a)):
        if abs(want - got) > a * (1 + 1e-9):
            raise ValueError(f"geometry mismatch: continuum length {want} vs chain {got}")


def compare_negativity(continuum: RegionConfig, chain: ChainConfig):
    """``(E_continuum, E_lattice, |difference|)`` for matching two-region geometries."""
    _check_geometry(continuum, chain)
    e_c = negativity_of(assemble(continuum))
    e_l = chain_negativity(chain)
    return e_c, e_l, abs(e_c - e_l)
