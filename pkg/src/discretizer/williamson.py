"""Spatial profiles of Williamson normal modes.

Each normal-mode position is a combination of the smeared fields of the
discretizer modes, so its coefficients expand into a weight function ``f(z)``
over the regions; the normal-mode momentum gives ``g(z)`` in the same way.
For a partially transposed matrix the momenta of region B are the flipped ones,
and ``g`` is reported in those flipped variables so that ``int f g = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np
from scipy import integrate

from .symplectic import CovarianceMatrix, partial_transpose, williamson

#: Neighbouring symplectic eigenvalues closer than this are flagged degenerate.
DEGENERACY_TOLERANCE = 1e-7
DEFAULT_GRID_POINTS = 512


@dataclass
class WilliamsonMode:
    """One normal mode with its coefficients and sampled profiles per region.

    ``f_coeffs[r]`` multiplies the unit sine shapes of region ``r`` *including*
    the smearing weight, i.e. ``f(z) = sum_i f_coeffs[r][i] h_i(z)``.
    """

    index: int
    symplectic_value: float
    transposed: bool
    f_coeffs: Tuple[np.ndarray, ...]
    g_coeffs: Tuple[np.ndarray, ...]
    grids: Tuple[np.ndarray, ...]
    f_profiles: Tuple[np.ndarray, ...]
    g_profiles: Tuple[np.ndarray, ...]
    degenerate: bool = False
    residual: float = 0.0

    @property
    def entangled(self) -> bool:
        """Transposed modes with ``nu < 1`` carry negativity."""
        return self.transposed and self.symplectic_value < 1.0 - 1e-9

    @property
    def overlap(self) -> float:
        """``int f g`` summed over the regions (coefficient space)."""
        return float(sum(a @ b for a, b in zip(self.f_coeffs, self.g_coeffs)))


def _fix_phase(tq, tp, q_rows):
    """Rotate a ``(position, momentum)`` column pair so the position column is
    carried by fields as much as possible; the Williamson form is invariant."""
    a, b = tq[q_rows], tp[q_rows]
    gram = np.array([[a @ a, a @ b], [a @ b, b @ b]])
    _, vecs = np.linalg.eigh(gram)
    c, s = vecs[:, -1]
    return c * tq + s * tp, -s * tq + c * tp


def _region_rows(cm: CovarianceMatrix):
    return [cm.region_slices(r) for r in range(len(cm.blocks))]


def williamson_modes(cm: CovarianceMatrix, transposed: bool = False, n_grid: int = DEFAULT_GRID_POINTS,
                     region: int = 1) -> List[WilliamsonMode]:
    """Williamson modes of ``cm`` (or of its partial transpose) with spatial profiles.

    Parameters
    ----------
    cm : CovarianceMatrix
        Must carry the mode bases of its regions.
    transposed : bool
        Use the partial transpose on ``region``; modes are then ordered by
        ascending symplectic value, most entangled first. Otherwise descending.
    n_grid : int
        Uniform sample points per region, endpoints included.
    """
    if not cm.bases:
        raise ValueError("covariance matrix carries no mode bases")
    if transposed and not cm.transposed:
        cm = partial_transpose(cm, region)
    nu, T = williamson(cm)
    n = len(nu)
    slices = _region_rows(cm)
    q_rows = np.concatenate([np.arange(cm.dim)[q] for q, _ in slices])
    order = np.arange(n)[::-1] if transposed else np.arange(n)
    grids = tuple(np.linspace(b.interval.x1, b.interval.x2, n_grid) for b in cm.bases)
    shapes = [b.shapes(z) for b, z in zip(cm.bases, grids)]
    weights = [b.weights() for b in cm.bases]
    modes = []
    for rank, k in enumerate(order):
        tq, tp = _fix_phase(T[:, k], T[:, n + k], q_rows)
        f = [tq[q] * w[0] for (q, _), w in zip(slices, weights)]
        big = np.concatenate(f)
        if big[np.argmax(np.abs(big))] < 0:
            tq, tp = -tq, -tp
        # residual of M t_q = nu Omega t_p in mode space
        om = cm.symplectic_form
        res = np.linalg.norm(cm.matrix @ tq - nu[k] * om @ tp) / max(np.linalg.norm(cm.matrix @ tq), 1e-300)
        f_c = tuple(tq[q] * w[0] for (q, _), w in zip(slices, weights))
        g_c = tuple(tp[p] * w[1] for (_, p), w in zip(slices, weights))
        norm = sum(a @ b for a, b in zip(f_c, g_c))
        if norm > 0:
            s = 1.0 / np.sqrt(norm)
            f_c = tuple(c * s for c in f_c)
            g_c = tuple(c * s for c in g_c)
        near = np.abs(np.delete(nu, k) - nu[k])
        modes.append(WilliamsonMode(
            index=rank, symplectic_value=float(nu[k]), transposed=cm.transposed,
            f_coeffs=f_c, g_coeffs=g_c, grids=grids,
            f_profiles=tuple(c @ h for c, h in zip(f_c, shapes)),
            g_profiles=tuple(c @ h for c, h in zip(g_c, shapes)),
            degenerate=bool(near.size and near.min() < DEGENERACY_TOLERANCE * max(1.0, nu[k])),
            residual=float(res)))
    return modes


def _region_index(mode: WilliamsonMode, region: Union[int, str]) -> int:
    if isinstance(region, str):
        region = "AB".index(region.upper())
    if not 0 <= region < len(mode.grids):
        raise ValueError(f"mode has no region {region}")
    return region


def mode_centroid(mode: WilliamsonMode, region: Union[int, str] = 0) -> float:
    """``int z f^2 / int f^2`` over one region, from the sampled profile."""
    r = _region_index(mode, region)
    z, f = mode.grids[r], mode.f_profiles[r]
    weight = integrate.simpson(f * f, x=z)
    if not weight > 0:
        raise ValueError("zero-norm profile in region")
    return float(integrate.simpson(z * f * f, x=z) / weight)


def inner_edge_distance(mode: WilliamsonMode, region: Union[int, str] = 0) -> float:
    """Distance of the centroid from the edge facing the other region."""
    r = _region_index(mode, region)
    if len(mode.grids) != 2:
        raise ValueError("inner edge needs two regions")
    z = mode.grids[r]
    c = mode_centroid(mode, r)
    return float(z[-1] - c) if r == 0 else float(c - z[0])


def profile_overlap(mode_a: WilliamsonMode, mode_b: WilliamsonMode) -> float:
    """``int f_a g_b`` over all regions from the sampled profiles."""
    return float(sum(integrate.simpson(fa * gb, x=z) for fa, gb, z
                     in zip(mode_a.f_profiles, mode_b.g_profiles, mode_a.grids)))


def write_profiles(modes, stream) -> None:
    """Columnar ``z f g`` text, one block per mode and region."""
    for mode in modes:
        for r, z in enumerate(mode.grids):
            stream.write(f"# mode {mode.index} region {'AB'[r]} nu {mode.symplectic_value:.15g}"
                         f"{' degenerate' if mode.degenerate else ''}\n")
            for row in zip(z, mode.f_profiles[r], mode.g_profiles[r]):
                stream.write(" ".join(f"{v:.15g}" for v in row) + "\n")
            stream.write("\n")
