"""Symplectic spectra, partial transposition and Gaussian entanglement measures.

Covariance matrices follow the convention ``M_ij = <O_i O_j + O_j O_i>`` so a
vacuum mode has symplectic eigenvalue one. Quadratures are ordered region by
region, positions first: ``(q^A_1..q^A_N, p^A_1..p^A_N, q^B_1.., p^B_1..)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

#: Transposed eigenvalues this close to one are not counted as entangled.
UNIT_TOLERANCE = 1e-9
#: Relative tolerance for pairing singular values of ``M^1/2 Omega M^1/2``.
PAIRING_TOLERANCE = 1e-7


class InvalidCovarianceError(ValueError):
    pass


def symplectic_form(blocks: Sequence[int]) -> np.ndarray:
    """Block-diagonal ``Omega`` with one ``[[0, I], [-I, 0]]`` block per region."""
    dim = 2 * sum(blocks)
    omega = np.zeros((dim, dim))
    start = 0
    for n in blocks:
        eye = np.eye(n)
        omega[start:start + n, start + n:start + 2 * n] = eye
        omega[start + n:start + 2 * n, start:start + n] = -eye
        start += 2 * n
    return omega


@dataclass
class CovarianceMatrix:
    """Real symmetric covariance matrix with its region block structure.

    ``blocks`` holds the number of modes per region. ``bases`` optionally keeps
    the mode basis of each region so Williamson modes can be mapped back to
    spatial profiles; ``quad_error`` is the largest element error estimate.
    """

    matrix: np.ndarray
    blocks: Tuple[int, ...]
    bases: tuple = ()
    transposed: bool = False
    quad_error: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        self.blocks = tuple(int(b) for b in self.blocks)
        if self.matrix.shape != (self.dim, self.dim):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match blocks {self.blocks}")

    @property
    def dim(self) -> int:
        return 2 * sum(self.blocks)

    @property
    def symplectic_form(self) -> np.ndarray:
        return symplectic_form(self.blocks)

    def region_slices(self, region: int):
        """``(positions, momenta)`` index slices of one region."""
        start = 2 * sum(self.blocks[:region])
        n = self.blocks[region]
        return slice(start, start + n), slice(start + n, start + 2 * n)

    def reduced(self, region: int) -> "CovarianceMatrix":
        """Covariance matrix of a single region (partial trace over the rest)."""
        q, p = self.region_slices(region)
        idx = np.r_[q, p]
        bases = (self.bases[region],) if self.bases else ()
        return CovarianceMatrix(self.matrix[np.ix_(idx, idx)], (self.blocks[region],), bases)


@dataclass(frozen=True)
class SymplecticSpectrum:
    values: np.ndarray
    transposed: bool = False

    def __len__(self):
        return len(self.values)


def _as_matrix(M):
    if isinstance(M, CovarianceMatrix):
        return M.matrix, M.symplectic_form, M.transposed
    M = np.asarray(M, dtype=float)
    return M, symplectic_form([M.shape[0] // 2]), False


def _sqrt_pd(M: np.ndarray):
    if not np.allclose(M, M.T, rtol=0, atol=1e-10 * max(1.0, np.abs(M).max())):
        raise InvalidCovarianceError("invalid covariance matrix: not symmetric")
    M = 0.5 * (M + M.T)
    evals, evecs = np.linalg.eigh(M)
    if evals[0] <= 0:
        raise InvalidCovarianceError(
            f"invalid covariance matrix: not positive definite (min eigenvalue {evals[0]:.3e})")
    return evals, evecs


def symplectic_eigenvalues(M, omega: np.ndarray = None) -> SymplecticSpectrum:
    """Symplectic eigenvalues in descending order.

    Computed as the singular values of ``M^1/2 Omega M^1/2``, which is real
    antisymmetric so its singular values come in equal pairs.
    """
    mat, om, transposed = _as_matrix(M)
    if omega is not None:
        om = omega
    evals, evecs = _sqrt_pd(mat)
    root = (evecs * np.sqrt(evals)) @ evecs.T
    s = np.linalg.svd(root @ om @ root, compute_uv=False)
    first, second = s[0::2], s[1::2]
    if np.any(np.abs(first - second) > PAIRING_TOLERANCE * np.maximum(1.0, first)):
        raise InvalidCovarianceError("unpaired symplectic eigenvalues")
    return SymplecticSpectrum(0.5 * (first + second), transposed)


def williamson(M, omega: np.ndarray = None):
    """Williamson normal form.

    Returns ``(nu, T)`` with ``nu`` descending and ``T`` such that
    ``T.T @ M @ T = diag(nu, nu)`` and ``T.T @ Omega @ T = [[0, I], [-I, 0]]``.
    Column ``k`` of ``T`` holds the coefficients of the ``k``-th normal-mode
    position over the original quadratures, column ``n + k`` its momentum.
    """
    mat, om, _ = _as_matrix(M)
    if omega is not None:
        om = omega
    evals, evecs = _sqrt_pd(mat)
    inv_root = (evecs / np.sqrt(evals)) @ evecs.T
    A = inv_root @ om @ inv_root
    # i*A is Hermitian; its positive eigenvalues are 1/nu
    lam, vecs = np.linalg.eigh(1j * A)
    n = mat.shape[0] // 2
    lam, vecs = lam[n:], vecs[:, n:]
    order = np.argsort(lam)  # ascending 1/nu -> descending nu
    lam, vecs = lam[order], vecs[:, order]
    vecs = vecs * np.sqrt(2.0)
    q_dirs, p_dirs = vecs.imag, vecs.real
    nu = 1.0 / lam
    scale = np.sqrt(nu)
    T = np.hstack([inv_root @ q_dirs * scale, inv_root @ p_dirs * scale])
    return nu, T


def partial_transpose(M: CovarianceMatrix, region: int = 1) -> CovarianceMatrix:
    """Flip the sign of the chosen region's momenta (``0`` = A, ``1`` = B).

    Applying the same transpose twice gives back the original matrix exactly.
    """
    if len(M.blocks) < 2:
        raise ValueError("partial transpose undefined for a single-region matrix")
    if isinstance(region, str):
        region = "AB".index(region.upper())
    signs = np.ones(M.dim)
    signs[M.region_slices(region)[1]] = -1.0
    return CovarianceMatrix(signs[:, None] * M.matrix * signs[None, :], M.blocks, M.bases,
                            transposed=not M.transposed, quad_error=M.quad_error, meta=dict(M.meta))


def _entropy_terms(nu):
    nu = np.asarray(nu, dtype=float)
    plus = 0.5 * (nu + 1)
    minus = np.clip(0.5 * (nu - 1), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        tm = np.where(minus > 0, minus * np.log(minus), 0.0)
    return plus * np.log(plus) - tm


def entanglement_entropy(spec: SymplecticSpectrum) -> float:
    """Von Neumann entropy (nats) of a Gaussian state from its symplectic spectrum."""
    if spec.transposed:
        raise ValueError("entropy requires untransposed spectrum")
    return float(np.sum(_entropy_terms(spec.values)))


def log_negativity(spec: SymplecticSpectrum) -> float:
    """``-sum log(nu)`` over transposed eigenvalues below one."""
    if not spec.transposed:
        raise ValueError("negativity requires partially transposed spectrum")
    nu = np.asarray(spec.values)
    small = nu[nu < 1.0 - UNIT_TOLERANCE]
    return float(-np.sum(np.log(small))) if small.size else 0.0


def entropy_of(M: CovarianceMatrix) -> float:
    return entanglement_entropy(symplectic_eigenvalues(M))


def negativity_of(M: CovarianceMatrix, region: int = 1) -> float:
    return log_negativity(symplectic_eigenvalues(partial_transpose(M, region)))
