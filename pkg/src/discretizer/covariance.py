"""Covariance matrices of discretizer modes after the swap.

Every element is a doubly smeared vacuum correlator. On flat slices the
spatial integrals are done analytically and the remaining wavenumber integral
is deformed onto the branch cut of ``omega_k``, which leaves a monotone
integral over ``y in (M, inf)``. On Milne slices the double integral over the
log kernel is reduced to one dimension through the correlation of the two
mode shapes, then integrated with panels graded toward the log singularity.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from . import quadrature
from .kernels import FieldParams, Flat, Geometry, Milne, milne_phi_phi_constant
from .modes import Interval, ModeBasis
from .symplectic import CovarianceMatrix, symplectic_eigenvalues

CACHE_ENV = "DISCRETIZER_CACHE_DIR"
CACHE_FORMAT = "discretizer-covariance/1"

#: Relative error budget per element before a quadrature is declared failed.
ELEMENT_RTOL = 1e-9
#: Assembly refuses matrices whose smallest symplectic eigenvalue is below 1 - this.
PHYSICALITY_SLACK = 1e-3


class QuadratureError(RuntimeError):
    def __init__(self, message, n=None, m=None, separation=None):
        super().__init__(f"element quadrature failed ({message}; n={n}, m={m}, L={separation})")
        self.n, self.m, self.separation = n, m, separation


class PhysicalityError(RuntimeError):
    pass


@dataclass(frozen=True)
class RegionConfig:
    """One or two ordered, non-overlapping regions on a slice.

    ``n_modes`` is either shared by all regions or given per region. Interval
    coordinates are lengths on flat slices and rapidities on Milne slices.

    With ``relative_regulator`` (the default) a massless field is regulated by
    ``params.ir_regulator_mass / R`` where ``R`` is the invariant length of the
    first region (the endpoint chord ``2 tau sinh(Delta/2)`` on Milne slices),
    so that ``M R`` is held fixed across sweeps.
    """

    geometry: Geometry
    regions: Tuple[Interval, ...]
    n_modes: Union[int, Tuple[int, ...]]
    params: FieldParams = FieldParams()
    include_cross_block: bool = True
    relative_regulator: bool = True
    element_rtol: float = ELEMENT_RTOL
    milne_rtol: float = 1e-8

    def __post_init__(self):
        if not (self.element_rtol > 0 and self.milne_rtol > 0):
            raise ValueError("tolerances must be positive")
        regions = tuple(self.regions)
        object.__setattr__(self, "regions", regions)
        if not 1 <= len(regions) <= 2:
            raise ValueError("one or two regions supported")
        if len(regions) == 2 and regions[1].x1 < regions[0].x2:
            raise ValueError("regions must be ordered and disjoint (x3 >= x2)")
        modes = self.modes_per_region
        if any(n < 1 for n in modes):
            raise ValueError("n_modes must be >= 1")

    @property
    def modes_per_region(self) -> Tuple[int, ...]:
        if isinstance(self.n_modes, int):
            return (self.n_modes,) * len(self.regions)
        modes = tuple(int(n) for n in self.n_modes)
        if len(modes) != len(self.regions):
            raise ValueError("need one n_modes entry per region")
        return modes

    @property
    def separation(self) -> Optional[float]:
        if len(self.regions) < 2:
            return None
        return self.regions[1].x1 - self.regions[0].x2

    @property
    def reference_length(self) -> float:
        first = self.regions[0]
        if isinstance(self.geometry, Milne):
            return 2 * self.geometry.tau * float(np.sinh(first.length / 2))
        return first.length

    @property
    def field_params(self) -> FieldParams:
        """Field parameters with the regulator converted to an absolute mass."""
        if self.params.mass > 0 or not self.relative_regulator:
            return self.params
        return FieldParams(0.0, self.params.ir_regulator_mass / self.reference_length)

    def bases(self) -> Tuple[ModeBasis, ...]:
        mass = self.field_params.effective_mass if isinstance(self.geometry, Flat) else None
        return tuple(ModeBasis(iv, n, mass) for iv, n in zip(self.regions, self.modes_per_region))

    def to_dict(self) -> dict:
        geom = {"kind": self.geometry.name}
        if isinstance(self.geometry, Milne):
            geom.update(tau=self.geometry.tau, a_scale=self.geometry.a_scale)
        return {
            "geometry": geom,
            "regions": [[iv.x1, iv.x2] for iv in self.regions],
            "n_modes": list(self.modes_per_region),
            "mass": self.params.mass,
            "ir_regulator_mass": self.params.ir_regulator_mass,
            "include_cross_block": self.include_cross_block,
            "relative_regulator": self.relative_regulator,
            "element_rtol": self.element_rtol,
            "milne_rtol": self.milne_rtol,
        }


# ---------------------------------------------------------------------------
# flat slices


def _flat_terms(na, nb, RA, RB, separation):
    """Signed exponential terms of the contour integrand as ``{distance: coeff}``."""
    sa = (-1.0) ** np.arange(1, na + 1)
    sb = (-1.0) ** np.arange(1, nb + 1)
    ones = np.ones((na, nb))
    if separation is None:
        # self block: the e^{+ikR} term closes in the upper half plane
        raw = [(ones, 0.0), (-np.outer(sa, np.ones(nb)), RA),
               (-np.outer(np.ones(na), sb), RA), (np.outer(sa, sb), 0.0)]
    else:
        D = RA + separation
        raw = [(ones, D), (-np.outer(sa, np.ones(nb)), separation),
               (-np.outer(np.ones(na), sb), D + RB), (np.outer(sa, sb), separation + RB)]
    terms = {}
    for coef, dist in raw:
        terms[dist] = terms.get(dist, 0.0) + coef
    return terms


def _flat_integral(kind, na, nb, RA, RB, terms, mass, width, order):
    y_max = max(1e8 / min(RA, RB), 100.0 * mass)
    u_max = float(np.arccosh(y_max / mass))
    u, w = quadrature.panels(quadrature.uniform_edges(0.0, u_max, width), order)
    y = mass * np.cosh(u)
    if kind == "pp":
        w = w * (mass * np.sinh(u)) ** 2
    ka = np.pi * np.arange(1, na + 1)
    kb = np.pi * np.arange(1, nb + 1)
    inv_a = 1.0 / (ka[:, None] ** 2 + (y * RA) ** 2)
    inv_b = 1.0 / (kb[:, None] ** 2 + (y * RB) ** 2)
    total = np.zeros((na, nb))
    for dist, coef in terms.items():
        total += coef * ((inv_a * (w * np.exp(-y * dist))) @ inv_b.T)
    return total


def flat_block(kind: str, na: int, nb: int, RA: float, RB: float, separation: Optional[float],
               mass: float, width: float = 0.25, order: int = 16, rtol: float = ELEMENT_RTOL):
    """Block of flat-slice covariance elements.

    Parameters
    ----------
    kind : {"qq", "pp"}
        Smeared field or smeared momentum correlations.
    separation : float or None
        Gap between the regions (``x3 - x2``); ``None`` selects the self block
        of a single region of length ``RA``.

    Returns
    -------
    values, error : ndarray, float
        The ``na x nb`` block and the largest estimated absolute error
        (difference against a rule with halved panels).
    """
    if mass <= 0:
        raise ValueError("flat elements need a positive (regulator) mass")
    if separation is not None and separation < 0:
        raise ValueError("separation must be >= 0")
    terms = _flat_terms(na, nb, RA, RB, separation)
    coarse = _flat_integral(kind, na, nb, RA, RB, terms, mass, width, order)
    fine = _flat_integral(kind, na, nb, RA, RB, terms, mass, width / 2, order)
    n = np.arange(1, na + 1)[:, None]
    m = np.arange(1, nb + 1)[None, :]
    wa = np.sqrt((np.pi * n / RA) ** 2 + mass ** 2)
    wb = np.sqrt((np.pi * m / RB) ** 2 + mass ** 2)
    if kind == "qq":
        pref = 2 * np.pi * n * m * np.sqrt(wa * wb) * np.sqrt(RA * RB)
    elif kind == "pp":
        pref = -2 * np.pi * n * m * np.sqrt(RA * RB) / np.sqrt(wa * wb)
    else:
        raise ValueError(f"unknown element kind {kind!r}")
    values = pref * fine
    err = np.abs(pref * (fine - coarse))
    if separation is None:
        values = values + np.eye(na, nb)
    bad = err > rtol * np.maximum(1.0, np.abs(values))
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise QuadratureError(f"estimated error {err[i, j]:.2e}", i + 1, j + 1, separation)
    return values, float(err.max())


def _flat_element(kind, n, m, L_eff, params):
    mass = params.effective_mass
    separation = None if L_eff == -1 else L_eff
    if separation is not None and separation < 0:
        raise ValueError("L_eff must be -1 (self block) or >= 0")
    vals, _ = flat_block(kind, n, m, 1.0, 1.0, separation, mass)
    return float(vals[n - 1, m - 1])


def flat_element_phi_phi(n: int, m: int, L_eff: float, params: FieldParams) -> float:
    """Smeared field element between unit intervals; ``L_eff = -1`` is the self block."""
    return _flat_element("qq", n, m, L_eff, params)


def flat_element_pi_pi(n: int, m: int, L_eff: float, params: FieldParams) -> float:
    """Smeared momentum element between unit intervals; ``L_eff = -1`` is the self block."""
    return _flat_element("pp", n, m, L_eff, params)


# ---------------------------------------------------------------------------
# Milne slices


def _window_cos_integral(kappa, phase, lo, hi):
    """``int_lo^hi cos(kappa z + phase) dz`` without dividing by ``kappa``."""
    w = hi - lo
    mid = 0.5 * (hi + lo)
    return w * np.sinc(kappa * w / (2 * np.pi)) * np.cos(kappa * mid + phase)


def shape_correlation(kind: str, na: int, nb: int, dA: float, dB: float, u):
    """``C_nm(u) = int a_n(z) b_m(z - u) dz`` for sine (``"ss"``) or cosine (``"cc"``) shapes.

    ``a_n`` lives on ``[0, dA]``, ``b_m`` on ``[0, dB]``; result shape ``(na, nb, len(u))``.
    """
    u = np.asarray(u, dtype=float)
    lo = np.maximum(0.0, u)
    hi = np.minimum(dA, dB + u)
    alpha = (np.pi * np.arange(1, na + 1) / dA)[:, None, None]
    beta = (np.pi * np.arange(1, nb + 1) / dB)[None, :, None]
    first = _window_cos_integral(alpha - beta, beta * u, lo, hi)
    second = _window_cos_integral(alpha + beta, -beta * u, lo, hi)
    out = 0.5 * (first - second) if kind == "ss" else 0.5 * (first + second)
    return np.where(hi > lo, out, 0.0)


def _log_sinh(s):
    s = np.abs(s)
    # log sinh(s/2) = s/2 + log(1 - e^{-s}) - log 2, stable for large s
    return 0.5 * s + np.log(-np.expm1(-s)) - np.log(2.0)


def _milne_edges(dA, dB, singular, width):
    lo, hi = -dB, dA
    points = {lo, hi, 0.0, dA - dB}
    if lo < singular < hi:
        points.add(singular)
    points = sorted(p for p in points if lo <= p <= hi)
    edges = []
    for a, b in zip(points[:-1], points[1:]):
        if b - a <= 1e-14 * (hi - lo):
            continue
        h = min(width, b - a)
        if abs(a - singular) < width:
            seg = quadrature.graded_edges(a, a + h, "a")
            if a + h < b:
                seg = np.concatenate([seg, quadrature.uniform_edges(a + h, b, width)[1:]])
        elif abs(b - singular) < width:
            seg = quadrature.graded_edges(b - h, b, "b")
            if b - h > a:
                seg = np.concatenate([quadrature.uniform_edges(a, b - h, width), seg[1:]])
        else:
            seg = quadrature.uniform_edges(a, b, width)
        edges.append(seg if not edges else seg[1:])
    return np.unique(np.concatenate(edges))


def _milne_log_integrals(na, nb, dA, dB, offset, width, order):
    """``int int a_n(z) b_m(z') log|sinh((z - z' + offset)/2)|`` for sine and cosine shapes."""
    edges = _milne_edges(dA, dB, -offset, width)
    u, w = quadrature.panels(edges, order)
    f = w * _log_sinh(u + offset)
    ss = shape_correlation("ss", na, nb, dA, dB, u) @ f
    cc = shape_correlation("cc", na, nb, dA, dB, u) @ f
    return ss, cc


def sine_integrals(n: int, length: float) -> np.ndarray:
    """``int_0^length sin(k pi z / length) dz`` for ``k = 1..n``."""
    k = np.arange(1, n + 1)
    return length * (1 - (-1.0) ** k) / (np.pi * k)


def milne_block(na: int, nb: int, zA: Interval, zB: Interval, geometry: Milne,
                params: FieldParams, rtol: float = 1e-8, order: int = 16):
    """Field, momentum and field-momentum blocks between two Milne intervals.

    Returns ``(qq, pp, qp, error)``; ``qp[n, m] = <{psi^A_n, pi^B_m}>`` is the
    cross correlation implied by the constant symmetrized kernel.
    """
    dA, dB = zA.length, zB.length
    offset = zA.x1 - zB.x1
    width = min(1.0, 2.0 * min(dA, dB) / max(na, nb, 1))
    ss, cc = _milne_log_integrals(na, nb, dA, dB, offset, width, order)
    for _ in range(6):
        width /= 2
        ss2, cc2 = _milne_log_integrals(na, nb, dA, dB, offset, width, order)
        err = max(np.abs(ss2 - ss).max(), np.abs(cc2 - cc).max())
        scale = max(np.abs(ss2).max(), np.abs(cc2).max(), 1e-300)
        ss, cc = ss2, cc2
        if err <= rtol * scale:
            break
    else:
        raise QuadratureError(f"Milne refinement stalled at {err:.2e}", na, nb, zB.x1 - zA.x2)
    norm = 4.0 / np.sqrt(dA * dB)
    IA, IB = sine_integrals(na, dA), sine_integrals(nb, dB)
    c0 = milne_phi_phi_constant(geometry, params)
    qq = norm * (c0 * np.outer(IA, IB) - ss / (2 * np.pi))
    alpha = np.pi * np.arange(1, na + 1) / dA
    beta = np.pi * np.arange(1, nb + 1) / dB
    pp = -norm / (2 * np.pi) * np.outer(alpha, beta) * cc
    qp = -np.outer(IA, IB) / (np.pi * np.sqrt(dA * dB))
    return qq, pp, qp, float(norm * err)


# ---------------------------------------------------------------------------
# assembly


def _block_values(config: RegionConfig, r: int, s: int):
    modes = config.modes_per_region
    na, nb = modes[r], modes[s]
    A, B = config.regions[r], config.regions[s]
    if isinstance(config.geometry, Flat):
        mass = config.field_params.effective_mass
        sep = None if r == s else B.x1 - A.x2
        rtol = config.element_rtol
        qq, e1 = flat_block("qq", na, nb, A.length, B.length, sep, mass, rtol=rtol)
        pp, e2 = flat_block("pp", na, nb, A.length, B.length, sep, mass, rtol=rtol)
        return qq, pp, np.zeros((na, nb)), max(e1, e2)
    qq, pp, qp, err = milne_block(na, nb, A, B, config.geometry, config.field_params,
                                 rtol=config.milne_rtol)
    if not config.include_cross_block:
        qp = np.zeros_like(qp)
    return qq, pp, qp, err


def _cache_path(config: RegionConfig) -> Optional[Path]:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    return Path(root) / f"{config_hash(config)}.json"


def config_hash(config: RegionConfig) -> str:
    """SHA-256 of the canonical JSON form of ``config`` (floats written round-trip exact)."""
    text = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _load_cached(path: Path, config: RegionConfig):
    try:
        data = json.loads(path.read_text())
    except (OSError, ValueError):
        return None
    if data.get("format") != CACHE_FORMAT or data.get("config") != config.to_dict():
        return None
    return CovarianceMatrix(np.array(data["matrix"]), tuple(data["blocks"]), config.bases(),
                            quad_error=data["quad_error"], meta={"cached": True})


def _store_cached(path: Path, config: RegionConfig, cm: CovarianceMatrix):
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"format": CACHE_FORMAT, "config": config.to_dict(), "blocks": list(cm.blocks),
               "quad_error": cm.quad_error, "matrix": cm.matrix.tolist()}
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(payload))
    tmp.replace(path)


def assemble(config: RegionConfig, check_physical: bool = True, use_cache: bool = True) -> CovarianceMatrix:
    """Covariance matrix of all regions' discretizer modes.

    Ordering is ``(psi^A, pi^A[, psi^B, pi^B])``. When the environment variable
    ``DISCRETIZER_CACHE_DIR`` is set, matrices are cached on disk keyed by
    :func:`config_hash`.
    """
    path = _cache_path(config) if use_cache else None
    if path is not None and path.exists():
        cached = _load_cached(path, config)
        if cached is not None:
            return cached
    modes = config.modes_per_region
    starts = np.concatenate([[0], np.cumsum(2 * np.array(modes))])
    dim = int(starts[-1])
    M = np.zeros((dim, dim))
    worst = 0.0
    for r in range(len(modes)):
        for s in range(r, len(modes)):
            qq, pp, qp, err = _block_values(config, r, s)
            worst = max(worst, err)
            qa = slice(starts[r], starts[r] + modes[r])
            pa = slice(starts[r] + modes[r], starts[r + 1])
            qb = slice(starts[s], starts[s] + modes[s])
            pb = slice(starts[s] + modes[s], starts[s + 1])
            M[qa, qb], M[pa, pb] = qq, pp
            M[qa, pb] = qp
            M[pa, qb] = qp.T if r == s else qp
            if r != s:
                M[qb, qa], M[pb, pa] = qq.T, pp.T
                M[pb, qa], M[qb, pa] = qp.T, qp.T
    M = 0.5 * (M + M.T)
    cm = CovarianceMatrix(M, modes, config.bases(), quad_error=worst)
    if check_physical:
        nu_min = symplectic_eigenvalues(cm).values.min()
        cm.meta["nu_min"] = float(nu_min)
        if nu_min < 1 - PHYSICALITY_SLACK:
            raise PhysicalityError(f"physicality violated beyond tolerance (min nu = {nu_min:.6f})")
    if path is not None:
        _store_cached(path, config, cm)
    return cm


def flat_config(intervals: Sequence[Tuple[float, float]], n_modes, mass: float = 0.0,
                ir_regulator_mass: float = 1e-14, relative_regulator: bool = True) -> RegionConfig:
    """Shorthand for flat-slice configurations from ``(x1, x2)`` pairs."""
    return RegionConfig(Flat(), tuple(Interval(*iv) for iv in intervals), n_modes,
                        FieldParams(mass, ir_regulator_mass), relative_regulator=relative_regulator)


def milne_config(intervals: Sequence[Tuple[float, float]], n_modes, tau: float = 1.0,
                 mass: float = 0.0, ir_regulator_mass: float = 1e-14,
                 include_cross_block: bool = True, relative_regulator: bool = True) -> RegionConfig:
    """Shorthand for Milne-slice configurations from rapidity pairs ``(z1, z2)``."""
    return RegionConfig(Milne(tau), tuple(Interval(*iv) for iv in intervals), n_modes,
                        FieldParams(mass, ir_regulator_mass), include_cross_block, relative_regulator)
