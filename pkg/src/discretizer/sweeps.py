"""Scenario definitions: one function per sweep row, plus the grid expansion.

Every scenario declares its grid keys (with defaults) and its output columns,
so the column set of a scenario is fixed regardless of the spec file.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Tuple

from . import predictions
from .covariance import ELEMENT_RTOL, PhysicalityError, QuadratureError, RegionConfig, assemble
from .kernels import FieldParams, Flat, Milne, SmallMassError
from .lattice import compare_negativity, matching_chain
from .modes import Interval
from .symplectic import InvalidCovarianceError, entropy_of, negativity_of
from .williamson import inner_edge_distance, mode_centroid, williamson_modes, write_profiles

#: Row-level failures that mark a row as failed instead of aborting the sweep.
ROW_ERRORS = (QuadratureError, PhysicalityError, SmallMassError, InvalidCovarianceError,
              ValueError, ArithmeticError)

LIGHTCONE_PRESETS = {
    "symmetric": (-3.0, -1.0, 1.0, 3.0),
    "same-side": (1.0, 2.0, 2.5, 3.5),
}


@dataclass(frozen=True)
class Settings:
    mass: float = 0.0
    ir_regulator_mass: float = 1e-14
    include_cross_block: bool = True
    element_rtol: float = ELEMENT_RTOL
    milne_rtol: float = 1e-8
    profiles_dir: str = None

    def config(self, geometry, intervals, n_modes) -> RegionConfig:
        return RegionConfig(geometry, tuple(Interval(*iv) for iv in intervals), n_modes,
                            FieldParams(self.mass, self.ir_regulator_mass),
                            include_cross_block=self.include_cross_block,
                            element_rtol=self.element_rtol, milne_rtol=self.milne_rtol)


@dataclass(frozen=True)
class Scenario:
    name: str
    grid: Tuple[Tuple[str, object], ...]  # (key, default or None if required)
    outputs: Tuple[str, ...]
    run: Callable

    @property
    def required(self):
        return [k for k, d in self.grid if d is None]

    @property
    def columns(self):
        return [k for k, _ in self.grid] + list(self.outputs) + ["status", "message"]


def _law(y):
    return predictions.negativity_law(y) if 0 < y < 1 else math.nan


def _matrix_info(cm):
    return {"nu_min": cm.meta.get("nu_min", math.nan), "quad_error": cm.quad_error}


def _flat_entropy(p, s: Settings):
    R = p["R"]
    cm = assemble(s.config(Flat(), [(0.0, R)], p["N"]))
    return [{"entropy": entropy_of(cm), **_matrix_info(cm)}]


def _flat_negativity(p, s: Settings):
    RA, RB, L = p["R_A"], p["R_B"], p["L"]
    cm = assemble(s.config(Flat(), [(0.0, RA), (RA + L, RA + L + RB)], p["N"]))
    y = predictions.cross_ratio_flat(0.0, RA, RA + L, RA + L + RB)
    return [{"y": y, "negativity": negativity_of(cm), "law": _law(y), **_matrix_info(cm)}]


def _milne_entropy(p, s: Settings):
    half = 0.5 * p["delta"] * p["N"]
    cm = assemble(s.config(Milne(p["tau"]), [(-half, half)], p["N"]))
    return [{"entropy": entropy_of(cm), "log_chord": math.log(2 * math.sinh(half)), **_matrix_info(cm)}]


def _two_region_milne(zs, tau, N, s):
    cm = assemble(s.config(Milne(tau), [(zs[0], zs[1]), (zs[2], zs[3])], N))
    pts = [predictions.milne_point(z, tau) for z in zs]
    return cm, predictions.cross_ratio_milne(*zs), predictions.cross_ratio_general(*pts)


def _milne_negativity(p, s: Settings):
    g = 0.5 * p["gap"]
    zs = (-g - p["delta_a"], -g, g, g + p["delta_b"])
    cm, y, y_gen = _two_region_milne(zs, p["tau"], p["N"], s)
    return [{"y": y, "y_general": y_gen, "negativity": negativity_of(cm), "law": _law(y),
             **_matrix_info(cm)}]


def _lightcone(p, s: Settings):
    xs = p["x"]
    if isinstance(xs, str):
        xs = LIGHTCONE_PRESETS[xs]
    xs = tuple(float(v) for v in xs)
    tau = p["tau"]
    zs = tuple(math.asinh(x / tau) for x in xs)
    cm, y, _ = _two_region_milne(zs, tau, p["N"], s)
    flat = assemble(s.config(Flat(), [(xs[0], xs[1]), (xs[2], xs[3])], p["N"]))
    y_flat = predictions.cross_ratio_flat(*xs)
    return [{"z1": zs[0], "z2": zs[1], "z3": zs[2], "z4": zs[3], "y": y, "y_flat": y_flat,
             "negativity": negativity_of(cm), "negativity_flat": negativity_of(flat),
             **_matrix_info(cm)}]


def _williamson(p, s: Settings):
    L = p["L"]
    cm = assemble(s.config(Flat(), [(0.0, 1.0), (1.0 + L, 2.0 + L)], p["N"]))
    modes = williamson_modes(cm, transposed=True, n_grid=p["grid_points"])
    if s.profiles_dir:
        out = Path(s.profiles_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / f"williamson_N{p['N']}_L{L:g}.txt", "w") as fh:
            write_profiles(modes[:p["modes"]], fh)
    rows = []
    for m in modes[:p["modes"]]:
        rows.append({"mode": m.index, "nu": m.symplectic_value,
                     "centroid_a": mode_centroid(m, 0), "centroid_b": mode_centroid(m, 1),
                     "edge_distance_a": inner_edge_distance(m, 0),
                     "edge_distance_b": inner_edge_distance(m, 1),
                     "overlap": m.overlap, "residual": m.residual, "degenerate": m.degenerate,
                     **_matrix_info(cm)})
    return rows


def _oracle(p, s: Settings):
    L = p["L"]
    cfg = s.config(Flat(), [(0.0, 1.0), (1.0 + L, 2.0 + L)], p["N"])
    chain = matching_chain(cfg, p["sites_per_unit"], p["padding"])
    e_c, e_l, diff = compare_negativity(cfg, chain)
    return [{"negativity_continuum": e_c, "negativity_lattice": e_l, "abs_diff": diff}]


_MATRIX = ("nu_min", "quad_error")

SCENARIOS: Dict[str, Scenario] = {sc.name: sc for sc in [
    Scenario("flat-entropy", (("N", None), ("R", [1.0])), ("entropy",) + _MATRIX, _flat_entropy),
    Scenario("flat-negativity", (("N", None), ("L", None), ("R_A", [1.0]), ("R_B", [1.0])),
             ("y", "negativity", "law") + _MATRIX, _flat_negativity),
    Scenario("milne-entropy", (("N", None), ("delta", None), ("tau", [1.0])),
             ("entropy", "log_chord") + _MATRIX, _milne_entropy),
    Scenario("milne-negativity", (("N", None), ("gap", None), ("tau", [1.0]), ("delta_a", [1.0]),
                                  ("delta_b", [1.0])),
             ("y", "y_general", "negativity", "law") + _MATRIX, _milne_negativity),
    Scenario("lightcone-limit", (("x", ["symmetric"]), ("tau", [1.0, 0.3, 0.1]), ("N", [30])),
             ("z1", "z2", "z3", "z4", "y", "y_flat", "negativity", "negativity_flat") + _MATRIX,
             _lightcone),
    Scenario("williamson", (("N", None), ("L", None), ("modes", [1]), ("grid_points", [512])),
             ("mode", "nu", "centroid_a", "centroid_b", "edge_distance_a", "edge_distance_b",
              "overlap", "residual", "degenerate") + _MATRIX, _williamson),
    Scenario("oracle-compare", (("N", [30]), ("L", None), ("sites_per_unit", [60]), ("padding", [400])),
             ("negativity_continuum", "negativity_lattice", "abs_diff"), _oracle),
]}

INTEGER_KEYS = {"N", "modes", "grid_points", "sites_per_unit", "padding"}


def expand_grid(scenario: Scenario, grid: dict) -> List[dict]:
    """Cartesian product of the grid lists in the scenario's declared key order."""
    keys = [k for k, _ in scenario.grid]
    values = [grid.get(k, default) for k, default in scenario.grid]
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


def run_row(scenario: Scenario, params: dict, settings: Settings) -> List[dict]:
    """Rows (inputs + outputs + status) for one grid point; failures do not raise."""
    try:
        outs = scenario.run(params, settings)
        return [{**params, **out, "status": "ok", "message": ""} for out in outs]
    except ROW_ERRORS as exc:
        blank = {k: math.nan for k in scenario.outputs}
        return [{**params, **blank, "status": "failed", "message": str(exc)}]
