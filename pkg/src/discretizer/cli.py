"""Command-line front end: ``discretizer <scenario> --spec sweep.yaml``.

Spec files are YAML. Exit status is 0 when every row succeeded, 3 when some
rows failed (they are still written, marked ``failed``), and 2 for an invalid
spec or command line.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List

import yaml

from . import __version__
from .sweeps import INTEGER_KEYS, LIGHTCONE_PRESETS, SCENARIOS, Settings, expand_grid, run_row

EXIT_OK, EXIT_INVALID, EXIT_PARTIAL = 0, 2, 3
TOP_KEYS = {"scenario", "grid", "mass", "ir_regulator_mass", "include_cross_block",
            "tolerances", "output", "profiles_dir"}
TOLERANCE_KEYS = {"element_rtol", "milne_rtol"}
OUTPUT_KEYS = {"path", "format"}


# ---------------------------------------------------------------------------
# spec loading and validation


def _node_lines(node, path=(), out=None):
    """Map key paths of a composed YAML tree to 1-based line numbers."""
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            _node_lines(v, path + (k.value,), out)
            out[path + (k.value,)] = k.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _node_lines(v, path + (i,), out)
    return out


def load_spec(text: str):
    """Parse YAML text; returns ``(data, lines)`` or raises ``yaml.YAMLError``."""
    node = yaml.compose(text, Loader=yaml.SafeLoader)
    data = yaml.safe_load(text)
    return data, (_node_lines(node) if node is not None else {})


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _check_value(key, v):
    if key == "x":
        if isinstance(v, str):
            return None if v in LIGHTCONE_PRESETS else f"unknown lightcone preset {v!r}"
        if (not isinstance(v, list) or len(v) != 4 or not all(_is_number(c) for c in v)
                or not v[0] < v[1] <= v[2] < v[3]):
            return "x entries need four increasing numbers or a preset name"
        return None
    if key in INTEGER_KEYS:
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            return f"{key} values must be positive integers"
        return None
    if not _is_number(v):
        return f"{key} values must be numbers"
    if key == "L" and v < 0:
        return "L must be >= 0"
    if key in ("R", "R_A", "R_B", "tau", "delta", "delta_a", "delta_b") and not v > 0:
        return f"{key} must be positive"
    if key == "gap" and v < 0:
        return "gap must be >= 0"
    return None


def validate_data(data, lines, scenario_name=None) -> List[str]:
    """Diagnostics (``"line N: message"``) for a parsed spec; empty when valid."""
    diags = []

    def add(path, msg):
        line = None
        for cut in range(len(path), -1, -1):
            line = lines.get(tuple(path[:cut]))
            if line is not None:
                break
        diags.append(f"line {line or 1}: {msg}")

    if not isinstance(data, dict):
        add((), "spec must be a mapping")
        return diags
    for key in data:
        if key not in TOP_KEYS:
            add((key,), f"unknown key {key!r}")
    name = data.get("scenario", scenario_name)
    if name is None:
        add((), "missing scenario")
        return diags
    if name not in SCENARIOS:
        add(("scenario",), f"unknown scenario {name!r}")
        return diags
    if scenario_name is not None and name != scenario_name:
        add(("scenario",), f"spec scenario {name!r} does not match command {scenario_name!r}")
    scenario = SCENARIOS[name]
    grid = data.get("grid")
    if not isinstance(grid, dict):
        add(("grid",), "grid must be a mapping of parameter lists")
        grid = {}
    known = {k for k, _ in scenario.grid}
    for key, values in grid.items():
        if key not in known:
            add(("grid", key), f"unknown grid key {key!r} for {name}")
            continue
        if not isinstance(values, list):
            add(("grid", key), f"grid entry {key!r} must be a list")
            continue
        if not values:
            add(("grid", key), "empty parameter grid")
            continue
        for i, v in enumerate(values):
            msg = _check_value(key, v)
            if msg:
                add(("grid", key, i), msg)
    for key in scenario.required:
        if key not in grid:
            add(("grid",), f"missing required grid key {key!r}")
    if "mass" in data and not (_is_number(data["mass"]) and data["mass"] >= 0):
        add(("mass",), "mass must be a non-negative number")
    if "ir_regulator_mass" in data and not (_is_number(data["ir_regulator_mass"])
                                            and data["ir_regulator_mass"] > 0):
        add(("ir_regulator_mass",), "ir_regulator_mass must be positive")
    if "include_cross_block" in data and not isinstance(data["include_cross_block"], bool):
        add(("include_cross_block",), "include_cross_block must be true or false")
    tol = data.get("tolerances", {})
    if not isinstance(tol, dict):
        add(("tolerances",), "tolerances must be a mapping")
        tol = {}
    for key, v in tol.items():
        if key not in TOLERANCE_KEYS:
            add(("tolerances", key), f"unknown tolerance {key!r}")
        elif not (_is_number(v) and v > 0):
            add(("tolerances", key), "tolerance must be > 0")
    out = data.get("output", {})
    if not isinstance(out, dict):
        add(("output",), "output must be a mapping")
        out = {}
    for key in out:
        if key not in OUTPUT_KEYS:
            add(("output", key), f"unknown output key {key!r}")
    if "format" in out and out["format"] not in ("csv", "json"):
        add(("output", "format"), "format must be csv or json")
    return diags


def validate_spec(path, scenario_name=None) -> List[str]:
    """Check a spec file without running it."""
    text = Path(path).read_text()
    try:
        data, lines = load_spec(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        return [f"line {mark.line + 1 if mark else 1}: invalid YAML ({getattr(exc, 'problem', exc)})"]
    return validate_data(data, lines, scenario_name)


# ---------------------------------------------------------------------------
# output


def _cell(v):
    if v is None:
        return "nan"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else "nan"
    if isinstance(v, (list, tuple)):
        return " ".join(_cell(c) for c in v)
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, tuple):
        return list(v)
    if hasattr(v, "item"):
        return _json_value(v.item())
    return v


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_cell(_json_value(row.get(c))) for c in columns])


def write_json(path, scenario, columns, rows):
    payload = {"scenario": scenario, "version": __version__, "columns": columns,
               "rows": [{c: _json_value(row.get(c)) for c in columns} for row in rows]}
    Path(path).write_text(json.dumps(payload, indent=1, allow_nan=False) + "\n")


# ---------------------------------------------------------------------------
# running


def settings_from(data, args) -> Settings:
    tol = dict(data.get("tolerances", {}))
    if args.element_rtol is not None:
        tol["element_rtol"] = args.element_rtol
    if args.milne_rtol is not None:
        tol["milne_rtol"] = args.milne_rtol
    kw = {k: data[k] for k in ("mass", "ir_regulator_mass", "include_cross_block") if k in data}
    profiles = args.profiles_dir or data.get("profiles_dir")
    return Settings(**kw, **{k: float(v) for k, v in tol.items()}, profiles_dir=profiles)


def run_sweep(scenario_name, data, settings: Settings, threads: int = 1):
    scenario = SCENARIOS[scenario_name]
    grid = expand_grid(scenario, data.get("grid", {}))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        chunks = list(pool.map(lambda p: run_row(scenario, p, settings), grid))
    return scenario.columns, [row for chunk in chunks for row in chunk]


def _fail(msg):
    print(msg, file=sys.stderr)
    return EXIT_INVALID


def _run(args) -> int:
    spec_path = Path(args.spec)
    try:
        text = spec_path.read_text()
    except OSError as exc:
        return _fail(f"cannot read spec: {exc}")
    diags = validate_spec(spec_path, args.command)
    if diags:
        for d in diags:
            print(f"{spec_path}:{d}", file=sys.stderr)
        return EXIT_INVALID
    data, _ = load_spec(text)
    out_cfg = data.get("output", {})
    fmt = args.format or out_cfg.get("format", "csv")
    out = Path(args.out or out_cfg.get("path") or f"{args.command}.{fmt}")
    settings = settings_from(data, args)
    start = time.perf_counter()
    columns, rows = run_sweep(args.command, data, settings, args.threads)
    wall = time.perf_counter() - start
    out.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        write_csv(out, columns, rows)
    else:
        write_json(out, args.command, columns, rows)
    failed = sum(r["status"] != "ok" for r in rows)
    manifest = {
        "scenario": args.command,
        "spec": str(spec_path),
        "spec_sha256": hashlib.sha256(text.encode()).hexdigest(),
        "version": __version__,
        "output": str(out),
        "format": fmt,
        "rows": len(rows),
        "failed_rows": failed,
        "wall_time_s": wall,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    Path(str(out) + ".manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    if args.figure:
        from .plotting import render
        render(args.command, rows, args.figure)
    for r in rows:
        if r["status"] != "ok":
            print(f"row failed: {r['message']}", file=sys.stderr)
    print(f"{len(rows)} rows ({failed} failed) -> {out}")
    return EXIT_PARTIAL if failed else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="discretizer",
                                     description="Entanglement sweeps for discretizer modes.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run a {name} sweep")
        p.add_argument("--spec", required=True, help="YAML sweep spec")
        p.add_argument("--out", help="output file (default from spec, else <scenario>.<format>)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--element-rtol", type=float, help="override flat element tolerance")
        p.add_argument("--milne-rtol", type=float, help="override Milne refinement tolerance")
        p.add_argument("--profiles-dir", help="williamson: write z f g profile files here")
        p.add_argument("--figure", help="also render a figure of the sweep to this file")
    v = sub.add_parser("validate", help="check a spec without running it")
    v.add_argument("--spec", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        try:
            diags = validate_spec(args.spec)
        except OSError as exc:
            return _fail(f"cannot read spec: {exc}")
        for d in diags:
            print(f"{args.spec}:{d}", file=sys.stderr)
        if not diags:
            print("spec ok")
        return EXIT_INVALID if diags else EXIT_OK
    if args.threads < 1:
        return _fail("--threads must be >= 1")
    for name in ("element_rtol", "milne_rtol"):
        v = getattr(args, name)
        if v is not None and not v > 0:
            return _fail(f"--{name.replace('_', '-')} must be > 0")
    return _run(args)


if __name__ == "__main__":
    sys.exit(main())
