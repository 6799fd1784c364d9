"""Optional figures of sweep results, rendered off-screen with matplotlib."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .predictions import negativity_law  # noqa: E402


def _ok(rows, *keys):
    good = [r for r in rows if r["status"] == "ok" and all(
        isinstance(r[k], (int, float)) and math.isfinite(r[k]) for k in keys)]
    return [np.array([r[k] for r in good], dtype=float) for k in keys]


def _entropy(ax, rows, xkey, xlabel, logx):
    x, s = _ok(rows, xkey, "entropy")
    if logx:
        x = np.log(x)
    ax.plot(x, s, "o")
    if len(x) > 1:
        slope, c = np.polyfit(x, s, 1)
        xx = np.linspace(x.min(), x.max(), 50)
        ax.plot(xx, slope * xx + c, "-", lw=1, label=f"slope {slope:.4f}")
        ax.legend(frameon=False)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("S")


def _negativity_vs_y(ax, rows):
    y, e = _ok(rows, "y", "negativity")
    ax.plot(y, e, "o", ms=4, label="modes")
    yy = np.linspace(0.05, 0.97, 200)
    ax.plot(yy, negativity_law(yy), "-", lw=1, label="law")
    ax.set_xlabel("y")
    ax.set_ylabel(r"$E_N$")
    ax.legend(frameon=False)


def render(scenario: str, rows, path) -> None:
    """Write one figure summarising ``rows`` of ``scenario`` to ``path``."""
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    if scenario == "flat-entropy":
        _entropy(ax, rows, "N", r"$\log N$", True)
    elif scenario == "milne-entropy":
        _entropy(ax, rows, "log_chord", r"$\log(2\sinh(\Delta N/2))$", False)
    elif scenario in ("flat-negativity", "milne-negativity"):
        _negativity_vs_y(ax, rows)
    elif scenario == "lightcone-limit":
        groups = {}
        for r in rows:
            groups.setdefault(str(r["x"]), []).append(r)
        for i, (name, group) in enumerate(groups.items()):
            tau, e, ef = _ok(group, "tau", "negativity", "negativity_flat")
            order = np.argsort(tau)
            ax.plot(tau[order], e[order], "o-", label=f"Milne, x={name}")
            ax.plot(tau[order], ef[order], "k--", lw=1, label="flat, same x" if i == 0 else None)
        ax.set_xscale("log")
        ax.set_xlabel(r"$\tau$")
        ax.set_ylabel(r"$E_N$")
        ax.legend(frameon=False)
    elif scenario == "williamson":
        L, da = _ok(rows, "L", "edge_distance_a")
        ax.plot(L, da, "o-")
        ax.set_xlabel("L")
        ax.set_ylabel("centroid distance from inner edge")
    elif scenario == "oracle-compare":
        L, ec, el = _ok(rows, "L", "negativity_continuum", "negativity_lattice")
        ax.plot(L, ec, "o", label="modes")
        ax.plot(L, el, "x", label="chain")
        ax.set_xlabel("L")
        ax.set_ylabel(r"$E_N$")
        ax.legend(frameon=False)
    else:
        raise ValueError(f"no figure for scenario {scenario!r}")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
