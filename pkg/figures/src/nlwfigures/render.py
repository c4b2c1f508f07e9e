"""The three figure families, plus deterministic file emission.

Figures are pure functions of their input CSVs: fixed style, fixed hash
salt, no timestamps; identical inputs give byte-identical SVG and PNG
output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import read_rate_table, read_snapshot_1d, read_snapshot_2d, SchemaError

matplotlib.rcParams["svg.hashsalt"] = "nlwfigures"

STYLE = {
    "line": {"color": "#1f4e79", "lw": 1.4},
    "guide": {"color": "#888888", "lw": 1.0, "ls": "--"},
    "marker": {"color": "#b13a2a", "marker": "o", "ms": 5, "lw": 1.2},
}


def _save(fig, out_base: Path):
    out_base.parent.mkdir(parents=True, exist_ok=True)
    svg = out_base.with_suffix(".svg")
    png = out_base.with_suffix(".png")
    fig.savefig(svg, format="svg", metadata={"Date": None})
    fig.savefig(png, format="png", dpi=110)
    plt.close(fig)
    return [svg, png]


def plot_evolution(snapshot_paths, out_base):
    """Stacked 1d panels, one per snapshot time, shared x and y axes."""
    snaps = []
    for p in snapshot_paths:
        x, u = read_snapshot_1d(p)
        snaps.append((p, x, u))
    if not snaps:
        raise SchemaError("no snapshot files given")
    n = len(snaps)
    fig, axes = plt.subplots(n, 1, figsize=(6.0, 1.8 * n), sharex=True, sharey=True)
    axes = np.atleast_1d(axes)
    ymax = max(float(np.max(np.abs(u))) for _, _, u in snaps)
    ymax = ymax if ymax > 0 else 1.0
    for ax, (p, x, u) in zip(axes, snaps):
        ax.plot(x, u, **STYLE["line"])
        ax.set_ylim(-1.1 * ymax, 1.1 * ymax)
        ax.set_ylabel("u")
        ax.text(0.02, 0.82, Path(p).stem, transform=ax.transAxes, fontsize=8)
        ax.grid(True, alpha=0.3)
    axes[-1].set_xlabel("x")
    fig.tight_layout()
    return _save(fig, Path(out_base))


def plot_convergence(rate_csv, out_base):
    """log-log errors with a guide line at the table's fitted slope."""
    rows = read_rate_table(rate_csv)
    h = np.array([r["h"] for r in rows])
    err = np.array([r["l2_error"] for r in rows])
    slope = rows[0]["slope"]
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.loglog(h, err, label="measured", **STYLE["marker"])
    if slope is not None and np.all(err > 0):
        anchor = err[-1]
        guide = anchor * (h / h[-1]) ** slope
        ax.loglog(h, guide, label=f"slope {slope:.2f}", **STYLE["guide"])
        # a nearby integer-order guide for visual comparison
        order = round(slope)
        if order >= 1 and abs(order - slope) > 1e-9:
            ref = anchor * (h / h[-1]) ** order
            ax.loglog(h, ref, color="#bbbbbb", lw=0.8, ls=":", label=f"order {order}")
    ax.set_xlabel("h")
    ax.set_ylabel("L2 error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, Path(out_base))


def plot_isolines(snapshot_paths, out_base, n_levels: int = 11):
    """Side-by-side isoline panels of 2d snapshots."""
    snaps = [read_snapshot_2d(p) for p in snapshot_paths]
    if not snaps:
        raise SchemaError("no snapshot files given")
    n = len(snaps)
    fig, axes = plt.subplots(1, n, figsize=(3.4 * n, 3.2), squeeze=False)
    vmax = max(float(np.max(np.abs(u))) for u, _, _, _ in snaps)
    vmax = vmax if vmax > 0 else 1.0
    levels = np.linspace(-vmax, vmax, n_levels)
    levels = levels[np.abs(levels) > 1e-12 * vmax]  # contour rejects repeated 0-width sets
    for ax, (u, h, M, t) in zip(axes[0], snaps):
        x = np.arange(-(M - 1), M) * h
        ax.contour(x, x, u.T, levels=levels, linewidths=0.9)
        ax.set_title(f"t = {t:g}", fontsize=9)
        ax.set_aspect("equal")
        ax.set_xlabel("x1")
    axes[0][0].set_ylabel("x2")
    fig.tight_layout()
    return _save(fig, Path(out_base))
