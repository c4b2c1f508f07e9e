"""CSV and manifest emission.  One schema per artifact, reproduced byte-for-byte.

Schemas (consumed by the figure emitter):
  1d snapshot     header "x,u", one row per lattice node
  2d snapshot     comment header "# h=<h> M=<M> t=<t>", then 2M-1 rows of
                  2M-1 comma-separated values (row-major over k1, k2)
  rate table      header "h,tau,P,l2_error,pair_rate,slope"
  energy stream   header "n,t,total,kinetic,potential,conserved"
Floats are written with %.17g so re-running a manifest reproduces files
bit-identically.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


def _fmt(x) -> str:
    return FLOAT_FMT % float(x)


def write_snapshot_1d(path, x, u):
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("x,u\n")
        for xi, ui in zip(np.asarray(x), np.asarray(u)):
            fh.write(f"{_fmt(xi)},{_fmt(ui)}\n")


def write_snapshot_2d(path, u, h, M, t):
    u = np.asarray(u)
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"# h={_fmt(h)} M={int(M)} t={_fmt(t)}\n")
        for row in u:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_rate_table(path, rows):
    """rows: dicts with h, tau, P, error, pair_rate, slope (None -> empty)."""
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("h,tau,P,l2_error,pair_rate,slope\n")
        for r in rows:
            pr = "" if r.get("pair_rate") is None else _fmt(r["pair_rate"])
            sl = "" if r.get("slope") is None else _fmt(r["slope"])
            fh.write(
                f"{_fmt(r['h'])},{_fmt(r['tau'])},{int(r['P'])},"
                f"{_fmt(r['error'])},{pr},{sl}\n"
            )


def write_energy(path, entries, tau):
    path = Path(path)
    with open(path, "w") as fh:
        fh.write("n,t,total,kinetic,potential,conserved\n")
        for e in entries:
            fh.write(
                f"{e.n},{_fmt(e.n * tau)},{_fmt(e.total)},{_fmt(e.kinetic)},"
                f"{_fmt(e.potential)},{_fmt(e.conserved)}\n"
            )


def write_manifest(path, manifest: dict):
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def snapshot_label(t: float) -> str:
    return ("%g" % t).replace("-", "m").replace(".", "p")
