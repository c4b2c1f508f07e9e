"""nlwfigures: render solver CSVs to SVG + PNG.

Subcommands: evolution | convergence | isolines.  Exit codes: 0 ok,
2 schema or usage error.
"""

from __future__ import annotations

import argparse
import sys

from .io import SchemaError
from .render import plot_convergence, plot_evolution, plot_isolines


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="nlwfigures", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p_ev = sub.add_parser("evolution")
    p_ev.add_argument("csvs", nargs="+")
    p_ev.add_argument("--out", required=True, help="output basename (suffix added)")

    p_cv = sub.add_parser("convergence")
    p_cv.add_argument("csv")
    p_cv.add_argument("--out", required=True)

    p_is = sub.add_parser("isolines")
    p_is.add_argument("csvs", nargs="+")
    p_is.add_argument("--out", required=True)

    args = ap.parse_args(argv)
    try:
        if args.command == "evolution":
            written = plot_evolution(args.csvs, args.out)
        elif args.command == "convergence":
            written = plot_convergence(args.csv, args.out)
        else:
            written = plot_isolines(args.csvs, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return 2
    for p in written:
        print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
