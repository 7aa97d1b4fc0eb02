"""CLI: `plot coherency --in <csv> --out <img>` and
`plot infidelity --in <json> [--in <json> ...] --out <img>`.

Output format follows the --out extension (.svg or .png).  Errors print a
single JSON line to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys

from .plots import PlotSpec, plot_coherency_band, plot_infidelity_vs_n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="Regenerate figures from simulator outputs.")
    sub = parser.add_subparsers(dest="kind", required=True)

    p = sub.add_parser("coherency", help="coherency band over trajectories")
    p.add_argument("--in", dest="inputs", action="append", required=True,
                   help="trajectories.csv from a sequential/continuous run")
    p.add_argument("--out", required=True, help="output image (.svg or .png)")
    p.add_argument("--title", default="")
    p.add_argument("--highlight", default="",
                   help="trajectory id to draw as the solid line")

    p = sub.add_parser("infidelity", help="infidelity vs N with the bound")
    p.add_argument("--in", dest="inputs", action="append", required=True,
                   help="summary.json from sweep runs (repeatable)")
    p.add_argument("--out", required=True)
    p.add_argument("--title", default="")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "coherency":
            spec = PlotSpec(inputs=args.inputs, kind="coherency_band",
                            output=args.out, title=args.title,
                            highlight=args.highlight)
            out = plot_coherency_band(spec)
        else:
            spec = PlotSpec(inputs=args.inputs, kind="infidelity_vs_n",
                            output=args.out, title=args.title)
            out = plot_infidelity_vs_n(spec)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    print(json.dumps({"figure": str(out)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
