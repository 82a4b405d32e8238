"""Command line: `plots render spec.json` (also installed as oscillab-plots)."""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, RenderError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="plots",
                                 description="render figures from oscillab CSVs")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render a figure from a JSON spec")
    p.add_argument("spec", help="figure spec JSON file")
    args = ap.parse_args(argv)
    try:
        spec = FigureSpec.from_json(args.spec)
        out = render(spec)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
