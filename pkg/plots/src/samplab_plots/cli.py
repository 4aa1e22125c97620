"""`samplab-plots render --spec figure.json` -> PNG and SVG."""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, RenderError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="samplab-plots")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from a spec file")
    p.add_argument("--spec", required=True, help="figure spec JSON")
    args = parser.parse_args(argv)
    try:
        result = render(FigureSpec.from_json(args.spec))
    except RenderError as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.png} and {result.svg}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
