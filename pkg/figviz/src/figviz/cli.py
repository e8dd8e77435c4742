"""Command line: figviz render --csv <file> --kind heatmap --metric nci -o out.png"""
from __future__ import annotations

import argparse
import sys

from .render import KINDS, METRICS, FigureSpec, SchemaError, render, write_layout


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figviz",
        description="render experiment CSV exports into figures "
                    "(grid heatmaps and intervention curves; "
                    "network-layout drawings are out of scope)")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render a figure from a harness CSV")
    p.add_argument("--csv", required=True, help="input CSV (aggregate or intervention schema)")
    p.add_argument("--kind", choices=KINDS, default="heatmap")
    p.add_argument("--metric", choices=METRICS, default="nci")
    p.add_argument("--color-limit", type=float, default=0.0,
                   help="symmetric color bound (default: from data)")
    p.add_argument("--dpi", type=int, default=100)
    p.add_argument("--title", default="")
    p.add_argument("--layout-json", help="also write the drawn-layout summary here")
    p.add_argument("-o", "--output", required=True, help="output image (png or pdf)")
    args = parser.parse_args(argv)

    try:
        spec = FigureSpec(input_csv=args.csv, kind=args.kind, metric=args.metric,
                          color_limit=args.color_limit, dpi=args.dpi, title=args.title)
        layout = render(spec, args.output)
    except (SchemaError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.layout_json:
        write_layout(layout, args.layout_json)
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
