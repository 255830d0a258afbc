"""Command-line entry: render one metric's five-panel figure from a
directory of campaign CSVs."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import METRIC_COLUMNS, FigureSpec, SchemaError, find_percentile_csvs, render_figure


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicsim-figures",
        description="Render presence-vs-ratio scatter panels (one per browsing "
        "percentile) from topicsim results.csv files.",
    )
    parser.add_argument("--metric", required=True, choices=sorted(METRIC_COLUMNS))
    parser.add_argument(
        "--csv-dir",
        required=True,
        type=Path,
        help="directory holding the five percentile campaign CSVs",
    )
    parser.add_argument("--out", required=True, type=Path, help="output image path")
    parser.add_argument(
        "--stats-out",
        type=Path,
        default=None,
        help="sidecar stats JSON (default: image path with .stats.json)",
    )
    parser.add_argument("--linear-x", action="store_true", help="linear presence axis")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    stats_path = args.stats_out
    if stats_path is None:
        stats_path = args.out.with_suffix(".stats.json")
    try:
        csvs = find_percentile_csvs(args.csv_dir)
        spec = FigureSpec(
            metric=args.metric,
            csv_by_percentile=csvs,
            out_path=args.out,
            stats_path=stats_path,
            x_log=not args.linear_x,
        )
        stats = render_figure(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    annotations = ", ".join(
        f"p{p['percentile']}="
        + ("n/a" if p["spearman"] is None else f"{p['spearman']:.2f}")
        for p in stats["panels"]
    )
    print(f"wrote {args.out} and {stats_path} (Spearman: {annotations})")
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
