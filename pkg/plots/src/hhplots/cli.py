"""plot-threshold: render benchmark CSV/JSON outputs to an image file."""

from __future__ import annotations

import argparse
import sys

from .render import PlotSpec, render_threshold, save


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-threshold",
        description="log-log threshold figure from sweep CSV / device JSON",
    )
    parser.add_argument("--csv", action="append", default=[],
                        help="sweep CSV (repeatable)")
    parser.add_argument("--summary", default=None,
                        help="sweep summary JSON (adds the crossover marker)")
    parser.add_argument("--device-json", action="append", default=[],
                        help="device evaluation JSON (repeatable)")
    parser.add_argument("--title", default=None)
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    if not args.csv and not args.device_json:
        parser.error("need at least one --csv or --device-json input")
    spec = PlotSpec(
        csv_paths=args.csv,
        device_json_paths=args.device_json,
        summary_path=args.summary,
        out_path=args.out,
        title=args.title,
    )
    try:
        fig = render_threshold(spec)
        save(fig, args.out)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
