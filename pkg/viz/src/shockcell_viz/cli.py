"""Command line: shockcell-viz frames|gauges|converge <run-dir> [--out DIR]."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .io import VizDataError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shockcell-viz",
        description="Render figures from shockcell run outputs")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_frames = sub.add_parser("frames", help="per-frame pressure panels")
    p_frames.add_argument("run_dir")
    p_frames.add_argument("--out", default=None)

    p_gauges = sub.add_parser("gauges", help="gauge overlays (baseline vs hydrophone)")
    p_gauges.add_argument("run_dir", help="baseline run directory")
    p_gauges.add_argument("--hydrophone", default=None,
                          help="matching run with the hydrophone enabled")
    p_gauges.add_argument("--out", default=None)

    p_conv = sub.add_parser("converge", help="resolution-study overlay")
    p_conv.add_argument("run_dir")
    p_conv.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(sys.argv[1:] if argv is None else argv)
    out = args.out or args.run_dir
    try:
        if args.command == "frames":
            from .frames import render_frames
            report = render_frames(args.run_dir, out)
        elif args.command == "gauges":
            from .gauges import render_gauges
            report = render_gauges(args.run_dir, args.hydrophone, out)
        else:
            from .convergence import render_convergence
            report = render_convergence(args.run_dir, out)
    except VizDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in report["files"]:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
