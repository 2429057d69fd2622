"""Command-line front-end: ``figkit render --manifest <dir> --figure fig3
--out fig3.svg``."""

from __future__ import annotations

import argparse
import sys

from .manifest import ManifestError
from .render import FIGURE_IDS, FigureJob, Style, render

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figkit",
        description="Regenerate publication-style figures from simulation "
                    "output bundles.")
    sub = parser.add_subparsers(dest="command", required=True)
    rend = sub.add_parser("render", help="render one figure from a bundle")
    rend.add_argument("--manifest", required=True,
                      help="manifest.json or the directory holding it")
    rend.add_argument("--figure", required=True, choices=FIGURE_IDS)
    rend.add_argument("--out", required=True,
                      help="output image path (.svg or .pdf)")
    rend.add_argument("--font-size", type=float, default=Style.font_size)
    rend.add_argument("--cmap", default=Style.cmap)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    style = Style(font_size=args.font_size, cmap=args.cmap)
    try:
        out = render(FigureJob(manifest=args.manifest, figure=args.figure,
                               out=args.out, style=style))
    except (ManifestError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
