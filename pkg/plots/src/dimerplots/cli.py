"""CLI: plot --panel spec.txt --out fig.png"""

from __future__ import annotations

import argparse
import sys

from .panel import PanelError, load_panel, render


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="plot", description="Render a figure panel from simulation CSVs."
    )
    ap.add_argument("--panel", required=True, help="panel spec file (key=value)")
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)
    try:
        manifest = render(load_panel(args.panel), args.out)
    except PanelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        n = len(manifest["series"])
        print(f"wrote {manifest['image']} ({n} series)")
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
