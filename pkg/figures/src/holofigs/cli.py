"""Batch renderer: ``holofigs --spec figure.json``."""

from __future__ import annotations

import argparse
import sys

from .render import render
from .spec import FigureError, load_spec


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="holofigs", description=__doc__)
    ap.add_argument("--spec", required=True, help="figure specification JSON")
    args = ap.parse_args(argv)
    try:
        spec = load_spec(args.spec)
        written = render(spec)
    except FigureError as exc:
        print(f"holofigs: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
