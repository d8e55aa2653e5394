#!/usr/bin/env python3
"""Produce the CS / AS / PS momentum-distribution panels (desk scale).

Writes pmd.csv + lineout.csv + meta.json per state into <out>/{cs,as,ps}.
Grid and ensemble settings follow the package defaults; expect a few
minutes per panel on a laptop.
"""

import argparse
import dataclasses
import math
import sys

from sfholo.cli import cmd_pmd
from sfholo.config import RunConfig


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/pmd_panels")
    ap.add_argument("--r", type=float, default=1.5, help="squeezing magnitude for AS/PS")
    ap.add_argument("--alpha", type=float, default=50.0, help="effective displacement")
    ap.add_argument("--order", type=int, default=20, help="Gauss-Hermite order")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    base = RunConfig()
    base = dataclasses.replace(
        base,
        alpha=args.alpha,
        ensemble=dataclasses.replace(base.ensemble, order=args.order),
        threads=args.threads,
    )
    panels = {
        "cs": {"r": 0.0, "theta": 0.0},
        "as": {"r": args.r, "theta": 0.0},
        "ps": {"r": args.r, "theta": math.pi},
    }
    for name, state in panels.items():
        cfg = dataclasses.replace(base, output_dir=f"{args.out}/{name}", **state)
        print(f"[{name}] r={state['r']} theta={state['theta']:.3f} -> {cfg.output_dir}")
        cmd_pmd(cfg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
